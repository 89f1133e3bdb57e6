#include "pixplore/widget_types.hpp"

namespace pixplore {

namespace {
constexpr std::array<std::string_view, kWidgetTypeCount> kNames{
    "Button",   "TextView", "EditText",    "CheckBox", "ImageButton", "ImageView", "RadioButton",
    "Switch",   "SeekBar",  "ProgressBar", "Spinner",  "Toolbar",     "ListItem",  "Icon"};
}

std::string_view widget_type_name(WidgetType t) { return kNames[static_cast<int>(t)]; }

std::optional<WidgetType> widget_type_from_name(std::string_view name) {
  for (int i = 0; i < kWidgetTypeCount; ++i) {
    if (kNames[i] == name) return static_cast<WidgetType>(i);
  }
  return std::nullopt;
}

}  // namespace pixplore
