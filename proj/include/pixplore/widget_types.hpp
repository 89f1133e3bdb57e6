#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace pixplore {

// 14-way widget taxonomy. Ids are stable and used in one-hot encodings,
// app files and logs.
enum class WidgetType : int {
  kButton = 0,
  kTextView = 1,
  kEditText = 2,
  kCheckBox = 3,
  kImageButton = 4,
  kImageView = 5,
  kRadioButton = 6,
  kSwitch = 7,
  kSeekBar = 8,
  kProgressBar = 9,
  kSpinner = 10,
  kToolbar = 11,
  kListItem = 12,
  kIcon = 13,
};

inline constexpr int kWidgetTypeCount = 14;

std::string_view widget_type_name(WidgetType t);
std::optional<WidgetType> widget_type_from_name(std::string_view name);

inline constexpr std::array<WidgetType, kWidgetTypeCount> kAllWidgetTypes{
    WidgetType::kButton,      WidgetType::kTextView,    WidgetType::kEditText, WidgetType::kCheckBox,
    WidgetType::kImageButton, WidgetType::kImageView,   WidgetType::kRadioButton, WidgetType::kSwitch,
    WidgetType::kSeekBar,     WidgetType::kProgressBar, WidgetType::kSpinner,  WidgetType::kToolbar,
    WidgetType::kListItem,    WidgetType::kIcon};

}  // namespace pixplore
