#include "pixplore/actions.hpp"

#include <cmath>
#include <sstream>

#include "pixplore/error.hpp"

namespace pixplore {

namespace {

using AK = ActionKind;
using AC = ActionCategory;
using PS = PlatformScope;

constexpr std::array<ActionKindInfo, kActionKindCount> kTaxonomy{{
    {AK::kClick, "click", AC::kWidget, PS::kBoth},
    {AK::kInput, "input", AC::kWidget, PS::kBoth},
    {AK::kDrag, "drag", AC::kWidget, PS::kBoth},
    {AK::kDoubleClick, "double_click", AC::kWidget, PS::kBoth},
    {AK::kSwipe, "swipe", AC::kPage, PS::kBoth},
    {AK::kSplitScreen, "split_screen", AC::kPage, PS::kBoth},
    {AK::kReturn, "return", AC::kSystem, PS::kBoth},
    {AK::kBackSwitch, "back_switch", AC::kSystem, PS::kBoth},
    {AK::kAccessGrant, "access_grant", AC::kSystem, PS::kBoth},
    {AK::kAccessDeny, "access_deny", AC::kSystem, PS::kBoth},
    {AK::kNetworkSwitch, "network_switch", AC::kSystem, PS::kBoth},
    {AK::kLongClick, "long_click", AC::kWidget, PS::kMobileOnly},
    {AK::kOrientationSwitch, "orientation_switch", AC::kPage, PS::kMobileOnly},
    {AK::kPhoneInterrupt, "phone_interrupt", AC::kSystem, PS::kMobileOnly},
    {AK::kMidClick, "mid_click", AC::kWidget, PS::kWebOnly},
    {AK::kRightClick, "right_click", AC::kWidget, PS::kWebOnly},
    {AK::kWindowSize, "window_size", AC::kPage, PS::kWebOnly},
}};

constexpr std::array<std::string_view, kPayloadCount> kPayloads{
    "",
    "abc",
    "The quick brown fox jumps over the lazy dog",
    "1234567890",
    "user@example.com",
    "\xe6\xb5\x8b\xe8\xaf\x95\xc3\xa9\xc3\xb1",
    "   \t  ",
    "LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM-LOREM-IPSUM",
};

constexpr std::array<double, 2> kWindowRatios{0.5, 1.5};

}  // namespace

const std::array<ActionKindInfo, kActionKindCount>& action_taxonomy() { return kTaxonomy; }

const ActionKindInfo& kind_info(ActionKind k) { return kTaxonomy[static_cast<int>(k)]; }

std::optional<ActionKind> action_kind_from_name(std::string_view name) {
  for (const auto& info : kTaxonomy) {
    if (info.name == name) return info.kind;
  }
  return std::nullopt;
}

bool available_on(ActionKind k, Platform p) {
  switch (kind_info(k).scope) {
    case PS::kBoth: return true;
    case PS::kMobileOnly: return p == Platform::kMobile;
    case PS::kWebOnly: return p == Platform::kWeb;
  }
  return false;
}

std::string_view platform_name(Platform p) { return p == Platform::kMobile ? "mobile" : "web"; }

std::optional<Platform> platform_from_name(std::string_view name) {
  if (name == "mobile") return Platform::kMobile;
  if (name == "web") return Platform::kWeb;
  return std::nullopt;
}

const std::array<std::string_view, kPayloadCount>& input_payloads() { return kPayloads; }

ActionIdentity identity_of(const Action& a) {
  return {static_cast<int>(a.kind), a.target.value_or(-1), a.parameter.value_or(0.0)};
}

ApplicabilityMatrix::ApplicabilityMatrix() {
  using WT = WidgetType;
  const std::array<AK, 5> click_family{AK::kClick, AK::kDoubleClick, AK::kLongClick, AK::kMidClick, AK::kRightClick};
  for (WT t : {WT::kButton, WT::kImageButton, WT::kCheckBox, WT::kRadioButton, WT::kSwitch, WT::kListItem, WT::kIcon,
               WT::kSpinner, WT::kEditText}) {
    for (AK k : click_family) set(t, k, true);
  }
  set(WT::kEditText, AK::kInput, true);
  set(WT::kSeekBar, AK::kDrag, true);
  set(WT::kImageView, AK::kDrag, true);
}

bool ApplicabilityMatrix::allows(WidgetType t, ActionKind k) const {
  return (mask_[static_cast<int>(t)] >> static_cast<int>(k)) & 1u;
}

void ApplicabilityMatrix::set(WidgetType t, ActionKind k, bool allowed) {
  if (kind_info(k).category != ActionCategory::kWidget) {
    throw Error(ErrorCode::kInvalidArgument, "only widget actions belong in the applicability matrix");
  }
  const std::uint32_t bit = 1u << static_cast<int>(k);
  auto& m = mask_[static_cast<int>(t)];
  m = allowed ? (m | bit) : (m & ~bit);
}

std::vector<ActionKind> ApplicabilityMatrix::kinds_for(WidgetType t) const {
  std::vector<ActionKind> out;
  for (const auto& info : kTaxonomy) {
    if (allows(t, info.kind)) out.push_back(info.kind);
  }
  return out;
}

std::vector<Action> applicable_actions(const PageState& page, Platform platform, const ApplicabilityMatrix& matrix) {
  std::vector<Action> out;
  for (int i = 0; i < static_cast<int>(page.widgets.size()); ++i) {
    const auto& w = page.widgets[i];
    for (const auto& info : kTaxonomy) {
      if (info.category != AC::kWidget || !available_on(info.kind, platform) || !matrix.allows(w.type, info.kind)) {
        continue;
      }
      Action a{info.kind, i, w.box, std::nullopt, std::nullopt, -1};
      if (info.kind == AK::kInput) {
        a.payload = (w.box.x + w.box.y + i) % kPayloadCount;
        a.parameter = static_cast<double>(a.payload) / (kPayloadCount - 1);
      }
      out.push_back(a);
    }
  }
  for (const auto& info : kTaxonomy) {
    if (info.category != AC::kPage || !available_on(info.kind, platform)) continue;
    switch (info.kind) {
      case AK::kSwipe:
        out.push_back(Action{info.kind, std::nullopt, std::nullopt, 1.0, std::nullopt, -1});
        out.push_back(Action{info.kind, std::nullopt, std::nullopt, -1.0, std::nullopt, -1});
        break;
      case AK::kOrientationSwitch: {
        const double current = page.width > page.height ? 1.0 : 0.0;
        out.push_back(Action{info.kind, std::nullopt, std::nullopt, 1.0 - current, std::nullopt, -1});
        break;
      }
      case AK::kWindowSize:
        for (double r : kWindowRatios) out.push_back(Action{info.kind, std::nullopt, std::nullopt, r, std::nullopt, -1});
        break;
      default:
        out.push_back(Action{info.kind, std::nullopt, std::nullopt, std::nullopt, std::nullopt, -1});
    }
  }
  for (const auto& info : kTaxonomy) {
    if (info.category != AC::kSystem || !available_on(info.kind, platform)) continue;
    out.push_back(Action{info.kind, std::nullopt, std::nullopt, std::nullopt, std::nullopt, -1});
  }
  return out;
}

int action_dim(const EmbeddingConfig& cfg) { return kActionKindCount + cfg.widget_dim() + 1; }

Vec embed_action(const Action& a, const PageState& page, const EmbeddingConfig& cfg) {
  Vec v(static_cast<std::size_t>(action_dim(cfg)), 0.0);
  v[static_cast<std::size_t>(a.kind)] = 1.0;
  if (a.target) {
    if (*a.target < 0 || *a.target >= static_cast<int>(page.widgets.size())) {
      throw Error(ErrorCode::kTargetOutOfRange, "action targets widget " + std::to_string(*a.target) + " of " +
                                                    std::to_string(page.widgets.size()));
    }
    const Vec w = widget_vector(page.widgets[static_cast<std::size_t>(*a.target)]);
    if (static_cast<int>(w.size()) != cfg.widget_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "widget vector does not match the configured dimensions");
    }
    std::copy(w.begin(), w.end(), v.begin() + kActionKindCount);
  }
  if (a.parameter) v.back() = *a.parameter;
  return v;
}

std::string describe(const Action& a) {
  std::ostringstream os;
  os << kind_info(a.kind).name;
  if (a.target) os << " #" << *a.target;
  if (a.point) os << " @(" << a.point->x << "," << a.point->y << ")";
  if (a.parameter) os << " " << *a.parameter;
  return os.str();
}

}  // namespace pixplore
