#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pixplore/embedding.hpp"

namespace pixplore {

enum class ActionKind : int {
  kClick = 0,
  kInput = 1,
  kDrag = 2,
  kDoubleClick = 3,
  kSwipe = 4,
  kSplitScreen = 5,
  kReturn = 6,
  kBackSwitch = 7,
  kAccessGrant = 8,
  kAccessDeny = 9,
  kNetworkSwitch = 10,
  kLongClick = 11,
  kOrientationSwitch = 12,
  kPhoneInterrupt = 13,
  kMidClick = 14,
  kRightClick = 15,
  kWindowSize = 16,
};

inline constexpr int kActionKindCount = 17;

enum class ActionCategory { kWidget, kPage, kSystem };
enum class PlatformScope { kBoth, kMobileOnly, kWebOnly };
enum class Platform { kMobile, kWeb };

struct ActionKindInfo {
  ActionKind kind;
  std::string_view name;
  ActionCategory category;
  PlatformScope scope;
};

const std::array<ActionKindInfo, kActionKindCount>& action_taxonomy();
const ActionKindInfo& kind_info(ActionKind k);
std::optional<ActionKind> action_kind_from_name(std::string_view name);
bool available_on(ActionKind k, Platform p);
std::string_view platform_name(Platform p);
std::optional<Platform> platform_from_name(std::string_view name);

// Fixed pool of text payloads for `input`.
inline constexpr int kPayloadCount = 8;
const std::array<std::string_view, kPayloadCount>& input_payloads();

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Action {
  ActionKind kind = ActionKind::kReturn;
  std::optional<int> target;            // widget index on the page (widget actions)
  std::optional<WidgetBox> target_box;  // detected box of the target widget
  std::optional<double> parameter;      // swipe +-1, orientation {0,1}, window ratio, payload index / 7
  std::optional<Point> point;           // blind coordinate (monkey baseline only)
  int payload = -1;                     // input payload index

  bool operator==(const Action&) const = default;
};

// What makes two executed actions "the same" for exploration-rate counting.
struct ActionIdentity {
  int kind = 0;
  int target = -1;
  double parameter = 0.0;
  auto operator<=>(const ActionIdentity&) const = default;
};
ActionIdentity identity_of(const Action& a);

// Per widget type, the widget action kinds it accepts.
class ApplicabilityMatrix {
 public:
  ApplicabilityMatrix();  // conventional defaults

  bool allows(WidgetType t, ActionKind k) const;
  void set(WidgetType t, ActionKind k, bool allowed);
  std::vector<ActionKind> kinds_for(WidgetType t) const;

  bool operator==(const ApplicabilityMatrix&) const = default;

 private:
  std::array<std::uint32_t, kWidgetTypeCount> mask_{};
};

// Widget actions by (widget index, kind id), then page, then system actions.
std::vector<Action> applicable_actions(const PageState& page, Platform platform,
                                       const ApplicabilityMatrix& matrix = {});

// concat(one-hot kind, target widget vector or zeros, parameter or 0).
Vec embed_action(const Action& a, const PageState& page, const EmbeddingConfig& cfg);
int action_dim(const EmbeddingConfig& cfg);

std::string describe(const Action& a);

}  // namespace pixplore
