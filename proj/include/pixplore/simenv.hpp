#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pixplore/actions.hpp"
#include "pixplore/image.hpp"
#include "pixplore/vision.hpp"
#include "pixplore/widget_types.hpp"

namespace pixplore {

struct SimWidget {
  WidgetBox box;
  WidgetType type = WidgetType::kButton;
  std::uint32_t style = 0;  // seeds the shade and feature placement
  bool operator==(const SimWidget&) const = default;
};

struct Screen {
  int id = 0;
  std::vector<SimWidget> widgets;
  std::uint8_t background = 235;
  bool operator==(const Screen&) const = default;
};

// Matches an action against a screen: kind, widget slot (-1 for page and
// system actions) and parameter bucket (swipe up 0 / down 1, else 0).
struct Trigger {
  ActionKind kind = ActionKind::kClick;
  int slot = -1;
  int bucket = 0;
  auto operator<=>(const Trigger&) const = default;
};

enum class Guard {
  kNone,
  kInputFirst,  // an input on the screen's first EditText must precede the trigger
  kPermission,  // access must have been granted
  kOffline,     // network must be switched off
};

struct TransitionRule {
  int target = 0;
  Guard guard = Guard::kNone;
  bool operator==(const TransitionRule&) const = default;
};

struct SimApp {
  int width = 240;
  int height = 400;
  std::vector<Screen> screens;
  int start = 0;
  std::map<std::pair<int, Trigger>, TransitionRule> transitions;
  std::map<std::pair<int, Trigger>, int> crashes;  // value: crash id
  std::uint64_t seed = 0;
  double reachable_fraction = 1.0;

  bool operator==(const SimApp&) const = default;
};

struct GenerationParams {
  int n_screens = 30;
  int min_widgets = 3;
  int max_widgets = 8;
  double edge_density = 0.5;  // extra edges per screen
  double crash_rate = 0.03;
  int width = 240;
  int height = 400;
};

SimApp generate_app(std::uint64_t seed, const GenerationParams& params);

// Fraction of screens reachable from start when all guards can be satisfied.
double reachable_fraction(const SimApp& app);

// Canonical JSON with stable field order.
std::string app_to_json(const SimApp& app);
SimApp app_from_json(const std::string& text);

// Viewport the screen is drawn into; page actions change it.
struct Viewport {
  int width = 240;
  int height = 400;
  bool operator==(const Viewport&) const = default;
};

// Widgets of `screen` that are fully visible in the viewport.
std::vector<int> visible_slots(const Screen& screen, const Viewport& vp);

Image render_screen(const Screen& screen, const Viewport& vp);
Image render(const SimApp& app, int screen_id, int width, int height);

// Draws one widget; exposed so classifier tests can build isolated patches.
void draw_widget(Image& img, const SimWidget& w);

struct Moved {
  int to = 0;
};
struct Stayed {};
struct Crashed {
  int crash_id = 0;
};
struct Reset {
  int to = 0;
};
using StepOutcome = std::variant<Moved, Stayed, Crashed, Reset>;
std::string outcome_name(const StepOutcome& o);

// Per-session mutable state over an immutable app.
class SimSession {
 public:
  explicit SimSession(const SimApp& app);

  void reset();
  int current() const { return current_; }
  bool crashed() const { return crashed_; }
  const Viewport& viewport() const { return viewport_; }
  Image screenshot() const;

  // Applies one action. A crashed session only accepts reset(); any other
  // step then returns Reset after restarting from the start screen.
  StepOutcome exec_step(const Action& a);

  // Ground-truth slot selected by an action, if any.
  std::optional<int> hit_test(const Action& a) const;

  // Transition (from, trigger) edges fired so far are reported by the
  // outcome; this exposes the last fired trigger for logging.
  const std::optional<Trigger>& last_trigger() const { return last_trigger_; }

 private:
  const SimApp* app_;
  int current_ = 0;
  std::vector<int> nav_stack_;
  bool permission_ = false;
  bool network_on_ = true;
  bool crashed_ = false;
  std::set<int> inputs_done_;
  Viewport viewport_;
  std::optional<Trigger> last_trigger_;
};

StepOutcome exec_step(SimSession& session, const Action& a);

}  // namespace pixplore
