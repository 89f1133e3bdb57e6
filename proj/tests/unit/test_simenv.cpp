#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>

#include "pixplore/error.hpp"
#include "pixplore/simenv.hpp"
#include "pixplore/vision.hpp"

using namespace pixplore;

namespace {

// Three screens in a line, each with an EditText and a Button; the Button
// on screen i leads to i + 1.
SimApp line_app() {
  SimApp app;
  for (int i = 0; i < 3; ++i) {
    Screen s;
    s.id = i;
    s.widgets.push_back(SimWidget{{20, 40, 150, 34}, WidgetType::kEditText, 1});
    s.widgets.push_back(SimWidget{{20, 120, 100, 34}, WidgetType::kButton, 2});
    app.screens.push_back(s);
  }
  app.transitions[{0, Trigger{ActionKind::kClick, 1, 0}}] = TransitionRule{1, Guard::kNone};
  app.transitions[{1, Trigger{ActionKind::kClick, 1, 0}}] = TransitionRule{2, Guard::kInputFirst};
  app.crashes[{2, Trigger{ActionKind::kLongClick, 1, 0}}] = 0;
  return app;
}

Action on(ActionKind k, WidgetBox box) {
  Action a{k};
  a.target = 0;
  a.target_box = box;
  return a;
}

Action sys(ActionKind k) { return Action{k}; }

int max_depth(const SimApp& app) {
  std::vector<int> depth(app.screens.size(), -1);
  std::deque<int> q{app.start};
  depth[app.start] = 0;
  while (!q.empty()) {
    const int cur = q.front();
    q.pop_front();
    for (const auto& [key, rule] : app.transitions) {
      if (key.first == cur && depth[rule.target] < 0) {
        depth[rule.target] = depth[cur] + 1;
        q.push_back(rule.target);
      }
    }
  }
  return *std::max_element(depth.begin(), depth.end());
}

}  // namespace

TEST_CASE("generation is deterministic and serializes canonically") {
  const SimApp a = generate_app(7, GenerationParams{});
  const SimApp b = generate_app(7, GenerationParams{});
  CHECK(app_to_json(a) == app_to_json(b));
  CHECK(app_from_json(app_to_json(a)) == a);
  CHECK_FALSE(app_to_json(generate_app(8, GenerationParams{})) == app_to_json(a));
}

TEST_CASE("generated apps honour their structural contracts") {
  const ApplicabilityMatrix matrix;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CAPTURE(seed);
    const SimApp app = generate_app(seed, GenerationParams{});
    CHECK(app.screens.size() == 30);
    CHECK(app.reachable_fraction >= 0.8);
    CHECK(app.reachable_fraction == reachable_fraction(app));
    CHECK(max_depth(app) >= 3);
    for (const auto& s : app.screens) {
      CHECK(s.widgets.size() >= 3);
      for (std::size_t i = 0; i < s.widgets.size(); ++i) {
        const auto& b = s.widgets[i].box;
        CHECK(b.w > 0);
        CHECK(b.h > 0);
        CHECK(b.x >= 0);
        CHECK(b.y >= 0);
        CHECK(b.right() <= app.width);
        CHECK(b.bottom() <= app.height);
        for (std::size_t j = i + 1; j < s.widgets.size(); ++j) CHECK(iou(b, s.widgets[j].box) == 0.0);
      }
    }
    auto check_trigger = [&](int screen, const Trigger& t) {
      const auto& s = app.screens[static_cast<std::size_t>(screen)];
      if (t.slot >= 0) {
        REQUIRE(t.slot < static_cast<int>(s.widgets.size()));
        CHECK(matrix.allows(s.widgets[static_cast<std::size_t>(t.slot)].type, t.kind));
      } else {
        CHECK(kind_info(t.kind).category != ActionCategory::kWidget);
      }
    };
    for (const auto& [key, rule] : app.transitions) {
      check_trigger(key.first, key.second);
      CHECK(rule.target >= 0);
      CHECK(rule.target < 30);
      CHECK(app.crashes.count(key) == 0);
    }
    for (const auto& [key, id] : app.crashes) check_trigger(key.first, key.second);
  }
}

TEST_CASE("generation parameters") {
  GenerationParams two;
  two.n_screens = 2;
  two.edge_density = 5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(generate_app(seed, two).reachable_fraction == 1.0);

  GenerationParams safe;
  safe.crash_rate = 0;
  CHECK(generate_app(3, safe).crashes.empty());

  GenerationParams one;
  one.n_screens = 1;
  CHECK_THROWS_AS(generate_app(1, one), Error);
  GenerationParams crowded;
  crowded.min_widgets = 200;
  crowded.max_widgets = 200;
  try {
    generate_app(1, crowded);
    FAIL("expected a generation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGenerationInfeasible);
  }
  GenerationParams bad;
  bad.crash_rate = 1.5;
  CHECK_THROWS_AS(generate_app(1, bad), Error);
}

TEST_CASE("rendering") {
  Screen blank;
  const Image img = render_screen(blank, Viewport{});
  CHECK(detect_widgets(img).empty());
  for (auto p : img.pixels()) CHECK(p == blank.background);

  const SimApp app = generate_app(2, GenerationParams{});
  CHECK(render(app, 5, app.width, app.height) == render(app, 5, app.width, app.height));
  CHECK_THROWS_AS(render(app, 30, app.width, app.height), Error);
  CHECK_THROWS_AS(render(app, -1, app.width, app.height), Error);
}

TEST_CASE("unbound and missed targets stay put") {
  const SimApp app = line_app();
  SimSession s(app);
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kClick, {200, 300, 20, 20}))));
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kClick, {20, 40, 150, 34}))));
  CHECK(std::holds_alternative<Stayed>(s.exec_step(sys(ActionKind::kReturn))));
  CHECK(s.current() == 0);
}

TEST_CASE("hit testing uses IoU above one half") {
  const SimApp app = line_app();
  SimSession s(app);
  // shifted detection still overlapping well: IoU = 90 / 110
  CHECK(s.hit_test(on(ActionKind::kClick, {30, 120, 100, 34})) == 1);
  // half-width box: IoU exactly 0.5 does not select
  CHECK_FALSE(s.hit_test(on(ActionKind::kClick, {20, 120, 50, 34})).has_value());
  Action tap{ActionKind::kClick};
  tap.point = Point{25, 130};
  CHECK(s.hit_test(tap) == 1);
  tap.point = Point{5, 5};
  CHECK_FALSE(s.hit_test(tap).has_value());
}

TEST_CASE("navigation, guards and the return stack") {
  const SimApp app = line_app();
  SimSession s(app);
  const WidgetBox button{20, 120, 100, 34};
  const WidgetBox field{20, 40, 150, 34};
  const auto m = s.exec_step(on(ActionKind::kClick, button));
  REQUIRE(std::holds_alternative<Moved>(m));
  CHECK(std::get<Moved>(m).to == 1);
  CHECK(s.last_trigger() == Trigger{ActionKind::kClick, 1, 0});

  // guarded until the field has been typed into
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kClick, button))));
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kInput, field))));
  CHECK(std::holds_alternative<Moved>(s.exec_step(on(ActionKind::kClick, button))));
  CHECK(s.current() == 2);

  const auto back = s.exec_step(sys(ActionKind::kReturn));
  REQUIRE(std::holds_alternative<Moved>(back));
  CHECK(std::get<Moved>(back).to == 1);
  CHECK(std::holds_alternative<Moved>(s.exec_step(sys(ActionKind::kReturn))));
  CHECK(s.current() == 0);
  CHECK(std::holds_alternative<Stayed>(s.exec_step(sys(ActionKind::kReturn))));
}

TEST_CASE("permission and network guards") {
  SimApp app = line_app();
  app.transitions[{0, Trigger{ActionKind::kClick, 1, 0}}] = TransitionRule{1, Guard::kPermission};
  app.transitions[{1, Trigger{ActionKind::kClick, 1, 0}}] = TransitionRule{2, Guard::kOffline};
  SimSession s(app);
  const WidgetBox button{20, 120, 100, 34};
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kClick, button))));
  s.exec_step(sys(ActionKind::kAccessGrant));
  CHECK(std::holds_alternative<Moved>(s.exec_step(on(ActionKind::kClick, button))));
  CHECK(std::holds_alternative<Stayed>(s.exec_step(on(ActionKind::kClick, button))));
  s.exec_step(sys(ActionKind::kNetworkSwitch));
  CHECK(std::holds_alternative<Moved>(s.exec_step(on(ActionKind::kClick, button))));
}

TEST_CASE("crashes require a reset") {
  const SimApp app = line_app();
  SimSession s(app);
  const WidgetBox button{20, 120, 100, 34};
  s.exec_step(on(ActionKind::kClick, button));
  s.exec_step(on(ActionKind::kInput, {20, 40, 150, 34}));
  s.exec_step(on(ActionKind::kClick, button));
  REQUIRE(s.current() == 2);
  const auto c = s.exec_step(on(ActionKind::kLongClick, button));
  REQUIRE(std::holds_alternative<Crashed>(c));
  CHECK(std::get<Crashed>(c).crash_id == 0);
  CHECK(s.crashed());
  const auto r = s.exec_step(sys(ActionKind::kReturn));
  REQUIRE(std::holds_alternative<Reset>(r));
  CHECK(std::get<Reset>(r).to == 0);
  CHECK_FALSE(s.crashed());
  CHECK(s.current() == 0);
  CHECK(std::holds_alternative<Stayed>(s.exec_step(sys(ActionKind::kReturn))));
}

TEST_CASE("page actions change the viewport, not the screen") {
  const SimApp app = line_app();
  SimSession s(app);
  Action rotate{ActionKind::kOrientationSwitch};
  rotate.parameter = 1.0;
  CHECK(std::holds_alternative<Stayed>(s.exec_step(rotate)));
  CHECK(s.viewport() == Viewport{400, 240});
  CHECK(s.screenshot().width() == 400);
  CHECK(s.current() == 0);
  rotate.parameter = 0.0;
  s.exec_step(rotate);
  CHECK(s.viewport() == Viewport{240, 400});

  Action split{ActionKind::kSplitScreen};
  s.exec_step(split);
  CHECK(s.viewport().height == 200);
  s.exec_step(split);
  CHECK(s.viewport().height == 400);

  Action window{ActionKind::kWindowSize};
  window.parameter = 0.5;
  s.exec_step(window);
  CHECK(s.viewport().width == 120);
  // the 150 px field no longer fits
  CHECK(visible_slots(app.screens[0], s.viewport()) == std::vector<int>{1});
  s.reset();
  CHECK(s.viewport() == Viewport{240, 400});
}
