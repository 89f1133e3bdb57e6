#include "pixplore/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

#include "pixplore/error.hpp"
#include "pixplore/rng.hpp"

namespace pixplore {

namespace {

std::uint8_t clamp_shade(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

void fill_disc(Image& img, double cx, double cy, double r, std::uint8_t v) {
  const int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
  const int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
  for (int y = std::max(0, y0); y <= std::min(img.height() - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(img.width() - 1, x1); ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) img.at(x, y) = v;
    }
  }
}

void ring(Image& img, const WidgetBox& b, int t, std::uint8_t v) {
  img.fill_rect(b.x, b.y, b.w, t, v);
  img.fill_rect(b.x, b.bottom() - t, b.w, t, v);
  img.fill_rect(b.x, b.y, t, b.h, v);
  img.fill_rect(b.right() - t, b.y, t, b.h, v);
}

// Low-contrast interior details stay below the strong Canny threshold so a
// widget's edges form a single outer contour.
constexpr int kDetail = 28;

}  // namespace

void draw_widget(Image& img, const SimWidget& w) {
  Rng rng(Rng::splitmix(w.style));
  const WidgetBox& b = w.box;
  const int jitter = rng.range(-6, 6);
  auto shade = [&](int base) { return clamp_shade(base + jitter); };
  switch (w.type) {
    case WidgetType::kButton: {
      const int f = 78;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      ring(img, b, 3, shade(f - kDetail));
      const int bw = b.w / 2, bh = std::max(3, b.h / 4);
      img.fill_rect(b.x + (b.w - bw) / 2, b.y + (b.h - bh) / 2, bw, bh, shade(f + kDetail));
      break;
    }
    case WidgetType::kTextView:
      img.fill_rect(b.x, b.y, b.w, b.h, shade(55));
      break;
    case WidgetType::kEditText: {
      const int f = 112;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      img.fill_rect(b.x, b.bottom() - 3, b.w, 3, shade(f - kDetail));
      break;
    }
    case WidgetType::kCheckBox: {
      const int f = 80;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      ring(img, b, 3, shade(f - kDetail));
      const int s = b.w / 3;
      img.fill_rect(b.x + (b.w - s) / 2, b.y + (b.h - s) / 2, s, s, shade(f + kDetail));
      break;
    }
    case WidgetType::kImageButton: {
      const int f = 80;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      ring(img, b, 3, shade(f - kDetail));
      const double cx = b.x + b.w / 2.0, cy = b.y + b.h / 2.0, r = b.w / 4.0;
      for (int y = b.y; y < b.bottom(); ++y) {
        for (int x = b.x; x < b.right(); ++x) {
          if (std::fabs(x + 0.5 - cx) + std::fabs(y + 0.5 - cy) <= r) img.at(x, y) = shade(f + kDetail);
        }
      }
      break;
    }
    case WidgetType::kImageView: {
      const int f = 72, cell = rng.range(5, 8);
      for (int y = b.y; y < b.bottom(); ++y) {
        for (int x = b.x; x < b.right(); ++x) {
          const bool odd = (((x - b.x) / cell) + ((y - b.y) / cell)) % 2 == 1;
          img.at(x, y) = shade(odd ? f + 24 : f);
        }
      }
      break;
    }
    case WidgetType::kRadioButton: {
      const double cx = b.x + b.w / 2.0, cy = b.y + b.h / 2.0;
      fill_disc(img, cx, cy, b.w / 2.0, shade(70));
      fill_disc(img, cx, cy, b.w / 4.0, shade(70 + kDetail));
      break;
    }
    case WidgetType::kSwitch: {
      const int f = 80;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      const int s = b.h - 8;
      const bool on = rng.bernoulli(0.5);
      img.fill_rect(on ? b.right() - 4 - s : b.x + 4, b.y + 4, s, s, shade(f + kDetail));
      break;
    }
    case WidgetType::kSeekBar: {
      const int f = 88;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      const int tw = std::max(8, b.h / 2);
      const int tx = b.x + 4 + rng.range(0, std::max(0, b.w - tw - 8));
      img.fill_rect(tx, b.y + 3, tw, b.h - 6, shade(f - kDetail));
      break;
    }
    case WidgetType::kProgressBar: {
      const int f = 88;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      const int filled = static_cast<int>(b.w * rng.uniform(0.25, 0.75));
      img.fill_rect(b.x, b.y, filled, b.h, shade(f - kDetail));
      break;
    }
    case WidgetType::kSpinner: {
      const int f = 78;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      ring(img, b, 3, shade(f - kDetail));
      // Down-pointing arrow in the right-hand square.
      const int side = b.h - 10;
      const int ax = b.right() - 5 - side, ay = b.y + 5;
      for (int row = 0; row < side; ++row) {
        const int half = (side - row) / 2;
        img.fill_rect(ax + side / 2 - half, ay + row, 2 * half + 1, 1, shade(f + kDetail));
      }
      break;
    }
    case WidgetType::kToolbar: {
      const int f = 55;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      const int s = b.h / 2;
      img.fill_rect(b.x + 8, b.y + (b.h - s) / 2, s, s, shade(f + kDetail));
      img.fill_rect(b.right() - 8 - s, b.y + (b.h - s) / 2, s, s, shade(f + kDetail));
      break;
    }
    case WidgetType::kListItem: {
      const int f = 105;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      const int s = b.h - 12;
      img.fill_rect(b.x + 6, b.y + 6, s, s, shade(f - kDetail));
      img.fill_rect(b.x + 14 + s, b.y + b.h / 2 - b.h / 10, b.w / 2, std::max(3, b.h / 5), shade(f - kDetail + 6));
      break;
    }
    case WidgetType::kIcon: {
      const int f = 60;
      img.fill_rect(b.x, b.y, b.w, b.h, shade(f));
      fill_disc(img, b.x + b.w / 2.0, b.y + b.h / 2.0, b.w / 4.0, shade(f + kDetail));
      break;
    }
  }
}

std::vector<int> visible_slots(const Screen& screen, const Viewport& vp) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(screen.widgets.size()); ++i) {
    const auto& b = screen.widgets[i].box;
    if (b.x >= 0 && b.y >= 0 && b.right() <= vp.width && b.bottom() <= vp.height) out.push_back(i);
  }
  return out;
}

Image render_screen(const Screen& screen, const Viewport& vp) {
  Image img(vp.width, vp.height, screen.background);
  for (int slot : visible_slots(screen, vp)) draw_widget(img, screen.widgets[slot]);
  return img;
}

Image render(const SimApp& app, int screen_id, int width, int height) {
  if (screen_id < 0 || screen_id >= static_cast<int>(app.screens.size())) {
    throw Error(ErrorCode::kInvalidScreen, "no screen " + std::to_string(screen_id));
  }
  return render_screen(app.screens[screen_id], Viewport{width, height});
}

namespace {

struct SizeRange {
  int w_lo, w_hi, h_lo, h_hi;
};

WidgetBox sized(Rng& rng, WidgetType t, int screen_w) {
  using WT = WidgetType;
  switch (t) {
    case WT::kButton: return {0, 0, rng.range(60, 120), rng.range(28, 40)};
    case WT::kTextView: return {0, 0, rng.range(60, 160), rng.range(20, 26)};
    case WT::kEditText: return {0, 0, rng.range(100, 180), rng.range(30, 38)};
    case WT::kCheckBox: {
      const int s = rng.range(20, 24);
      return {0, 0, s, s};
    }
    case WT::kImageButton: {
      const int s = rng.range(32, 42);
      return {0, 0, s, s};
    }
    case WT::kImageView: {
      const int w = rng.range(50, 90);
      return {0, 0, w, static_cast<int>(w * rng.uniform(0.8, 1.2))};
    }
    case WT::kRadioButton: {
      const int s = rng.range(20, 24);
      return {0, 0, s, s};
    }
    case WT::kSwitch: return {0, 0, rng.range(44, 52), rng.range(22, 26)};
    case WT::kSeekBar: return {0, 0, rng.range(100, 180), rng.range(20, 24)};
    case WT::kProgressBar: return {0, 0, rng.range(100, 180), rng.range(12, 14)};
    case WT::kSpinner: return {0, 0, rng.range(80, 140), rng.range(30, 38)};
    case WT::kToolbar: return {0, 0, screen_w - 8, rng.range(40, 48)};
    case WT::kListItem: return {0, 0, screen_w - 16, rng.range(44, 56)};
    case WT::kIcon: {
      const int s = rng.range(24, 32);
      return {0, 0, s, s};
    }
  }
  return {0, 0, 20, 20};
}

WidgetType draw_type(Rng& rng) {
  using WT = WidgetType;
  static constexpr std::array<std::pair<WT, int>, 13> kWeights{{{WT::kButton, 25},
                                                                {WT::kTextView, 12},
                                                                {WT::kEditText, 8},
                                                                {WT::kCheckBox, 5},
                                                                {WT::kImageButton, 6},
                                                                {WT::kImageView, 6},
                                                                {WT::kRadioButton, 4},
                                                                {WT::kSwitch, 4},
                                                                {WT::kSeekBar, 3},
                                                                {WT::kProgressBar, 3},
                                                                {WT::kSpinner, 4},
                                                                {WT::kListItem, 12},
                                                                {WT::kIcon, 8}}};
  int total = 0;
  for (const auto& [t, wgt] : kWeights) total += wgt;
  int pick = static_cast<int>(rng.index(static_cast<std::size_t>(total)));
  for (const auto& [t, wgt] : kWeights) {
    if (pick < wgt) return t;
    pick -= wgt;
  }
  return WT::kButton;
}

// Rows of widgets top to bottom with occasional wide gaps between groups.
std::optional<Screen> layout_screen(Rng& rng, int id, int target, const GenerationParams& p) {
  Screen s;
  s.id = id;
  s.background = clamp_shade(rng.range(222, 244));
  int y = 8;
  auto add = [&](WidgetType t, WidgetBox b) {
    s.widgets.push_back(SimWidget{b, t, static_cast<std::uint32_t>(rng.next_u64())});
  };
  if (rng.bernoulli(0.35)) {
    WidgetBox b = sized(rng, WidgetType::kToolbar, p.width);
    b.x = 4;
    b.y = y;
    add(WidgetType::kToolbar, b);
    y = b.bottom() + rng.range(24, 40);
  }
  int guard = 0;
  while (static_cast<int>(s.widgets.size()) < target && guard++ < 50) {
    WidgetType first = draw_type(rng);
    std::vector<std::pair<WidgetType, WidgetBox>> row;
    int x = 8;
    if (first == WidgetType::kListItem) {
      WidgetBox b = sized(rng, first, p.width);
      b.x = 8;
      row.emplace_back(first, b);
    } else {
      const int want = rng.range(1, 3);
      WidgetType t = first;
      for (int k = 0; k < want && static_cast<int>(s.widgets.size() + row.size()) < target; ++k) {
        if (k > 0) {
          t = draw_type(rng);
          if (t == WidgetType::kListItem) break;
        }
        WidgetBox b = sized(rng, t, p.width);
        if (x + b.w > p.width - 8) break;
        b.x = x;
        row.emplace_back(t, b);
        x += b.w + rng.range(12, 28);
      }
      if (row.empty()) continue;
    }
    int row_h = 0;
    for (const auto& [t, b] : row) row_h = std::max(row_h, b.h);
    if (y + row_h > p.height - 8) break;
    for (auto& [t, b] : row) {
      b.y = y + (row_h - b.h) / 2;
      add(t, b);
    }
    y += row_h + (rng.bernoulli(0.35) ? rng.range(26, 44) : rng.range(9, 14));
  }
  if (static_cast<int>(s.widgets.size()) < p.min_widgets) return std::nullopt;
  return s;
}

bool navigational(WidgetType t) {
  switch (t) {
    case WidgetType::kButton:
    case WidgetType::kImageButton:
    case WidgetType::kListItem:
    case WidgetType::kIcon:
    case WidgetType::kSpinner:
      return true;
    default:
      return false;
  }
}

bool platform_neutral(ActionKind k) { return kind_info(k).scope == PlatformScope::kBoth; }

// Widget triggers a screen offers, filtered by `pred`.
template <typename Pred>
std::vector<Trigger> widget_triggers(const Screen& s, Pred pred) {
  static const ApplicabilityMatrix matrix;
  std::vector<Trigger> out;
  for (int slot = 0; slot < static_cast<int>(s.widgets.size()); ++slot) {
    for (ActionKind k : matrix.kinds_for(s.widgets[slot].type)) {
      if (pred(k, s.widgets[slot].type)) out.push_back(Trigger{k, slot, 0});
    }
  }
  return out;
}

}  // namespace

SimApp generate_app(std::uint64_t seed, const GenerationParams& p) {
  if (p.n_screens < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two screens");
  if (p.min_widgets < 0 || p.max_widgets < p.min_widgets) throw Error(ErrorCode::kInvalidArgument, "bad widget range");
  if (p.edge_density < 0 || p.crash_rate < 0 || p.crash_rate > 1) {
    throw Error(ErrorCode::kInvalidArgument, "edge_density and crash_rate must be non-negative ratios");
  }
  Rng rng(seed);
  SimApp app;
  app.seed = seed;
  app.width = p.width;
  app.height = p.height;
  for (int id = 0; id < p.n_screens; ++id) {
    std::optional<Screen> screen;
    for (int attempt = 0; attempt < 20 && !screen; ++attempt) {
      screen = layout_screen(rng, id, rng.range(p.min_widgets, p.max_widgets), p);
    }
    if (!screen) {
      throw Error(ErrorCode::kGenerationInfeasible,
                  "cannot pack " + std::to_string(p.min_widgets) + " widgets on a " + std::to_string(p.width) + "x" +
                      std::to_string(p.height) + " screen");
    }
    app.screens.push_back(std::move(*screen));
  }

  std::set<std::pair<int, Trigger>> used;
  auto free_trigger = [&](int screen, bool neutral_only) -> std::optional<Trigger> {
    // Toggles, sliders and text fields change state in place; only
    // navigational widgets open other screens.
    auto cands = widget_triggers(app.screens[screen], [&](ActionKind k, WidgetType t) {
      if (!navigational(t)) return false;
      if (k == ActionKind::kClick) return true;
      return !neutral_only && k == ActionKind::kLongClick && t == WidgetType::kListItem;
    });
    cands.push_back(Trigger{ActionKind::kSwipe, -1, 0});
    cands.push_back(Trigger{ActionKind::kSwipe, -1, 1});
    std::erase_if(cands, [&](const Trigger& t) { return used.count({screen, t}) > 0; });
    // Prefer clicks; swipes only when no widget trigger is left.
    std::vector<Trigger> clicks;
    for (const auto& t : cands) {
      if (t.kind != ActionKind::kSwipe && platform_neutral(t.kind)) clicks.push_back(t);
    }
    const auto& pool = (!clicks.empty() && rng.bernoulli(0.9)) ? clicks : cands;
    if (pool.empty()) return std::nullopt;
    return pool[rng.index(pool.size())];
  };

  auto first_edit = [&](int screen) {
    for (const auto& w : app.screens[screen].widgets) {
      if (w.type == WidgetType::kEditText) return true;
    }
    return false;
  };

  // Spanning structure: each screen hangs off a recent predecessor so deep
  // screens need multi-step chains.
  for (int child = 1; child < p.n_screens; ++child) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      const int lo = std::max(0, child - 4);
      const int parent = lo + static_cast<int>(rng.index(static_cast<std::size_t>(child - lo)));
      auto trig = free_trigger(parent, true);
      if (!trig) continue;
      Guard guard = Guard::kNone;
      const double g = rng.uniform();
      if (first_edit(parent) && g < 0.35) {
        guard = Guard::kInputFirst;
      } else if (g > 0.93) {
        guard = Guard::kPermission;
      } else if (g > 0.90) {
        guard = Guard::kOffline;
      }
      used.insert({parent, *trig});
      app.transitions[{parent, *trig}] = TransitionRule{child, guard};
      break;
    }
  }

  const int extra = static_cast<int>(std::lround(p.edge_density * p.n_screens));
  for (int e = 0; e < extra; ++e) {
    const int from = static_cast<int>(rng.index(app.screens.size()));
    int to = static_cast<int>(rng.index(app.screens.size() - 1));
    if (to >= from) ++to;
    auto trig = free_trigger(from, false);
    if (!trig) continue;
    used.insert({from, *trig});
    app.transitions[{from, *trig}] = TransitionRule{to, Guard::kNone};
  }

  int crash_id = 0;
  for (int s = 0; s < p.n_screens; ++s) {
    auto cands = widget_triggers(app.screens[s], [](ActionKind k, WidgetType) {
      return k != ActionKind::kDrag && k != ActionKind::kInput;
    });
    for (ActionKind k : {ActionKind::kPhoneInterrupt, ActionKind::kNetworkSwitch, ActionKind::kOrientationSwitch}) {
      cands.push_back(Trigger{k, -1, 0});
    }
    for (const auto& t : cands) {
      if (used.count({s, t}) > 0) continue;
      if (rng.bernoulli(p.crash_rate)) {
        used.insert({s, t});
        app.crashes[{s, t}] = crash_id++;
      }
    }
  }
  app.reachable_fraction = reachable_fraction(app);
  return app;
}

double reachable_fraction(const SimApp& app) {
  if (app.screens.empty()) return 0.0;
  std::vector<bool> seen(app.screens.size(), false);
  std::deque<int> queue{app.start};
  seen[app.start] = true;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (const auto& [key, rule] : app.transitions) {
      if (key.first == cur && !seen[rule.target]) {
        seen[rule.target] = true;
        queue.push_back(rule.target);
      }
    }
  }
  return static_cast<double>(std::count(seen.begin(), seen.end(), true)) / static_cast<double>(seen.size());
}

namespace {

using ojson = nlohmann::ordered_json;

const char* guard_name(Guard g) {
  switch (g) {
    case Guard::kNone: return "none";
    case Guard::kInputFirst: return "input_first";
    case Guard::kPermission: return "permission";
    case Guard::kOffline: return "offline";
  }
  return "none";
}

Guard guard_from(const std::string& s) {
  if (s == "none") return Guard::kNone;
  if (s == "input_first") return Guard::kInputFirst;
  if (s == "permission") return Guard::kPermission;
  if (s == "offline") return Guard::kOffline;
  throw Error(ErrorCode::kConfig, "unknown guard '" + s + "'");
}

ojson trigger_json(const Trigger& t) {
  ojson j;
  j["kind"] = std::string(kind_info(t.kind).name);
  j["slot"] = t.slot;
  j["bucket"] = t.bucket;
  return j;
}

Trigger trigger_from(const ojson& j) {
  const auto name = j.at("kind").get<std::string>();
  const auto kind = action_kind_from_name(name);
  if (!kind) throw Error(ErrorCode::kConfig, "unknown action kind '" + name + "'");
  return Trigger{*kind, j.at("slot").get<int>(), j.at("bucket").get<int>()};
}

}  // namespace

std::string app_to_json(const SimApp& app) {
  ojson j;
  j["format"] = "pixplore-app/1";
  j["seed"] = app.seed;
  j["width"] = app.width;
  j["height"] = app.height;
  j["start"] = app.start;
  j["reachable_fraction"] = app.reachable_fraction;
  j["screens"] = ojson::array();
  for (const auto& s : app.screens) {
    ojson js;
    js["id"] = s.id;
    js["background"] = s.background;
    js["widgets"] = ojson::array();
    for (const auto& w : s.widgets) {
      ojson jw;
      jw["x"] = w.box.x;
      jw["y"] = w.box.y;
      jw["w"] = w.box.w;
      jw["h"] = w.box.h;
      jw["type"] = std::string(widget_type_name(w.type));
      jw["style"] = w.style;
      js["widgets"].push_back(jw);
    }
    j["screens"].push_back(js);
  }
  j["transitions"] = ojson::array();
  for (const auto& [key, rule] : app.transitions) {
    ojson jt;
    jt["from"] = key.first;
    jt["trigger"] = trigger_json(key.second);
    jt["to"] = rule.target;
    jt["guard"] = guard_name(rule.guard);
    j["transitions"].push_back(jt);
  }
  j["crashes"] = ojson::array();
  for (const auto& [key, id] : app.crashes) {
    ojson jc;
    jc["screen"] = key.first;
    jc["trigger"] = trigger_json(key.second);
    jc["id"] = id;
    j["crashes"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

SimApp app_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("app file is not valid JSON: ") + e.what());
  }
  try {
    SimApp app;
    app.seed = j.at("seed").get<std::uint64_t>();
    app.width = j.at("width").get<int>();
    app.height = j.at("height").get<int>();
    app.start = j.at("start").get<int>();
    app.reachable_fraction = j.at("reachable_fraction").get<double>();
    for (const auto& js : j.at("screens")) {
      Screen s;
      s.id = js.at("id").get<int>();
      s.background = js.at("background").get<std::uint8_t>();
      for (const auto& jw : js.at("widgets")) {
        const auto tname = jw.at("type").get<std::string>();
        const auto type = widget_type_from_name(tname);
        if (!type) throw Error(ErrorCode::kConfig, "unknown widget type '" + tname + "'");
        s.widgets.push_back(SimWidget{
            WidgetBox{jw.at("x").get<int>(), jw.at("y").get<int>(), jw.at("w").get<int>(), jw.at("h").get<int>()},
            *type, jw.at("style").get<std::uint32_t>()});
      }
      app.screens.push_back(std::move(s));
    }
    const int n = static_cast<int>(app.screens.size());
    auto check_screen = [&](int id) {
      if (id < 0 || id >= n) throw Error(ErrorCode::kInvalidScreen, "screen id " + std::to_string(id) + " out of range");
    };
    check_screen(app.start);
    for (const auto& jt : j.at("transitions")) {
      const int from = jt.at("from").get<int>();
      const int to = jt.at("to").get<int>();
      check_screen(from);
      check_screen(to);
      app.transitions[{from, trigger_from(jt.at("trigger"))}] = TransitionRule{to, guard_from(jt.at("guard").get<std::string>())};
    }
    for (const auto& jc : j.at("crashes")) {
      const int s = jc.at("screen").get<int>();
      check_screen(s);
      app.crashes[{s, trigger_from(jc.at("trigger"))}] = jc.at("id").get<int>();
    }
    return app;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed app file: ") + e.what());
  }
}

std::string outcome_name(const StepOutcome& o) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Moved>) return "moved";
        if constexpr (std::is_same_v<T, Stayed>) return "stayed";
        if constexpr (std::is_same_v<T, Crashed>) return "crashed";
        return "reset";
      },
      o);
}

SimSession::SimSession(const SimApp& app) : app_(&app) { reset(); }

void SimSession::reset() {
  current_ = app_->start;
  nav_stack_.clear();
  permission_ = false;
  network_on_ = true;
  crashed_ = false;
  inputs_done_.clear();
  viewport_ = Viewport{app_->width, app_->height};
  last_trigger_.reset();
}

Image SimSession::screenshot() const { return render_screen(app_->screens[current_], viewport_); }

std::optional<int> SimSession::hit_test(const Action& a) const {
  const Screen& s = app_->screens[current_];
  const auto slots = visible_slots(s, viewport_);
  if (a.point) {
    for (int slot : slots) {
      const auto& b = s.widgets[slot].box;
      if (a.point->x >= b.x && a.point->x < b.right() && a.point->y >= b.y && a.point->y < b.bottom()) return slot;
    }
    return std::nullopt;
  }
  if (!a.target_box) return std::nullopt;
  std::optional<int> best;
  double best_iou = 0.5;
  for (int slot : slots) {
    const double v = iou(*a.target_box, s.widgets[slot].box);
    if (v > best_iou) {
      best_iou = v;
      best = slot;
    }
  }
  return best;
}

StepOutcome SimSession::exec_step(const Action& a) {
  last_trigger_.reset();
  if (crashed_) {
    reset();
    return Reset{current_};
  }
  const Screen& screen = app_->screens[current_];
  Trigger trig{a.kind, -1, 0};
  if (kind_info(a.kind).category == ActionCategory::kWidget) {
    const auto slot = hit_test(a);
    if (!slot) return Stayed{};
    trig.slot = *slot;
    if (a.kind == ActionKind::kInput && screen.widgets[*slot].type == WidgetType::kEditText) inputs_done_.insert(*slot);
  } else if (a.kind == ActionKind::kSwipe) {
    trig.bucket = a.parameter.value_or(1.0) > 0 ? 0 : 1;
  }

  const auto key = std::make_pair(current_, trig);
  if (auto it = app_->crashes.find(key); it != app_->crashes.end()) {
    crashed_ = true;
    last_trigger_ = trig;
    return Crashed{it->second};
  }
  if (auto it = app_->transitions.find(key); it != app_->transitions.end()) {
    const TransitionRule& rule = it->second;
    bool open = true;
    switch (rule.guard) {
      case Guard::kNone: break;
      case Guard::kInputFirst: {
        open = false;
        for (int slot = 0; slot < static_cast<int>(screen.widgets.size()); ++slot) {
          if (screen.widgets[slot].type == WidgetType::kEditText) {
            open = inputs_done_.count(slot) > 0;
            break;
          }
        }
        break;
      }
      case Guard::kPermission: open = permission_; break;
      case Guard::kOffline: open = !network_on_; break;
    }
    if (open) {
      last_trigger_ = trig;
      nav_stack_.push_back(current_);
      current_ = rule.target;
      inputs_done_.clear();
      return Moved{current_};
    }
    return Stayed{};
  }

  switch (a.kind) {
    case ActionKind::kReturn:
      if (nav_stack_.empty()) return Stayed{};
      current_ = nav_stack_.back();
      nav_stack_.pop_back();
      inputs_done_.clear();
      return Moved{current_};
    case ActionKind::kBackSwitch: inputs_done_.clear(); break;
    case ActionKind::kAccessGrant: permission_ = true; break;
    case ActionKind::kAccessDeny: permission_ = false; break;
    case ActionKind::kNetworkSwitch: network_on_ = !network_on_; break;
    case ActionKind::kOrientationSwitch: {
      const bool landscape = a.parameter.value_or(1.0) > 0.5;
      const int lo = std::min(app_->width, app_->height), hi = std::max(app_->width, app_->height);
      viewport_ = landscape ? Viewport{hi, lo} : Viewport{lo, hi};
      break;
    }
    case ActionKind::kWindowSize: {
      const double r = std::clamp(a.parameter.value_or(1.0), 0.05, 2.0);
      viewport_.width = std::clamp(static_cast<int>(std::lround(app_->width * r)), 16, 2 * app_->width);
      break;
    }
    case ActionKind::kSplitScreen:
      viewport_.height = viewport_.height == app_->height ? app_->height / 2 : app_->height;
      break;
    default: break;
  }
  return Stayed{};
}

StepOutcome exec_step(SimSession& session, const Action& a) { return session.exec_step(a); }

}  // namespace pixplore
