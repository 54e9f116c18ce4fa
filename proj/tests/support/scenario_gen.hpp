#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleet/exec/world.hpp"

namespace fleet::gen {

using nlohmann::json;

inline json square(double cx, double cy, double half) {
  return json::array({json::array({cx - half, cy - half}), json::array({cx + half, cy - half}),
                      json::array({cx + half, cy + half}), json::array({cx - half, cy + half})});
}

inline json robot(const std::string& id, std::vector<std::string> caps, double x, double y, double speed = 1.0) {
  return {{"id", id}, {"type", "t"}, {"capabilities", caps}, {"maxSpeed", speed}, {"start", json::array({x, y})}};
}

/// One-subtask static task at (x, y).
inline json point_task(const std::string& id, const std::string& action, double x, double y, double eta, int n = 1) {
  return {{"id", id},
          {"class", "staticKnown"},
          {"region", square(x, y, 1.0)},
          {"subtasks", json::array({{{"n", n}, {"action", action}, {"loc", json::array({x, y})}}})},
          {"eta", {{action, eta}}}};
}

/// Mixed-class scenario: six robots (two of each capability pair), three
/// missions of two tasks each, releases at 0 or later.
inline json random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };
  const std::vector<std::vector<std::string>> kinds{{"p", "d"}, {"p", "g"}, {"d", "g"}};
  json robots = json::array();
  for (int i = 0; i < 6; ++i) robots.push_back(robot("r" + std::to_string(i), kinds[static_cast<std::size_t>(i % 3)], uni(0, 4), uni(0, 4), 2.0));
  auto make_task = [&](const std::string& id) {
    double cx = uni(8, 36), cy = uni(4, 16);
    json subs = json::array();
    json t{{"id", id}, {"region", square(cx, cy, 3.0)}, {"satCap", 1.5}};
    int cls = pick(3);
    for (int k = 0; k < 3; ++k) {
      json loc = json::array({cx + uni(-2, 2), cy + uni(-2, 2)});
      if (cls == 0) subs.push_back({{"n", 1 + pick(2)}, {"action", pick(2) ? "d" : "g"}, {"loc", loc}});
      else if (cls == 1) subs.push_back({{"n", k == 0 ? 2 : 1}, {"action", "p"}, {"loc", loc}, {"hidden", k == 2}});
      else {
        double h = uni(0, 6.28);
        subs.push_back({{"n", 1 + pick(2)}, {"action", "g"}, {"loc", loc}, {"vel", json::array({0.3 * std::cos(h), 0.3 * std::sin(h)})}});
      }
    }
    t["class"] = cls == 0 ? "staticKnown" : cls == 1 ? "staticUnknown" : "dynamicKnown";
    t["subtasks"] = subs;
    t["eta"] = {{"d", 3}, {"g", 3}, {"p", 2}};
    return t;
  };
  const std::vector<std::string> templates{"F({a} & F {b})", "F {a} & F {b}", "(!{b} U {a}) & F {b}"};
  json tasks = json::array(), missions = json::array();
  for (int m = 0; m < 3; ++m) {
    std::string a = "t" + std::to_string(2 * m), b = "t" + std::to_string(2 * m + 1);
    tasks.push_back(make_task(a));
    tasks.push_back(make_task(b));
    std::string f = templates[static_cast<std::size_t>(pick(3))];
    f.replace(f.find("{a}"), 3, a);
    while (f.find("{b}") != std::string::npos) f.replace(f.find("{b}"), 3, b);
    missions.push_back({{"id", "m" + std::to_string(m)}, {"formula", f}, {"release", m == 0 ? 0.0 : std::round(uni(0, 30))}});
  }
  return {{"robots", robots},
          {"tasks", tasks},
          {"missions", missions},
          {"params", {{"H", 3}, {"seed", seed}, {"dt", 0.1}, {"perception", 1.5}, {"captureRadius", 0.5}}}};
}

/// Runs the world until everything released settles or `until` passes.
inline void run_world(exec::World& w, double until) {
  while (w.now() < until - 1e-9) {
    w.advance();
    if (w.settled()) break;
  }
}

inline std::vector<exec::EventRecord> events_of(const exec::World& w, const std::string& kind) {
  std::vector<exec::EventRecord> out;
  for (const auto& e : w.events())
    if (e.kind == kind) out.push_back(e);
  return out;
}

}  // namespace fleet::gen
