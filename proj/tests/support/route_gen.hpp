#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fleet/local/routing.hpp"

namespace fleet::gen {

using local::RouteRobot;
using local::RouteSubtask;

inline RouteRobot rr(const std::string& id, Vec2 at, double speed = 1, std::optional<double> radius = {},
                     std::set<std::string> caps = {"grasp", "deliver"}) {
  RouteRobot r;
  r.id = id;
  r.pose = {at.x, at.y, 0};
  r.speed = speed;
  r.radius = radius;
  r.capabilities = std::move(caps);
  return r;
}

// permutation x label brute force for single-robot subtasks, straight legs
inline double mvrp_brute_force(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs) {
  const std::size_t J = subs.size(), R = robots.size();
  std::vector<int> perm(J);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    std::vector<int> label(J, 0);
    for (;;) {
      bool ok = true;
      for (std::size_t k = 0; k < J; ++k)
        if (!robots[static_cast<std::size_t>(label[k])].capabilities.count(subs[static_cast<std::size_t>(perm[k])].action)) ok = false;
      if (ok) {
        std::vector<double> t(R);
        std::vector<Vec2> at(R);
        for (std::size_t r = 0; r < R; ++r) t[r] = robots[r].availableAt, at[r] = robots[r].pose.point();
        double mk = 0;
        for (std::size_t k = 0; k < J; ++k) {
          auto r = static_cast<std::size_t>(label[k]);
          const auto& s = subs[static_cast<std::size_t>(perm[k])];
          t[r] += std::hypot(s.location.x - at[r].x, s.location.y - at[r].y) / robots[r].speed + s.execTime;
          at[r] = s.location;
          mk = std::max(mk, t[r]);
        }
        best = std::min(best, mk);
      }
      std::size_t i = 0;
      while (i < J && ++label[i] == static_cast<int>(R)) label[i++] = 0;
      if (i == J) break;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::vector<RouteSubtask> random_subtasks(std::mt19937_64& rng, int J) {
  std::uniform_real_distribution<double> xy(0, 10), ex(0.5, 4);
  std::vector<RouteSubtask> subs;
  for (int j = 0; j < J; ++j)
    subs.push_back({"s" + std::to_string(j), {xy(rng), xy(rng)}, j % 3 == 2 ? "deliver" : "grasp", 1, ex(rng)});
  return subs;
}

inline std::vector<RouteRobot> random_robots(std::mt19937_64& rng, int R, std::optional<double> radius) {
  std::uniform_real_distribution<double> xy(0, 10), sp(0.5, 2), th(0, 6.28);
  std::vector<RouteRobot> robots;
  for (int r = 0; r < R; ++r) {
    std::set<std::string> caps{"grasp"};
    if (r == 0 || rng() % 2) caps.insert("deliver");
    auto rb = rr("r" + std::to_string(r), {xy(rng), xy(rng)}, sp(rng), radius, caps);
    rb.pose.theta = th(rng);
    robots.push_back(rb);
  }
  return robots;
}

}  // namespace fleet::gen
