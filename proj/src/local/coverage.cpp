#include "fleet/local/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fleet/errors.hpp"

namespace fleet::local {

namespace {

// x at which the part of `region` left of x has the given area
double cut_at_area(const Polygon& region, double lo, double hi, double target) {
  double a = lo, b = hi;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (a + b);
    if (region.clip_x(lo, mid).area() < target) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

std::vector<Vec2> lanes(const Polygon& cell, double xlo, double xhi, double w, bool startUp) {
  std::vector<Vec2> pts;
  if (cell.area() <= 0) return pts;
  double width = xhi - xlo;
  int n = std::max(1, static_cast<int>(std::ceil(width / w - 1e-9)));
  bool up = startUp;
  for (int i = 0; i < n; ++i) {
    double x = n == 1 ? 0.5 * (xlo + xhi) : std::min(xlo + (i + 0.5) * w, xhi - 0.5 * w);
    // y extent of the lane's strip so slanted edges stay inside the swath
    Polygon strip = cell.clip_x(std::max(xlo, x - 0.5 * w), std::min(xhi, x + 0.5 * w));
    if (strip.area() <= 0) continue;
    double y0 = strip.min_y(), y1 = strip.max_y();
    if (up) {
      pts.push_back({x, y0});
      pts.push_back({x, y1});
    } else {
      pts.push_back({x, y1});
      pts.push_back({x, y0});
    }
    up = !up;
  }
  return pts;
}

}  // namespace

std::vector<Slab> coverage_partition(const std::vector<CoverageRobot>& team, const Polygon& region) {
  if (team.empty()) throw EmptyTeam("coverage needs at least one robot");
  std::vector<std::size_t> idx(team.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (team[a].position.x != team[b].position.x) return team[a].position.x < team[b].position.x;
    return team[a].id < team[b].id;
  });
  double rate = 0;
  for (const auto& r : team) rate += r.speed * r.sensorWidth;
  const double total = region.area(), x0 = region.min_x(), x1 = region.max_x();

  std::vector<Slab> out;
  double lo = x0, acc = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const CoverageRobot& rb = team[idx[k]];
    acc += rb.speed * rb.sensorWidth / rate;
    double hi = k + 1 == idx.size() ? x1 : cut_at_area(region, x0, x1, acc * total);
    Slab s;
    s.robot = rb.id;
    s.xlo = lo;
    s.xhi = hi;
    s.cell = region.clip_x(lo, hi);
    // start the sweep at the end nearer to the robot
    bool startUp = s.cell.area() > 0 && std::abs(rb.position.y - s.cell.min_y()) <= std::abs(rb.position.y - s.cell.max_y());
    s.sweep = lanes(s.cell, lo, hi, rb.sensorWidth, startUp);
    out.push_back(std::move(s));
    lo = hi;
  }
  return out;
}

double distance_to_path(Vec2 p, const std::vector<Vec2>& path) {
  if (path.empty()) return std::numeric_limits<double>::infinity();
  if (path.size() == 1) return distance(p, path[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < path.size(); ++i) best = std::min(best, point_segment_distance(p, path[i - 1], path[i]));
  return best;
}

std::vector<Insertion> best_insertions(const std::vector<InsertionPlan>& plans, Vec2 site, const std::string& action, int n) {
  std::vector<Insertion> opts;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& pl = plans[k];
    if (!pl.capabilities.count(action)) continue;
    Insertion best{k, 0, std::numeric_limits<double>::infinity()};
    const auto& w = pl.waypoints;
    if (w.empty()) {
      best = {k, 0, 0};
    } else {
      for (std::size_t pos = 1; pos <= w.size(); ++pos) {
        double d = distance(w[pos - 1], site);
        if (pos < w.size()) d += distance(site, w[pos]) - distance(w[pos - 1], w[pos]);
        d /= pl.speed;
        if (d < best.deltaCost - 1e-12) best = {k, pos, d};
      }
    }
    opts.push_back(best);
  }
  std::size_t need = static_cast<std::size_t>(std::max(1, n));
  if (opts.size() < need) throw CapabilityGap("discovered " + action + " subtask needs " + std::to_string(need) + " robots");
  std::stable_sort(opts.begin(), opts.end(), [](const Insertion& a, const Insertion& b) { return a.deltaCost < b.deltaCost - 1e-12; });
  opts.resize(need);
  return opts;
}

std::vector<Insertion> insert_min_disruption(std::vector<InsertionPlan>& plans, Vec2 site, const std::string& action, int n) {
  auto ins = best_insertions(plans, site, action, n);
  for (const auto& i : ins) {
    auto& w = plans[i.plan].waypoints;
    w.insert(w.begin() + static_cast<long>(i.position), site);
  }
  return ins;
}

}  // namespace fleet::local
