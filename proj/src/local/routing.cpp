#include "fleet/local/routing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "fleet/errors.hpp"

namespace fleet::local {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leg lengths per robot, indexed by discretized heading states.
class LegTable {
 public:
  LegTable(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs, int headings)
      : robots_(robots), subs_(subs) {
    R_ = robots.size();
    J_ = subs.size();
    H_.resize(R_);
    from0_.resize(R_);
    between_.resize(R_);
    for (std::size_t r = 0; r < R_; ++r) {
      std::size_t H = robots[r].radius ? static_cast<std::size_t>(std::max(1, headings)) : 1;
      H_[r] = H;
      from0_[r].assign(J_ * H, 0);
      between_[r].assign(J_ * H * J_ * H, 0);
      for (std::size_t j = 0; j < J_; ++j)
        for (std::size_t h = 0; h < H; ++h) from0_[r][j * H + h] = len(r, robots[r].pose, j, h);
      for (std::size_t i = 0; i < J_; ++i)
        for (std::size_t hi = 0; hi < H; ++hi) {
          Pose p = pose(r, i, hi);
          for (std::size_t j = 0; j < J_; ++j)
            for (std::size_t hj = 0; hj < H; ++hj) between_[r][((i * H + hi) * J_ + j) * H + hj] = len(r, p, j, hj);
        }
    }
  }

  std::size_t states(std::size_t r) const { return H_[r]; }
  double heading(std::size_t r, std::size_t h) const {
    return robots_[r].radius ? 2 * std::numbers::pi * static_cast<double>(h) / static_cast<double>(H_[r]) : 0.0;
  }
  Pose pose(std::size_t r, std::size_t j, std::size_t h) const {
    return {subs_[j].location.x, subs_[j].location.y, robots_[r].radius ? heading(r, h) : 0.0};
  }
  double first(std::size_t r, std::size_t j, std::size_t h) const { return from0_[r][j * H_[r] + h]; }
  double next(std::size_t r, std::size_t i, std::size_t hi, std::size_t j, std::size_t hj) const {
    std::size_t H = H_[r];
    return between_[r][((i * H + hi) * J_ + j) * H + hj];
  }

 private:
  double len(std::size_t r, const Pose& from, std::size_t j, std::size_t h) const {
    if (!robots_[r].radius) return distance(from.point(), subs_[j].location);
    return dubins_path(from, pose(r, j, h), *robots_[r].radius).totalLength;
  }

  const std::vector<RouteRobot>& robots_;
  const std::vector<RouteSubtask>& subs_;
  std::size_t R_ = 0, J_ = 0;
  std::vector<std::size_t> H_;
  std::vector<std::vector<double>> from0_, between_;
};

// Finish-time DP over heading states for one robot's order, no waiting.
struct HeadingDP {
  std::vector<double> f;  // time after finishing the last visit, per heading
  std::vector<std::vector<int>> back;

  void reset(const RouteRobot& rb) {
    f.assign(1, rb.availableAt);
    back.clear();
  }
  double best() const { return *std::min_element(f.begin(), f.end()); }
};

// f' after appending subtask j behind `last` (-1 = start pose)
std::vector<double> extend(const LegTable& legs, const RouteRobot& rb, std::size_t r, const std::vector<RouteSubtask>& subs,
                           const std::vector<double>& f, int last, std::size_t j, std::vector<int>* back) {
  std::size_t H = legs.states(r);
  std::vector<double> g(H, kInf);
  if (back) back->assign(H, 0);
  for (std::size_t hj = 0; hj < H; ++hj)
    for (std::size_t hi = 0; hi < f.size(); ++hi) {
      double l = last < 0 ? legs.first(r, j, hj) : legs.next(r, static_cast<std::size_t>(last), hi, j, hj);
      double v = f[hi] + l / rb.speed + subs[j].execTime;
      if (v < g[hj]) {
        g[hj] = v;
        if (back) (*back)[hj] = static_cast<int>(hi);
      }
    }
  return g;
}

// Best heading per visit for a fixed order.
std::vector<std::size_t> headings_for(const LegTable& legs, const RouteRobot& rb, std::size_t r,
                                      const std::vector<RouteSubtask>& subs, const std::vector<int>& order) {
  std::vector<std::vector<int>> backs(order.size());
  std::vector<double> f{rb.availableAt};
  int last = -1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    f = extend(legs, rb, r, subs, f, last, static_cast<std::size_t>(order[k]), &backs[k]);
    last = order[k];
  }
  std::vector<std::size_t> hs(order.size(), 0);
  if (order.empty()) return hs;
  std::size_t h = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  for (std::size_t k = order.size(); k-- > 0;) {
    hs[k] = h;
    h = static_cast<std::size_t>(backs[k][h]);
  }
  return hs;
}

double finish_of(const LegTable& legs, const RouteRobot& rb, std::size_t r, const std::vector<RouteSubtask>& subs,
                 const std::vector<int>& order) {
  std::vector<double> f{rb.availableAt};
  int last = -1;
  for (int j : order) {
    f = extend(legs, rb, r, subs, f, last, static_cast<std::size_t>(j), nullptr);
    last = j;
  }
  return *std::min_element(f.begin(), f.end());
}

std::optional<Route> simulate(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs,
                              const std::vector<std::vector<int>>& orders, const LegTable& legs) {
  const std::size_t R = robots.size(), J = subs.size();
  std::vector<std::vector<std::size_t>> hs(R);
  for (std::size_t r = 0; r < R; ++r) hs[r] = headings_for(legs, robots[r], r, subs, orders[r]);
  std::vector<std::vector<int>> members(J);
  for (std::size_t r = 0; r < R; ++r)
    for (int j : orders[r]) members[static_cast<std::size_t>(j)].push_back(static_cast<int>(r));

  Route out;
  out.routes.resize(R);
  std::vector<std::size_t> ptr(R, 0);
  std::vector<double> free(R);
  for (std::size_t r = 0; r < R; ++r) {
    free[r] = robots[r].availableAt;
    out.routes[r].robot = robots[r].id;
    out.routes[r].visits.resize(orders[r].size());
  }
  auto arrival = [&](std::size_t r) {
    std::size_t k = ptr[r];
    std::size_t j = static_cast<std::size_t>(orders[r][k]);
    double l = k == 0 ? legs.first(r, j, hs[r][k]) : legs.next(r, static_cast<std::size_t>(orders[r][k - 1]), hs[r][k - 1], j, hs[r][k]);
    return std::pair<double, double>{free[r] + l / robots[r].speed, l};
  };
  std::size_t done = 0, total = 0;
  for (const auto& o : orders) total += o.size();
  while (done < total) {
    bool progressed = false;
    for (std::size_t j = 0; j < J; ++j) {
      if (members[j].empty()) continue;
      bool ready = true;
      for (int r : members[j]) {
        auto ru = static_cast<std::size_t>(r);
        if (ptr[ru] >= orders[ru].size() || orders[ru][ptr[ru]] != static_cast<int>(j)) ready = false;
      }
      if (!ready) continue;
      double start = 0;
      for (int r : members[j]) start = std::max(start, arrival(static_cast<std::size_t>(r)).first);
      for (int r : members[j]) {
        auto ru = static_cast<std::size_t>(r);
        auto [arr, len] = arrival(ru);
        RouteVisit& v = out.routes[ru].visits[ptr[ru]];
        v.subtask = static_cast<int>(j);
        v.heading = legs.heading(ru, hs[ru][ptr[ru]]);
        v.arrive = arr;
        v.start = start;
        v.end = start + subs[j].execTime;
        v.legLength = len;
        v.from = ptr[ru] == 0 ? robots[ru].pose
                              : legs.pose(ru, static_cast<std::size_t>(orders[ru][ptr[ru] - 1]), hs[ru][ptr[ru] - 1]);
        if (robots[ru].radius)
          v.leg = dubins_path(v.from, legs.pose(ru, j, hs[ru][ptr[ru]]), *robots[ru].radius);
        free[ru] = v.end;
        ++ptr[ru];
        ++done;
      }
      members[j].clear();
      progressed = true;
    }
    if (!progressed) return std::nullopt;
  }
  for (std::size_t r = 0; r < R; ++r) {
    out.routes[r].finish = orders[r].empty() ? robots[r].availableAt : free[r];
    if (!orders[r].empty()) out.makespan = std::max(out.makespan, free[r]);
  }
  return out;
}

void check_staffing(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs) {
  for (const auto& s : subs) {
    int capable = 0;
    for (const auto& r : robots) capable += r.capabilities.count(s.action) ? 1 : 0;
    if (capable < std::max(1, s.n)) throw CapabilityGap("subtask " + s.id + " needs " + std::to_string(s.n) + " " + s.action);
  }
}

std::vector<std::vector<int>> regret_insertion(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs,
                                               const LegTable& legs) {
  const std::size_t R = robots.size(), J = subs.size();
  std::vector<std::vector<int>> orders(R);
  std::vector<std::size_t> syncFloor(R, 0);  // sync subtasks keep their insertion order per robot
  std::vector<char> placed(J, 0);
  for (std::size_t round = 0; round < J; ++round) {
    int pick = -1;
    double pickRegret = -kInf, pickCost = kInf;
    std::vector<std::pair<std::size_t, std::size_t>> pickSlots;
    for (std::size_t j = 0; j < J; ++j) {
      if (placed[j]) continue;
      const bool sync = subs[j].n > 1;
      std::vector<std::tuple<double, std::size_t, std::size_t>> opts;  // (finish, robot, position)
      for (std::size_t r = 0; r < R; ++r) {
        if (!robots[r].capabilities.count(subs[j].action)) continue;
        double bestF = kInf;
        std::size_t bestP = 0;
        for (std::size_t p = sync ? syncFloor[r] : 0; p <= orders[r].size(); ++p) {
          auto o = orders[r];
          o.insert(o.begin() + static_cast<long>(p), static_cast<int>(j));
          double f = finish_of(legs, robots[r], r, subs, o);
          if (f < bestF) bestF = f, bestP = p;
        }
        opts.emplace_back(bestF, r, bestP);
      }
      std::sort(opts.begin(), opts.end());
      std::size_t n = static_cast<std::size_t>(std::max(1, subs[j].n));
      if (opts.size() < n) continue;
      double cost = std::get<0>(opts[n - 1]);
      double regret = opts.size() > n ? std::get<0>(opts[n]) - cost : kInf;
      if (regret > pickRegret + 1e-12 || (std::abs(regret - pickRegret) <= 1e-12 && cost < pickCost)) {
        pick = static_cast<int>(j);
        pickRegret = regret;
        pickCost = cost;
        pickSlots.clear();
        for (std::size_t k = 0; k < n; ++k) pickSlots.emplace_back(std::get<1>(opts[k]), std::get<2>(opts[k]));
      }
    }
    if (pick < 0) break;
    placed[static_cast<std::size_t>(pick)] = 1;
    for (auto [r, p] : pickSlots) {
      orders[r].insert(orders[r].begin() + static_cast<long>(p), pick);
      if (subs[static_cast<std::size_t>(pick)].n > 1) syncFloor[r] = p + 1;
      else if (p < syncFloor[r]) ++syncFloor[r];
    }
  }
  return orders;
}

}  // namespace

std::optional<Route> schedule_routes(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subtasks,
                                     const std::vector<std::vector<int>>& orders, const RouteOptions& opt) {
  if (orders.size() != robots.size()) throw std::invalid_argument("one order per robot required");
  LegTable legs(robots, subtasks, opt.headings);
  return simulate(robots, subtasks, orders, legs);
}

Route route_static_known(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subs, const RouteOptions& opt) {
  if (robots.empty()) throw EmptyTeam("no robots to route");
  check_staffing(robots, subs);
  const std::size_t R = robots.size(), J = subs.size();
  LegTable legs(robots, subs, opt.headings);

  auto heuristic = regret_insertion(robots, subs, legs);
  std::optional<Route> best = simulate(robots, subs, heuristic, legs);
  if (J > opt.exactMaxSubtasks || R > opt.exactMaxRobots) {
    if (!best) throw CapabilityGap("no deadlock-free routing found");
    best->exact = false;
    return *best;
  }

  // exact: robot-by-robot enumeration of ordered partitions
  std::vector<std::vector<int>> orders(R);
  std::vector<int> count(J, 0);
  std::vector<double> closedFinish(R, 0);
  long nodes = 0;
  bool cut = false;
  double bestVal = best ? best->makespan : kInf;
  std::vector<std::vector<int>> bestOrders = heuristic;

  std::function<void(std::size_t, const std::vector<double>&, double)> dfs = [&](std::size_t r, const std::vector<double>& f,
                                                                                  double closedMax) {
    if (cut) return;
    if (++nodes > opt.nodeLimit) {
      cut = true;
      return;
    }
    const double cur = *std::min_element(f.begin(), f.end());
    const bool started = !orders[r].empty();
    double lb = std::max(closedMax, started ? cur : 0.0);
    bool complete = true;
    for (std::size_t j = 0; j < J; ++j) {
      int need = std::max(1, subs[j].n) - count[j];
      if (need <= 0) continue;
      complete = false;
      // enough capable robots left?
      int avail = 0;
      double reach = kInf;
      for (std::size_t q = r; q < R; ++q) {
        if (!robots[q].capabilities.count(subs[j].action)) continue;
        if (q == r && std::find(orders[r].begin(), orders[r].end(), static_cast<int>(j)) != orders[r].end()) continue;
        ++avail;
        Vec2 from = (q == r && started) ? subs[static_cast<std::size_t>(orders[r].back())].location : robots[q].pose.point();
        double t0 = (q == r && started) ? cur : robots[q].availableAt;
        reach = std::min(reach, t0 + distance(from, subs[j].location) / robots[q].speed + subs[j].execTime);
      }
      if (avail < need) return;
      lb = std::max(lb, reach);
    }
    if (lb >= bestVal - 1e-12) return;
    if (complete) {
      auto sched = simulate(robots, subs, orders, legs);
      if (sched && sched->makespan < bestVal - 1e-12) {
        bestVal = sched->makespan;
        bestOrders = orders;
      }
      return;
    }
    for (std::size_t j = 0; j < J; ++j) {
      if (count[j] >= std::max(1, subs[j].n) || !robots[r].capabilities.count(subs[j].action)) continue;
      if (std::find(orders[r].begin(), orders[r].end(), static_cast<int>(j)) != orders[r].end()) continue;
      int last = orders[r].empty() ? -1 : orders[r].back();
      auto g = extend(legs, robots[r], r, subs, f, last, j, nullptr);
      orders[r].push_back(static_cast<int>(j));
      ++count[j];
      dfs(r, g, closedMax);
      --count[j];
      orders[r].pop_back();
      if (cut) return;
    }
    if (r + 1 < R) {
      double fin = started ? cur : 0.0;
      dfs(r + 1, {robots[r + 1].availableAt}, std::max(closedMax, fin));
    }
  };
  dfs(0, {robots[0].availableAt}, 0);

  auto out = simulate(robots, subs, bestOrders, legs);
  if (!out) throw CapabilityGap("no deadlock-free routing found");
  out->exact = !cut;
  out->nodes = nodes;
  return *out;
}

}  // namespace fleet::local
