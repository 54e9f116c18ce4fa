// Exhaustive reference planner. Shares nothing with the search beyond the
// automaton queries and the result types.
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fleet/assign/planner.hpp"
#include "fleet/errors.hpp"

namespace fleet::assign {

namespace {

struct Ref {
  const PlanningProblem& pb;
  const SearchConfig& cfg;
  std::size_t M, T;

  // symbol of task t in mission m, or -1
  int sym(std::size_t m, std::size_t t) const {
    auto s = pb.missions[m].automaton->symbol_index(pb.tasks[t].id);
    return s ? *s : -1;
  }

  bool can_finish(std::size_t m, const logic::ReachableSet& r, std::vector<int> left) const {
    const auto& A = *pb.missions[m].automaton;
    if (A.intersects_accepting(r)) return true;
    for (std::size_t i = 0; i < left.size(); ++i) {
      auto next = A.advance(r, left[i]);
      if (next.empty()) continue;
      std::vector<int> rest = left;
      rest.erase(rest.begin() + static_cast<long>(i));
      if (can_finish(m, next, rest)) return true;
    }
    return false;
  }

  void orders(std::vector<int>& seq, std::vector<logic::ReachableSet>& reach, std::vector<char>& used,
              std::vector<std::vector<int>>& out) const {
    bool done = true;
    for (std::size_t m = 0; m < M; ++m)
      if (!pb.missions[m].automaton->intersects_accepting(reach[m])) done = false;
    if (done) {
      out.push_back(seq);
      return;
    }
    for (std::size_t t = 0; t < T; ++t) {
      if (used[t]) continue;
      bool ok = true, moved = false, any = false;
      std::vector<logic::ReachableSet> nr = reach;
      for (std::size_t m = 0; m < M && ok; ++m) {
        int s = sym(m, t);
        if (s < 0) continue;
        any = true;
        nr[m] = pb.missions[m].automaton->advance(reach[m], s);
        if (nr[m].empty()) {
          ok = false;
          break;
        }
        std::vector<int> left;
        for (std::size_t u = 0; u < T; ++u)
          if (!used[u] && u != t && sym(m, u) >= 0) left.push_back(sym(m, u));
        std::vector<int> all;
        for (std::size_t u = 0; u < T; ++u)
          if (!used[u] && sym(m, u) >= 0) all.push_back(sym(m, u));
        bool wasFinishable = can_finish(m, reach[m], all);
        if (wasFinishable && !can_finish(m, nr[m], left)) ok = false;
        if (nr[m] != reach[m]) moved = true;
      }
      if (!ok || !moved || !any) continue;
      used[t] = 1;
      seq.push_back(static_cast<int>(t));
      orders(seq, nr, used, out);
      seq.pop_back();
      used[t] = 0;
    }
  }

  double first_arrival(std::size_t t) const {
    double worst = pb.now;
    for (const auto& [action, n] : pb.tasks[t].need) {
      std::vector<double> at;
      for (const auto& r : pb.robots) {
        if (std::count(r.capabilities.begin(), r.capabilities.end(), action) == 0) continue;
        double dx = r.availablePos.x - pb.tasks[t].site.x, dy = r.availablePos.y - pb.tasks[t].site.y;
        at.push_back(std::max(pb.now, r.availableAt) + std::hypot(dx, dy) / r.speed);
      }
      if (n <= 0 || static_cast<int>(at.size()) < n) continue;
      std::nth_element(at.begin(), at.begin() + (n - 1), at.end());
      worst = std::max(worst, at[static_cast<std::size_t>(n - 1)]);
    }
    return worst;
  }

  bool ordered(const std::string& x, const std::string& y) const {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& A = *pb.missions[m].automaton;
      auto i = A.symbol_index(x), j = A.symbol_index(y);
      if (i && j && *i != *j && !logic::symbols_commute(A, *i, *j)) return true;
    }
    return false;
  }

  struct Eval {
    bool feasible = false;
    double chi = 0;
    double makespan = 0;
    std::vector<double> end;
    std::vector<double> teamEnd, teamCost;
    std::vector<Capacity> cap;
  };

  Eval evaluate(const std::vector<int>& seq, const std::vector<int>& label, int K, double speed) const {
    Eval e;
    e.end.assign(T, -1);
    e.teamEnd.assign(static_cast<std::size_t>(K), 0);
    e.teamCost.assign(static_cast<std::size_t>(K), 0);
    e.cap.assign(static_cast<std::size_t>(K), {});
    std::vector<int> lastOf(static_cast<std::size_t>(K), -1);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      std::size_t t = static_cast<std::size_t>(seq[i]);
      std::size_t k = static_cast<std::size_t>(label[i]);
      double begin = pb.now;
      for (std::size_t j = 0; j < i; ++j)
        if (ordered(pb.tasks[t].id, pb.tasks[static_cast<std::size_t>(seq[j])].id))
          begin = std::max(begin, e.end[static_cast<std::size_t>(seq[j])]);
      for (const auto& f : pb.frozen)
        if (ordered(pb.tasks[t].id, f.id)) begin = std::max(begin, f.end);
      double travel;
      if (lastOf[k] >= 0) {
        const Vec2& a = pb.tasks[static_cast<std::size_t>(lastOf[k])].site;
        travel = std::hypot(a.x - pb.tasks[t].site.x, a.y - pb.tasks[t].site.y) / speed;
        begin = std::max(begin, e.teamEnd[k]);
      } else {
        travel = first_arrival(t) - pb.now;
      }
      begin += travel;
      e.end[t] = begin + pb.tasks[t].execTime;
      e.teamEnd[k] = e.end[t];
      e.teamCost[k] += travel + pb.tasks[t].execTime;
      for (const auto& [a, n] : pb.tasks[t].need) e.cap[k][a] = std::max(e.cap[k][a], n);
      lastOf[k] = static_cast<int>(t);
    }
    std::map<std::string, int> demand, supply;
    for (const auto& c : e.cap)
      for (const auto& [a, n] : c) demand[a] += n;
    for (const auto& r : pb.robots)
      for (const auto& a : r.capabilities) ++supply[a];
    e.feasible = K <= static_cast<int>(pb.robots.size());
    for (const auto& [a, n] : demand)
      if (n > supply[a]) e.feasible = false;
    double late = 0;
    for (std::size_t m = 0; m < M; ++m) {
      double fin = -1;
      for (std::size_t t = 0; t < T; ++t)
        if (sym(m, t) >= 0 && e.end[t] >= 0) fin = std::max(fin, e.end[t]);
      for (const auto& f : pb.frozen)
        if (pb.missions[m].automaton->symbol_index(f.id)) fin = std::max(fin, f.end);
      if (fin >= 0) late += pb.missions[m].weight * std::max(0.0, fin - pb.missions[m].deadline);
    }
    double cost = 0;
    for (double c : e.teamCost) cost += c;
    e.makespan = *std::max_element(e.teamEnd.begin(), e.teamEnd.end());
    e.chi = e.makespan + cfg.eta1 * cost + cfg.lambdaD * late;
    return e;
  }
};

}  // namespace

AssignmentResult brute_force_assign(const PlanningProblem& problem, const SearchConfig& config) {
  if (problem.tasks.size() > 6) throw TooLarge("brute force is limited to six tasks");
  Ref ref{problem, config, problem.missions.size(), problem.tasks.size()};

  double speed = problem.navSpeed;
  if (speed <= 0) {
    speed = std::numeric_limits<double>::infinity();
    for (const auto& r : problem.robots) speed = std::min(speed, r.speed);
    if (!std::isfinite(speed)) speed = 1;
  }

  std::vector<int> seq;
  std::vector<logic::ReachableSet> reach;
  for (const auto& m : problem.missions) reach.push_back(m.reach);
  std::vector<char> used(ref.T, 0);
  std::vector<std::vector<int>> all;
  ref.orders(seq, reach, used, all);

  bool have = false;
  Ref::Eval best;
  std::vector<int> bestSeq, bestLabel;
  int bestK = 0;
  for (const auto& order : all) {
    if (order.empty()) {
      if (!have) {
        have = true;
        best = Ref::Eval{true, 0, 0, {}, {}, {}, {}};
        bestSeq.clear();
        bestLabel.clear();
        bestK = 0;
      }
      continue;
    }
    std::vector<int> label(order.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int K) {
      if (i == order.size()) {
        Ref::Eval e = ref.evaluate(order, label, K, speed);
        if (e.feasible && (!have || e.chi < best.chi - 1e-12)) {
          have = true;
          best = e;
          bestSeq = order;
          bestLabel = label;
          bestK = K;
        }
        return;
      }
      for (int k = 0; k <= K; ++k) {
        label[i] = k;
        rec(i + 1, std::max(K, k + 1));
      }
    };
    rec(1, 1);
  }
  if (!have) throw Infeasible("no capacity-feasible complete assignment");

  AssignmentResult res;
  res.found = true;
  res.complete = true;
  res.value = best.chi;
  res.predictedMakespan = best.makespan;
  res.plans.resize(static_cast<std::size_t>(bestK));
  for (std::size_t i = 0; i < bestSeq.size(); ++i) {
    std::size_t t = static_cast<std::size_t>(bestSeq[i]);
    auto& plan = res.plans[static_cast<std::size_t>(bestLabel[i])];
    plan.tasks.push_back({problem.tasks[t].id, best.end[t] - problem.tasks[t].execTime, best.end[t]});
    res.order.push_back(problem.tasks[t].id);
  }
  for (std::size_t k = 0; k < res.plans.size(); ++k) {
    res.plans[k].capacity = best.cap[k];
    res.plans[k].endTime = best.teamEnd[k];
    res.plans[k].cost = best.teamCost[k];
  }
  return res;
}

}  // namespace fleet::assign
