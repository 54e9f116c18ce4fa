#include "fleet/assign/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "fleet/errors.hpp"

namespace fleet::assign {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("profiles of size " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

double node_value(const std::vector<double>& teamEnd, const std::vector<double>& teamCost,
                  const std::vector<int>& psiMin, const std::vector<double>& weights, double eta1, double eta2) {
  if (psiMin.size() != weights.size()) throw DimensionMismatch("psi and weight vectors differ in length");
  double maxT = 0, sumC = 0, psi = 0;
  for (double t : teamEnd) maxT = std::max(maxT, t);
  for (double c : teamCost) sumC += c;
  for (std::size_t m = 0; m < psiMin.size(); ++m) psi += weights[m] * std::max(0, psiMin[m]);
  return maxT + eta1 * sumC + eta2 * psi;
}

bool capacity_feasible(const std::vector<Capacity>& teams, const std::vector<RobotInput>& robots) {
  std::map<std::string, int> need, have;
  for (const auto& k : teams)
    for (const auto& [a, b] : k) need[a] += b;
  for (const auto& r : robots)
    for (const auto& a : r.capabilities) ++have[a];
  for (const auto& [a, b] : need)
    if (b > have[a]) return false;
  return true;
}

namespace {

constexpr double kEps = 1e-9;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Team {
  std::vector<int> seq;
  Capacity cap;
  double T = 0;
  double C = 0;
};

struct Node {
  long id = 0;
  int depth = 0;
  std::vector<Team> teams;
  std::vector<logic::ReachableSet> reach;
  std::vector<double> te;  // per pool task, NaN while unassigned
  std::vector<int> order;
  double chi = 0;
  double lb = 0;
  bool complete = false;
};

struct Key {
  double chi;
  int depth;
  long id;
};

struct KeyGreater {
  bool operator()(const Key& a, const Key& b) const {
    if (a.chi != b.chi) return a.chi > b.chi;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

bool better(const Node& a, const Node& b) {
  if (a.chi != b.chi) return a.chi < b.chi;
  if (a.depth != b.depth) return a.depth > b.depth;
  return a.id < b.id;
}

}  // namespace

struct Planner::Impl {
  PlanningProblem pb;
  SearchConfig cfg;
  std::size_t M = 0, T = 0;
  double navSpeed = 1;

  std::vector<std::vector<std::pair<int, int>>> taskSyms;  // task -> (mission, symbol)
  std::vector<std::vector<int>> depPool;                   // dependent pool tasks
  std::vector<std::vector<int>> depFrozen;                 // dependent frozen tasks
  std::vector<double> arrival;
  std::vector<std::unique_ptr<logic::CompletionOracle>> oracles;
  std::vector<char> stuck;
  std::vector<std::uint64_t> fullMask;  // per mission: pool symbols
  std::vector<double> frozenFinish;     // per mission
  Node root;

  Impl(PlanningProblem p, SearchConfig c) : pb(std::move(p)), cfg(std::move(c)) { prepare(); }

  void prepare() {
    M = pb.missions.size();
    T = pb.tasks.size();
    navSpeed = pb.navSpeed;
    if (navSpeed <= 0) {
      navSpeed = std::numeric_limits<double>::infinity();
      for (const auto& r : pb.robots) navSpeed = std::min(navSpeed, r.speed);
      if (!std::isfinite(navSpeed)) navSpeed = 1;
    }
    taskSyms.assign(T, {});
    fullMask.assign(M, 0);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t m = 0; m < M; ++m) {
        if (auto s = pb.missions[m].automaton->symbol_index(pb.tasks[t].id)) {
          if (*s >= 64) throw PlanningFailed("mission alphabet too large");
          taskSyms[t].emplace_back(static_cast<int>(m), *s);
          fullMask[m] |= std::uint64_t{1} << *s;
        }
      }

    // static dependence between tasks sharing a mission
    std::vector<std::vector<std::vector<char>>> commute(M);
    for (std::size_t m = 0; m < M; ++m) {
      const auto& A = *pb.missions[m].automaton;
      std::size_t n = A.alphabet().size();
      commute[m].assign(n, std::vector<char>(n, 1));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          commute[m][i][j] = commute[m][j][i] =
              logic::symbols_commute(A, static_cast<int>(i), static_cast<int>(j));
    }
    auto dependent = [&](const std::string& x, const std::string& y) {
      for (std::size_t m = 0; m < M; ++m) {
        const auto& A = *pb.missions[m].automaton;
        auto i = A.symbol_index(x), j = A.symbol_index(y);
        if (i && j && !commute[m][static_cast<std::size_t>(*i)][static_cast<std::size_t>(*j)]) return true;
      }
      return false;
    };
    depPool.assign(T, {});
    depFrozen.assign(T, {});
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t u = 0; u < T; ++u)
        if (u != t && dependent(pb.tasks[t].id, pb.tasks[u].id)) depPool[t].push_back(static_cast<int>(u));
      for (std::size_t f = 0; f < pb.frozen.size(); ++f)
        if (dependent(pb.tasks[t].id, pb.frozen[f].id)) depFrozen[t].push_back(static_cast<int>(f));
    }

    arrival.assign(T, pb.now);
    for (std::size_t t = 0; t < T; ++t) {
      double worst = pb.now;
      for (const auto& [a, n] : pb.tasks[t].need) {
        std::vector<double> times;
        for (const auto& r : pb.robots)
          if (std::find(r.capabilities.begin(), r.capabilities.end(), a) != r.capabilities.end())
            times.push_back(std::max(pb.now, r.availableAt) + distance(r.availablePos, pb.tasks[t].site) / r.speed);
        std::sort(times.begin(), times.end());
        if (static_cast<int>(times.size()) >= n && n > 0) worst = std::max(worst, times[static_cast<std::size_t>(n - 1)]);
      }
      arrival[t] = worst;
    }

    frozenFinish.assign(M, -1);
    for (const auto& f : pb.frozen)
      for (std::size_t m = 0; m < M; ++m)
        if (pb.missions[m].automaton->symbol_index(f.id)) frozenFinish[m] = std::max(frozenFinish[m], f.end);

    oracles.clear();
    stuck.assign(M, 0);
    root = Node{};
    root.reach.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
      oracles.push_back(std::make_unique<logic::CompletionOracle>(pb.missions[m].automaton));
      root.reach[m] = pb.missions[m].reach;
      stuck[m] = !oracles[m]->completable(root.reach[m], fullMask[m]);
    }
    root.te.assign(T, kNaN);
    evaluate(root);
  }

  bool assigned(const Node& n, std::size_t t) const { return !std::isnan(n.te[t]); }

  std::uint64_t remaining(const Node& n, std::size_t m) const {
    std::uint64_t mask = fullMask[m];
    for (std::size_t t = 0; t < T; ++t)
      if (assigned(n, t))
        for (auto [mm, s] : taskSyms[t])
          if (static_cast<std::size_t>(mm) == m) mask &= ~(std::uint64_t{1} << s);
    return mask;
  }

  std::vector<int> candidates(const Node& n) const {
    std::vector<int> out;
    std::vector<std::uint64_t> rem(M);
    for (std::size_t m = 0; m < M; ++m) rem[m] = remaining(n, m);
    for (std::size_t t = 0; t < T; ++t) {
      if (assigned(n, t) || taskSyms[t].empty()) continue;
      bool ok = true, changed = false;
      for (auto [m, s] : taskSyms[t]) {
        const auto& A = *pb.missions[static_cast<std::size_t>(m)].automaton;
        logic::ReachableSet next = A.advance(n.reach[static_cast<std::size_t>(m)], s);
        if (next.empty()) {
          ok = false;
          break;
        }
        if (!stuck[static_cast<std::size_t>(m)] &&
            !oracles[static_cast<std::size_t>(m)]->completable(next, rem[static_cast<std::size_t>(m)] & ~(std::uint64_t{1} << s))) {
          ok = false;
          break;
        }
        if (next != n.reach[static_cast<std::size_t>(m)]) changed = true;
      }
      if (ok && changed) out.push_back(static_cast<int>(t));
    }
    return out;
  }

  void evaluate(Node& n) const {
    std::vector<double> ends, costs, weights;
    std::vector<int> psi;
    for (const Team& k : n.teams) {
      ends.push_back(k.T);
      costs.push_back(k.C);
    }
    double late = 0;
    bool complete = true;
    for (std::size_t m = 0; m < M; ++m) {
      const auto& A = *pb.missions[m].automaton;
      psi.push_back(A.distances().min_over(n.reach[m]));
      weights.push_back(pb.missions[m].weight);
      if (!A.intersects_accepting(n.reach[m])) complete = false;
      double fin = frozenFinish[m];
      for (std::size_t t = 0; t < T; ++t)
        if (assigned(n, t))
          for (auto [mm, s] : taskSyms[t])
            if (static_cast<std::size_t>(mm) == m) fin = std::max(fin, n.te[t]);
      if (fin >= 0) late += pb.missions[m].weight * std::max(0.0, fin - pb.missions[m].deadline);
    }
    n.chi = node_value(ends, costs, psi, weights, cfg.eta1, cfg.eta2) + cfg.lambdaD * late;
    n.lb = node_value(ends, costs, std::vector<int>(M, 0), weights, cfg.eta1, 0) + cfg.lambdaD * late;
    n.complete = complete;
  }

  // team < 0 opens a new team
  Node child(const Node& p, int t, int team) const {
    Node c = p;
    c.depth = p.depth + 1;
    const TaskInput& task = pb.tasks[static_cast<std::size_t>(t)];
    // predecessor end + navigation + execution
    double ready = pb.now;
    for (int u : depPool[static_cast<std::size_t>(t)])
      if (assigned(p, static_cast<std::size_t>(u))) ready = std::max(ready, p.te[static_cast<std::size_t>(u)]);
    for (int f : depFrozen[static_cast<std::size_t>(t)]) ready = std::max(ready, pb.frozen[static_cast<std::size_t>(f)].end);
    Team* k;
    double nav;
    if (team < 0) {
      c.teams.emplace_back();
      k = &c.teams.back();
      nav = arrival[static_cast<std::size_t>(t)] - pb.now;
    } else {
      k = &c.teams[static_cast<std::size_t>(team)];
      int last = k->seq.back();
      nav = distance(pb.tasks[static_cast<std::size_t>(last)].site, task.site) / navSpeed;
      ready = std::max(ready, k->T);
    }
    k->C += nav + task.execTime;
    double start = ready + nav;
    double te = start + task.execTime;
    k->T = te;
    k->seq.push_back(t);
    for (const auto& [a, n] : task.need) k->cap[a] = std::max(k->cap[a], n);
    c.te[static_cast<std::size_t>(t)] = te;
    for (auto [m, s] : taskSyms[static_cast<std::size_t>(t)])
      c.reach[static_cast<std::size_t>(m)] = pb.missions[static_cast<std::size_t>(m)].automaton->advance(c.reach[static_cast<std::size_t>(m)], s);
    c.order.push_back(t);
    evaluate(c);
    return c;
  }

  bool feasible(const Node& n) const {
    std::vector<Capacity> caps;
    for (const Team& k : n.teams) caps.push_back(k.cap);
    return n.teams.size() <= pb.robots.size() && capacity_feasible(caps, pb.robots);
  }

  bool terminal(const Node& n, bool& deadEnd) const {
    deadEnd = false;
    if (n.complete) return true;
    if (cfg.horizon && n.depth >= *cfg.horizon) return true;
    return false;
  }

  // Canonical team order: by last task appended.
  std::vector<std::size_t> team_order(const Node& n) const {
    std::vector<std::size_t> idx(n.teams.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return n.teams[a].seq.back() < n.teams[b].seq.back(); });
    return idx;
  }

  std::string signature(const Node& n) const {
    std::ostringstream os;
    os << n.teams.size() << '|';
    for (std::size_t t = 0; t < T; ++t) os << (assigned(n, t) ? '1' : '0');
    os << '|';
    for (const auto& r : n.reach) {
      for (auto q : r) os << q << ',';
      os << ';';
    }
    os << '|';
    for (std::size_t i : team_order(n)) {
      const Team& k = n.teams[i];
      os << k.seq.back() << ':';
      for (const auto& [a, b] : k.cap) os << a << '=' << b << ',';
      os << ';';
    }
    return os.str();
  }

  std::vector<double> extended_profile(const Node& n) const {
    std::vector<double> v;
    for (std::size_t i : team_order(n)) {
      v.push_back(n.teams[i].T);
      v.push_back(n.teams[i].C);
    }
    for (std::size_t t = 0; t < T; ++t)
      if (assigned(n, t)) v.push_back(n.te[t]);
    return v;
  }

  std::vector<double> profile(const Node& n) const {
    std::vector<double> v;
    for (const Team& k : n.teams) v.push_back(k.T);
    for (const Team& k : n.teams) v.push_back(k.C);
    for (std::size_t m = 0; m < M; ++m) v.push_back(std::max(0, pb.missions[m].automaton->distances().min_over(n.reach[m])));
    return v;
  }

  Node apply(const std::vector<std::pair<std::string, int>>& appends) const {
    Node n = root;
    for (const auto& [name, team] : appends) {
      auto cands = candidates(n);
      int t = -1;
      for (int c : cands)
        if (pb.tasks[static_cast<std::size_t>(c)].id == name) t = c;
      if (t < 0) throw InvalidCandidate(name + " is not a candidate");
      if (team >= static_cast<int>(n.teams.size())) throw InvalidCandidate("no team " + std::to_string(team));
      n = child(n, t, team);
    }
    return n;
  }

  AssignmentResult result_from(const Node& n) const {
    AssignmentResult r;
    r.found = true;
    r.complete = n.complete;
    r.value = n.chi;
    for (const Team& k : n.teams) {
      TeamPlan tp;
      for (int t : k.seq) {
        const auto& task = pb.tasks[static_cast<std::size_t>(t)];
        double end = n.te[static_cast<std::size_t>(t)];
        tp.tasks.push_back({task.id, end - task.execTime, end});
      }
      tp.capacity = k.cap;
      tp.endTime = k.T;
      tp.cost = k.C;
      r.predictedMakespan = std::max(r.predictedMakespan, k.T);
      r.plans.push_back(std::move(tp));
    }
    for (int t : n.order) r.order.push_back(pb.tasks[static_cast<std::size_t>(t)].id);
    return r;
  }

  AssignmentResult search() {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    long nextId = 1;
    long expanded = 0, generated = 0, pruned = 0;
    bool budgetHit = false;

    std::vector<std::unique_ptr<Node>> store;
    std::priority_queue<Key, std::vector<Key>, KeyGreater> open;
    struct Entry {
      long id;
      std::vector<double> prof;
      bool alive;
    };
    std::unordered_map<std::string, std::vector<Entry>> buckets;
    std::unordered_map<long, std::size_t> slot;  // id -> store index
    std::vector<char> dead;                      // by store index

    std::optional<Node> bestComplete, bestCut, deepest;
    auto consider = [&](std::optional<Node>& best, const Node& n) {
      if (!best || better(n, *best)) best = n;
    };
    auto bound = [&]() -> double {
      if (!cfg.boundPruning) return std::numeric_limits<double>::infinity();
      if (bestComplete) return bestComplete->lb;
      if (cfg.horizon && bestCut) return bestCut->chi;
      return std::numeric_limits<double>::infinity();
    };

    Node r0 = root;
    r0.id = 0;
    bool rootHadCandidates = !candidates(r0).empty();
    if (r0.complete || !rootHadCandidates) {
      AssignmentResult res = result_from(r0);
      res.found = r0.complete || T == 0;
      return res;
    }
    store.push_back(std::make_unique<Node>(std::move(r0)));
    dead.push_back(0);
    slot[0] = 0;
    open.push({store[0]->chi, 0, 0});

    while (!open.empty()) {
      if (expanded >= cfg.maxExpansions ||
          std::chrono::duration<double>(Clock::now() - t0).count() > cfg.wallBudgetSeconds) {
        budgetHit = true;
        break;
      }
      // selection
      std::vector<std::size_t> batch;
      while (!open.empty() && static_cast<int>(batch.size()) < cfg.batch) {
        Key k = open.top();
        open.pop();
        std::size_t s = slot.at(k.id);
        if (dead[s]) continue;
        if (store[s]->lb > bound() + kEps) {
          ++pruned;
          dead[s] = 1;
          store[s].reset();
          continue;
        }
        batch.push_back(s);
      }
      if (batch.empty()) break;

      // expansion: children are pure functions of their parent
      std::vector<std::vector<Node>> kids(batch.size());
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const Node& p = *store[batch[b]];
        for (int t : candidates(p)) {
          for (int k = 0; k < static_cast<int>(p.teams.size()); ++k) kids[b].push_back(child(p, t, k));
          kids[b].push_back(child(p, t, -1));
        }
        ++expanded;
      }

      // serialized merge
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::size_t ps = batch[b];
        for (Node& c : kids[b]) {
          c.id = nextId++;
          ++generated;
          if (!feasible(c)) {
            ++pruned;
            continue;
          }
          if (c.lb > bound() + kEps) {
            ++pruned;
            continue;
          }
          if (cfg.dominancePruning) {
            auto& bucket = buckets[signature(c)];
            auto prof = extended_profile(c);
            bool drop = false;
            for (const Entry& e : bucket)
              if (e.alive && (e.prof == prof || dominates(e.prof, prof))) {
                drop = true;
                break;
              }
            if (drop) {
              ++pruned;
              continue;
            }
            for (Entry& e : bucket)
              if (e.alive && dominates(prof, e.prof)) {
                e.alive = false;
                auto it = slot.find(e.id);
                if (it != slot.end() && !dead[it->second]) {
                  dead[it->second] = 1;
                  store[it->second].reset();
                  ++pruned;
                }
              }
            bucket.erase(std::remove_if(bucket.begin(), bucket.end(), [](const Entry& e) { return !e.alive; }),
                         bucket.end());
            bucket.push_back({c.id, std::move(prof), true});
            if (cfg.checkFrontier)
              for (const Entry& x : bucket)
                for (const Entry& y : bucket)
                  if (dominates(x.prof, y.prof)) throw PlanningFailed("frontier holds a dominated node");
          }
          if (!deepest || c.depth > deepest->depth || (c.depth == deepest->depth && better(c, *deepest))) deepest = c;
          bool dead_end = false;
          if (terminal(c, dead_end)) {
            if (c.complete) consider(bestComplete, c);
            else consider(bestCut, c);
            continue;
          }
          std::size_t s = store.size();
          slot[c.id] = s;
          dead.push_back(0);
          open.push({c.chi, c.depth, c.id});
          store.push_back(std::make_unique<Node>(std::move(c)));
        }
        // expanded parents are no longer needed
        dead[ps] = 1;
        store[ps].reset();
      }
    }

    AssignmentResult res;
    if (bestComplete) res = result_from(*bestComplete);
    else if (bestCut) res = result_from(*bestCut);
    else if (budgetHit && deepest) res = result_from(*deepest);
    else throw Infeasible("no capacity-feasible assignment completes the missions");
    res.expanded = expanded;
    res.generated = generated;
    res.pruned = pruned;
    res.budgetHit = budgetHit;
    return res;
  }
};

Planner::Planner(PlanningProblem problem, SearchConfig config)
    : impl_(std::make_unique<Impl>(std::move(problem), std::move(config))) {}
Planner::~Planner() = default;

AssignmentResult Planner::run() { return impl_->search(); }

std::vector<std::string> Planner::root_candidates() const { return candidates_after({}); }

double Planner::root_value() const { return impl_->root.chi; }

std::vector<double> Planner::profile_after(const std::vector<std::pair<std::string, int>>& appends) const {
  return impl_->profile(impl_->apply(appends));
}

double Planner::value_after(const std::vector<std::pair<std::string, int>>& appends) const {
  return impl_->apply(appends).chi;
}

std::vector<std::string> Planner::candidates_after(const std::vector<std::pair<std::string, int>>& appends) const {
  Node n = impl_->apply(appends);
  std::vector<std::string> out;
  for (int t : impl_->candidates(n)) out.push_back(impl_->pb.tasks[static_cast<std::size_t>(t)].id);
  return out;
}

bool Planner::feasible_after(const std::vector<std::pair<std::string, int>>& appends) const {
  return impl_->feasible(impl_->apply(appends));
}

AssignmentResult plan_horizon(const PlanningProblem& problem, const SearchConfig& config) {
  Planner p(problem, config);
  return p.run();
}

}  // namespace fleet::assign
