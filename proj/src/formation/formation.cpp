#include "fleet/formation/formation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fleet/errors.hpp"

namespace fleet::formation {

namespace {

constexpr double kTol = 1e-9;

struct Key {
  double maxJ = 0;
  double sumJ = 0;
  int count = 0;
  std::vector<int> rows;  // per robot in id order: 0 unassigned, else K - team
};

bool less(const Key& a, const Key& b) {
  if (std::abs(a.maxJ - b.maxJ) > kTol) return a.maxJ < b.maxJ;
  if (std::abs(a.sumJ - b.sumJ) > kTol) return a.sumJ < b.sumJ;
  if (a.count != b.count) return a.count < b.count;
  return a.rows < b.rows;
}

std::vector<std::size_t> id_order(const FormationProblem& p) {
  std::vector<std::size_t> idx(p.robots.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p.robots[a].id < p.robots[b].id; });
  return idx;
}

Key key_of(const FormationProblem& p, const std::vector<int>& teamOf, const std::vector<std::size_t>& order) {
  Key k;
  const std::size_t K = p.teams.size();
  std::vector<double> J(K, 0);
  for (std::size_t t = 0; t < K; ++t) J[t] = p.teams[t].execSum;
  std::vector<double> late(K, 0);
  for (std::size_t i = 0; i < teamOf.size(); ++i)
    if (teamOf[i] >= 0) {
      auto t = static_cast<std::size_t>(teamOf[i]);
      late[t] = std::max(late[t], p.arrival(i, t));
      ++k.count;
    }
  for (std::size_t t = 0; t < K; ++t) {
    J[t] += late[t];
    k.maxJ = std::max(k.maxJ, J[t]);
    k.sumJ += J[t];
  }
  for (std::size_t i : order) k.rows.push_back(teamOf[i] < 0 ? 0 : static_cast<int>(K) - teamOf[i]);
  return k;
}

FormationResult make_result(const FormationProblem& p, const std::vector<int>& teamOf, Status s) {
  FormationResult r;
  r.teamOf = teamOf;
  r.members.assign(p.teams.size(), {});
  for (std::size_t i = 0; i < teamOf.size(); ++i)
    if (teamOf[i] >= 0) r.members[static_cast<std::size_t>(teamOf[i])].push_back(p.robots[i].id);
  for (auto& m : r.members) std::sort(m.begin(), m.end());
  evaluate(p, teamOf, r.objective);
  r.status = s;
  return r;
}

// locks as a per-robot forced team, forbids as a robot x team mask
void constraints(const FormationProblem& p, std::vector<int>& forced, std::vector<std::vector<char>>& banned) {
  const std::size_t N = p.robots.size(), K = p.teams.size();
  forced.assign(N, -1);
  banned.assign(N, std::vector<char>(K, 0));
  auto find = [&](const std::string& id) {
    for (std::size_t i = 0; i < N; ++i)
      if (p.robots[i].id == id) return i;
    throw UnknownEntity("robot " + id);
  };
  for (const auto& [rid, t] : p.forbids) {
    if (t < 0 || static_cast<std::size_t>(t) >= K) throw UnknownEntity("team " + std::to_string(t));
    banned[find(rid)][static_cast<std::size_t>(t)] = 1;
  }
  for (const auto& [rid, t] : p.locks) {
    if (t < 0 || static_cast<std::size_t>(t) >= K) throw UnknownEntity("team " + std::to_string(t));
    std::size_t i = find(rid);
    if ((forced[i] >= 0 && forced[i] != t) || banned[i][static_cast<std::size_t>(t)])
      throw Infeasible("conflicting locks for robot " + rid);
    forced[i] = t;
  }
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Incumbent: return "incumbent";
    case Status::Fallback: return "fallback";
  }
  return "?";
}

double FormationProblem::margin(const std::string& action) const {
  auto it = alpha.find(action);
  return it == alpha.end() ? 1.0 : std::max(1.0, it->second);
}

int FormationProblem::upper(int team, const std::string& action) const {
  int beta = teams[static_cast<std::size_t>(team)].capacity.at(action);
  return static_cast<int>(std::floor(beta * margin(action) + 1e-9));
}

double FormationProblem::arrival(std::size_t robot, std::size_t team) const {
  const RobotSpec& r = robots[robot];
  return r.availableAt + distance(r.availablePos, teams[team].firstSite) / r.speed;
}

bool satisfies_bounds(const FormationProblem& p, const std::vector<int>& teamOf) {
  if (teamOf.size() != p.robots.size()) return false;
  for (std::size_t t = 0; t < p.teams.size(); ++t)
    for (const auto& [a, beta] : p.teams[t].capacity) {
      int n = 0;
      for (std::size_t i = 0; i < teamOf.size(); ++i)
        if (teamOf[i] == static_cast<int>(t) && p.robots[i].capabilities.count(a)) ++n;
      if (n < beta || n > p.upper(static_cast<int>(t), a)) return false;
    }
  return true;
}

bool evaluate(const FormationProblem& p, const std::vector<int>& teamOf, double& objective) {
  objective = key_of(p, teamOf, id_order(p)).maxJ;
  return satisfies_bounds(p, teamOf);
}

FormationResult greedy_fallback(const FormationProblem& p) {
  const std::size_t N = p.robots.size(), K = p.teams.size();
  std::vector<int> forced;
  std::vector<std::vector<char>> banned;
  constraints(p, forced, banned);
  std::vector<int> teamOf = forced;

  std::vector<std::size_t> teams(K);
  std::iota(teams.begin(), teams.end(), 0);
  auto demand = [&](std::size_t t) {
    int s = 0;
    for (const auto& [a, b] : p.teams[t].capacity) s += b;
    return s;
  };
  std::stable_sort(teams.begin(), teams.end(), [&](std::size_t a, std::size_t b) { return demand(a) > demand(b); });

  for (std::size_t t : teams) {
    const int ti = static_cast<int>(t);
    auto count = [&](const std::string& a) {
      int n = 0;
      for (std::size_t i = 0; i < N; ++i)
        if (teamOf[i] == ti && p.robots[i].capabilities.count(a)) ++n;
      return n;
    };
    for (const auto& [a, beta] : p.teams[t].capacity) {
      std::vector<std::size_t> cand;
      for (std::size_t i = 0; i < N; ++i)
        if (teamOf[i] < 0 && !banned[i][t] && p.robots[i].capabilities.count(a)) cand.push_back(i);
      std::stable_sort(cand.begin(), cand.end(), [&](std::size_t x, std::size_t y) { return p.arrival(x, t) < p.arrival(y, t); });
      for (std::size_t i : cand) {
        if (count(a) >= beta) break;
        bool fits = true;
        for (const auto& [b, bb] : p.teams[t].capacity)
          if (p.robots[i].capabilities.count(b) && count(b) + 1 > p.upper(ti, b)) fits = false;
        if (fits) teamOf[i] = ti;
      }
      if (count(a) < beta) throw Infeasible("greedy formation cannot staff team " + std::to_string(t));
    }
  }
  if (!satisfies_bounds(p, teamOf)) throw Infeasible("greedy formation violates margins");
  return make_result(p, teamOf, Status::Fallback);
}

FormationResult solve_formation(const FormationProblem& p, long nodeLimit) {
  const std::size_t N = p.robots.size(), K = p.teams.size();
  if (K == 0) return make_result(p, std::vector<int>(N, -1), Status::Optimal);
  std::vector<int> forced;
  std::vector<std::vector<char>> banned;
  constraints(p, forced, banned);
  const auto order = id_order(p);

  // actions per team and robot capability bits against them
  std::vector<std::vector<std::string>> acts(K);
  std::vector<std::vector<int>> beta(K), ub(K);
  for (std::size_t t = 0; t < K; ++t)
    for (const auto& [a, b] : p.teams[t].capacity) {
      acts[t].push_back(a);
      beta[t].push_back(b);
      ub[t].push_back(p.upper(static_cast<int>(t), a));
    }
  std::vector<std::vector<std::vector<char>>> can(N, std::vector<std::vector<char>>(K));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t t = 0; t < K; ++t)
      for (const auto& a : acts[t]) can[i][t].push_back(p.robots[i].capabilities.count(a) ? 1 : 0);
  std::vector<std::vector<double>> arr(N, std::vector<double>(K));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t t = 0; t < K; ++t) arr[i][t] = p.arrival(i, t);

  // position of each robot in the branching order
  std::vector<std::size_t> pos(N);
  for (std::size_t d = 0; d < N; ++d) pos[order[d]] = d;
  // per (team, action): robots capable and allowed, by arrival
  std::vector<std::vector<std::vector<std::size_t>>> sorted(K);
  for (std::size_t t = 0; t < K; ++t) {
    sorted[t].resize(acts[t].size());
    for (std::size_t j = 0; j < acts[t].size(); ++j) {
      for (std::size_t i = 0; i < N; ++i)
        if (can[i][t][j] && !banned[i][t] && (forced[i] < 0 || forced[i] == static_cast<int>(t))) sorted[t][j].push_back(i);
      std::stable_sort(sorted[t][j].begin(), sorted[t][j].end(),
                       [&](std::size_t x, std::size_t y) { return arr[x][t] < arr[y][t]; });
    }
  }

  std::vector<int> teamOf(N, -1);
  std::vector<std::vector<int>> cnt(K);
  for (std::size_t t = 0; t < K; ++t) cnt[t].assign(acts[t].size(), 0);
  std::vector<double> late(K, 0);

  bool have = false;
  Key best;
  std::vector<int> bestAssign;
  try {
    FormationResult g = greedy_fallback(p);
    best = key_of(p, g.teamOf, order);
    bestAssign = g.teamOf;
    have = true;
  } catch (const Infeasible&) {
  }

  long nodes = 0;
  bool cut = false;

  auto bound_ok = [&](std::size_t depth) {
    double lb = 0;
    for (std::size_t t = 0; t < K; ++t) {
      double lt = late[t];
      for (std::size_t j = 0; j < acts[t].size(); ++j) {
        int deficit = beta[t][j] - cnt[t][j];
        if (deficit <= 0) continue;
        int seen = 0;
        double kth = -1;
        for (std::size_t i : sorted[t][j]) {
          if (pos[i] < depth) continue;
          if (++seen == deficit) {
            kth = arr[i][t];
            break;
          }
        }
        if (kth < 0) return false;  // cannot be staffed any more
        lt = std::max(lt, kth);
      }
      lb = std::max(lb, lt + p.teams[t].execSum);
    }
    return !have || lb <= best.maxJ + kTol;
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
    if (cut) return;
    if (++nodes > nodeLimit) {
      cut = true;
      return;
    }
    if (!bound_ok(depth)) return;
    if (depth == N) {
      Key k = key_of(p, teamOf, order);
      if (!have || less(k, best)) {
        best = std::move(k);
        bestAssign = teamOf;
        have = true;
      }
      return;
    }
    const std::size_t i = order[depth];
    std::vector<int> options;
    if (forced[i] >= 0) {
      options.push_back(forced[i]);
    } else {
      std::vector<std::size_t> ts;
      for (std::size_t t = 0; t < K; ++t) {
        if (banned[i][t]) continue;
        bool useful = false, fits = true;
        for (std::size_t j = 0; j < acts[t].size(); ++j)
          if (can[i][t][j]) {
            if (cnt[t][j] < beta[t][j]) useful = true;
            if (cnt[t][j] + 1 > ub[t][j]) fits = false;
          }
        // a member that fills no open requirement can only raise the key
        if (useful && fits) ts.push_back(t);
      }
      std::stable_sort(ts.begin(), ts.end(), [&](std::size_t a, std::size_t b) { return arr[i][a] < arr[i][b]; });
      for (std::size_t t : ts) options.push_back(static_cast<int>(t));
      options.push_back(-1);
    }
    for (int t : options) {
      if (t >= 0) {
        const auto tu = static_cast<std::size_t>(t);
        double prevLate = late[tu];
        teamOf[i] = t;
        for (std::size_t j = 0; j < acts[tu].size(); ++j) cnt[tu][j] += can[i][tu][j];
        late[tu] = std::max(late[tu], arr[i][tu]);
        dfs(depth + 1);
        late[tu] = prevLate;
        for (std::size_t j = 0; j < acts[tu].size(); ++j) cnt[tu][j] -= can[i][tu][j];
        teamOf[i] = -1;
      } else {
        dfs(depth + 1);
      }
      if (cut) return;
    }
  };
  dfs(0);

  if (!have) {
    if (cut) throw Infeasible("formation search hit its node limit without a feasible team");
    throw Infeasible("capacity bounds cannot be met under the given locks and forbids");
  }
  FormationResult r = make_result(p, bestAssign, cut ? Status::Incumbent : Status::Optimal);
  r.nodes = nodes;
  return r;
}

FormationResult enumerate_formation(const FormationProblem& p) {
  const std::size_t N = p.robots.size(), K = p.teams.size();
  std::vector<int> forced;
  std::vector<std::vector<char>> banned;
  constraints(p, forced, banned);
  const auto order = id_order(p);
  std::vector<int> label(N, -1);
  bool have = false;
  Key best;
  std::vector<int> bestAssign;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == N) {
      for (std::size_t r = 0; r < N; ++r) {
        if (forced[r] >= 0 && label[r] != forced[r]) return;
        if (label[r] >= 0 && banned[r][static_cast<std::size_t>(label[r])]) return;
      }
      for (std::size_t t = 0; t < K; ++t)
        for (const auto& [a, b] : p.teams[t].capacity) {
          int n = 0;
          for (std::size_t r = 0; r < N; ++r)
            if (label[r] == static_cast<int>(t) && p.robots[r].capabilities.count(a)) ++n;
          if (n < b || n > static_cast<int>(std::floor(b * p.margin(a) + 1e-9))) return;
        }
      Key k;
      for (std::size_t t = 0; t < K; ++t) {
        double worst = 0;
        for (std::size_t r = 0; r < N; ++r)
          if (label[r] == static_cast<int>(t)) {
            const auto& rb = p.robots[r];
            worst = std::max(worst, rb.availableAt + std::hypot(rb.availablePos.x - p.teams[t].firstSite.x,
                                                                rb.availablePos.y - p.teams[t].firstSite.y) /
                                                         rb.speed);
          }
        double J = worst + p.teams[t].execSum;
        k.maxJ = std::max(k.maxJ, J);
        k.sumJ += J;
      }
      for (std::size_t r = 0; r < N; ++r) k.count += label[r] >= 0;
      for (std::size_t r : order) k.rows.push_back(label[r] < 0 ? 0 : static_cast<int>(K) - label[r]);
      if (!have || less(k, best)) {
        best = k;
        bestAssign = label;
        have = true;
      }
      return;
    }
    for (int t = -1; t < static_cast<int>(K); ++t) {
      label[i] = t;
      rec(i + 1);
    }
    label[i] = -1;
  };
  rec(0);
  if (!have) throw Infeasible("no labeling satisfies the capacity bounds");
  return make_result(p, bestAssign, Status::Optimal);
}

std::map<std::string, std::vector<Visit>> robot_plans(const FormationProblem& p, const FormationResult& r) {
  std::map<std::string, std::vector<Visit>> out;
  for (std::size_t i = 0; i < r.teamOf.size(); ++i) {
    if (r.teamOf[i] < 0) continue;
    const TeamSpec& t = p.teams[static_cast<std::size_t>(r.teamOf[i])];
    auto& v = out[p.robots[i].id];
    for (std::size_t k = 0; k < t.plan.size(); ++k) v.push_back({t.plan[k], k < t.sites.size() ? t.sites[k] : t.firstSite});
  }
  return out;
}

}  // namespace fleet::formation
