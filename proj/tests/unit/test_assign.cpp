#include <gtest/gtest.h>

#include <map>

#include "../support/assign_gen.hpp"
#include "fleet/assign/planner.hpp"
#include "fleet/errors.hpp"
#include "fleet/logic/parser.hpp"

using namespace fleet;
using namespace fleet::assign;

namespace {

struct Fixture {
  std::deque<logic::TaskAutomaton> automata;
  PlanningProblem pb;

  void mission(const std::string& id, const std::string& formula, double weight = 1) {
    automata.push_back(logic::build_automaton(logic::parse_formula(formula)));
    MissionInput m;
    m.id = id;
    m.automaton = &automata.back();
    m.reach = automata.back().initial();
    m.weight = weight;
    pb.missions.push_back(m);
  }
  void task(const std::string& id, Vec2 site, Capacity need, double exec) { pb.tasks.push_back({id, site, need, exec}); }
  void robot(const std::string& id, std::vector<std::string> caps, double speed, Vec2 at) {
    RobotInput r;
    r.id = id;
    r.capabilities = std::move(caps);
    r.speed = speed;
    r.availablePos = at;
    pb.robots.push_back(r);
  }
};

SearchConfig full_horizon() {
  SearchConfig c;
  c.horizon = std::nullopt;
  c.maxExpansions = 1000000;
  c.wallBudgetSeconds = 600;
  return c;
}

// team index at each append, -1 when the task opens its team
std::vector<std::pair<std::string, int>> appends_of(const AssignmentResult& r) {
  std::map<std::string, std::pair<int, bool>> where;
  for (std::size_t k = 0; k < r.plans.size(); ++k)
    for (std::size_t i = 0; i < r.plans[k].tasks.size(); ++i) where[r.plans[k].tasks[i].task] = {static_cast<int>(k), i == 0};
  std::vector<std::pair<std::string, int>> out;
  for (const auto& t : r.order) out.emplace_back(t, where[t].second ? -1 : where[t].first);
  return out;
}

void expect_accepted(const gen::AssignInstance& inst, const AssignmentResult& r) {
  for (std::size_t m = 0; m < inst.problem.missions.size(); ++m) {
    const auto& A = inst.automata[m];
    std::vector<std::string> word;
    for (const auto& t : r.order)
      if (A.symbol_index(t)) word.push_back(t);
    EXPECT_TRUE(A.accepts(word));
    EXPECT_TRUE(logic::semantic_eval(inst.formulas[m], word)) << inst.formulas[m].to_string();
  }
}

}  // namespace

TEST(NodeValue, Examples) {
  EXPECT_NEAR(node_value({10, 8}, {5, 3}, {2}, {1}, 0.1, 0.5), 11.8, 1e-12);
  EXPECT_NEAR(node_value({}, {}, {3, 2}, {1, 2}, 0.1, 0.5), 0.5 * 7, 1e-12);
  EXPECT_GT(node_value({11, 8}, {5, 3}, {2}, {1}, 0.1, 0.5), 11.8);
}

TEST(NodeValue, RootValueIsWeightedDistance) {
  Fixture f;
  f.mission("m", "F(w1 & F w2)", 2);
  f.task("w1", {0, 0}, {{"grasp", 1}}, 1);
  f.task("w2", {0, 0}, {{"grasp", 1}}, 1);
  f.robot("r", {"grasp"}, 1, {0, 0});
  Planner p(f.pb, SearchConfig{});
  EXPECT_DOUBLE_EQ(p.root_value(), 1.0 * 2 * 2);
}

TEST(Candidates, FollowTheAutomaton) {
  Fixture f;
  f.mission("m", "F(w1 & F w2)");
  f.task("w1", {0, 0}, {{"grasp", 1}}, 4);
  f.task("w2", {1, 0}, {{"grasp", 1}}, 4);
  f.robot("r", {"grasp"}, 1, {0, 0});
  Planner p(f.pb, SearchConfig{});
  EXPECT_EQ(p.root_candidates(), std::vector<std::string>{"w1"});
  EXPECT_EQ(p.candidates_after({{"w1", -1}}), std::vector<std::string>{"w2"});
  EXPECT_TRUE(p.candidates_after({{"w1", -1}, {"w2", 0}}).empty());
  EXPECT_THROW(p.candidates_after({{"w2", -1}}), InvalidCandidate);
}

TEST(Expand, NewTeamEndTime) {
  Fixture f;
  f.mission("m", "F(w1 & F w2)");
  f.task("w1", {5, 0}, {{"grasp", 1}}, 10);
  f.task("w2", {5, 0}, {{"grasp", 1}}, 7);
  f.robot("r", {"grasp"}, 2.5, {0, 0});
  Planner p(f.pb, SearchConfig{});
  auto z = p.profile_after({{"w1", -1}});
  ASSERT_EQ(z.size(), 3u);  // 2K + M
  EXPECT_DOUBLE_EQ(z[0], 12);
  z = p.profile_after({{"w1", -1}, {"w2", 0}});
  EXPECT_DOUBLE_EQ(z[0], 12 + 0 + 7);
  EXPECT_DOUBLE_EQ(z[2], 0);
}

TEST(Expand, CapacityViolationMarksInfeasible) {
  Fixture f;
  f.mission("m", "F w1");
  f.task("w1", {0, 0}, {{"grasp", 6}}, 1);
  for (int i = 0; i < 4; ++i) f.robot("r" + std::to_string(i), {"grasp"}, 1, {0, 0});
  Planner p(f.pb, SearchConfig{});
  EXPECT_FALSE(p.feasible_after({{"w1", -1}}));
  EXPECT_THROW(plan_horizon(f.pb, full_horizon()), Infeasible);
  EXPECT_THROW(brute_force_assign(f.pb, full_horizon()), Infeasible);
}

TEST(Capacity, Examples) {
  std::vector<RobotInput> fleet(5);
  for (auto& r : fleet) r.capabilities = {"grasp"};
  EXPECT_TRUE(capacity_feasible({{{"grasp", 3}}, {{"grasp", 2}}}, fleet));
  EXPECT_FALSE(capacity_feasible({{{"grasp", 6}}}, fleet));
  EXPECT_TRUE(capacity_feasible({}, fleet));
  EXPECT_FALSE(capacity_feasible({{{"weld", 1}}}, fleet));
}

TEST(Dominance, Examples) {
  EXPECT_TRUE(dominates({3, 2, 1}, {4, 2, 1}));
  EXPECT_FALSE(dominates({3, 2, 1}, {3, 2, 1}));
  EXPECT_FALSE(dominates({3, 5}, {4, 2}));
  EXPECT_THROW(dominates({1, 2}, {1, 2, 3}), DimensionMismatch);
}

TEST(PlanHorizon, TwoTaskChainUsesOneTeam) {
  Fixture f;
  f.mission("m", "F(w1 & F w2)");
  f.task("w1", {0, 0}, {{"grasp", 1}}, 4);
  f.task("w2", {3, 4}, {{"grasp", 1}}, 6);
  f.robot("r0", {"grasp"}, 1, {0, 0});
  f.robot("r1", {"grasp"}, 1, {0, 0});
  auto r = plan_horizon(f.pb, full_horizon());
  ASSERT_TRUE(r.complete);
  ASSERT_EQ(r.team_count(), 1u);
  EXPECT_EQ(r.order, (std::vector<std::string>{"w1", "w2"}));
  EXPECT_NEAR(r.predictedMakespan, 4 + 5 + 6, 1e-9);
  auto b = brute_force_assign(f.pb, full_horizon());
  EXPECT_NEAR(b.predictedMakespan, r.predictedMakespan, 1e-9);
}

TEST(PlanHorizon, SingleTask) {
  Fixture f;
  f.mission("m", "F w1");
  f.task("w1", {2, 0}, {{"grasp", 1}}, 3);
  f.robot("r0", {"grasp"}, 1, {0, 0});
  auto b = brute_force_assign(f.pb, full_horizon());
  ASSERT_EQ(b.team_count(), 1u);
  EXPECT_EQ(b.plans[0].tasks.size(), 1u);
  EXPECT_NEAR(b.predictedMakespan, 5, 1e-12);
}

TEST(PlanHorizon, ThreeTeamRegression) {
  // two ordered pairs in separate corners and a lone task far away
  Fixture f;
  f.mission("m", "F(w1 & F w3) & F(w2 & F w4) & F w5");
  f.task("w1", {0, 0}, {{"grasp", 1}}, 10);
  f.task("w3", {1, 0}, {{"grasp", 1}}, 10);
  f.task("w2", {20, 0}, {{"grasp", 1}}, 10);
  f.task("w4", {21, 0}, {{"grasp", 1}}, 10);
  f.task("w5", {10, 20}, {{"grasp", 1}}, 10);
  f.robot("r0", {"grasp"}, 2, {0, 0});
  f.robot("r1", {"grasp"}, 2, {20, 0});
  f.robot("r2", {"grasp"}, 2, {10, 20});
  f.robot("r3", {"grasp"}, 2, {10, 10});
  auto cfg = full_horizon();
  auto r = plan_horizon(f.pb, cfg);
  auto b = brute_force_assign(f.pb, cfg);
  ASSERT_EQ(b.team_count(), 3u);
  ASSERT_EQ(r.team_count(), 3u);
  EXPECT_NEAR(r.value, b.value, 1e-9);
  std::set<std::vector<std::string>> teams;
  for (const auto& p : r.plans) {
    std::vector<std::string> seq;
    for (const auto& t : p.tasks) seq.push_back(t.task);
    teams.insert(seq);
  }
  EXPECT_EQ(teams, (std::set<std::vector<std::string>>{{"w1", "w3"}, {"w2", "w4"}, {"w5"}}));
}

TEST(PlanHorizon, HorizonOneIsGreedy) {
  Fixture f;
  f.mission("m", "F w1 & F w2 & F w3");
  f.task("w1", {0, 0}, {{"grasp", 1}}, 4);
  f.task("w2", {5, 0}, {{"grasp", 1}}, 2);
  f.task("w3", {9, 0}, {{"grasp", 1}}, 3);
  f.robot("r0", {"grasp"}, 1, {0, 0});
  SearchConfig c;
  c.horizon = 1;
  auto r = plan_horizon(f.pb, c);
  ASSERT_EQ(r.order.size(), 1u);
  // the best single append by chi among all root children
  Planner p(f.pb, c);
  double best = 1e300;
  std::string arg;
  for (const auto& w : p.root_candidates()) {
    double v = p.value_after({{w, -1}});
    if (v < best) best = v, arg = w;
  }
  EXPECT_EQ(r.order[0], arg);
  EXPECT_NEAR(r.value, best, 1e-12);
}

TEST(PlanHorizon, Deterministic) {
  std::uint64_t seed = 77;
  while (true) {
    try {
      brute_force_assign(gen::random_instance(seed, 5, 4, 2).problem, full_horizon());
      break;
    } catch (const Infeasible&) {
      ++seed;
    }
  }
  auto inst = gen::random_instance(seed, 5, 4, 2);
  auto a = plan_horizon(inst.problem, full_horizon());
  auto b = plan_horizon(inst.problem, full_horizon());
  EXPECT_EQ(a.order, b.order);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.expanded, b.expanded);
}

TEST(PlanHorizon, BatchSizeDoesNotChangeOptimum) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = gen::random_instance(seed, 5, 4, 2);
    auto c1 = full_horizon(), c4 = full_horizon();
    c4.batch = 4;
    try {
      auto a = plan_horizon(inst.problem, c1);
      auto b = plan_horizon(inst.problem, c4);
      EXPECT_NEAR(a.value, b.value, 1e-9) << seed;
    } catch (const Infeasible&) {
    }
  }
}

TEST(Oracle, MatchesBruteForce) {
  int feasible = 0;
  for (std::uint64_t seed = 1; feasible < 200 && seed < 2000; ++seed) {
    auto inst = gen::random_instance(seed, 5, 4, 2);
    AssignmentResult b;
    try {
      b = brute_force_assign(inst.problem, full_horizon());
    } catch (const Infeasible&) {
      EXPECT_THROW(plan_horizon(inst.problem, full_horizon()), Infeasible) << seed;
      continue;
    }
    ++feasible;
    auto cfg = full_horizon();
    cfg.checkFrontier = true;
    auto r = plan_horizon(inst.problem, cfg);
    ASSERT_TRUE(r.complete) << seed;
    EXPECT_FALSE(r.budgetHit);
    EXPECT_NEAR(r.value, b.value, 1e-9) << seed;
    EXPECT_NEAR(r.predictedMakespan, b.predictedMakespan, 1e-9) << seed;
    expect_accepted(inst, r);
    expect_accepted(inst, b);
  }
  EXPECT_GE(feasible, 200);
}

TEST(Oracle, PruningIsSafe) {
  for (std::uint64_t seed = 500; seed < 560; ++seed) {
    auto inst = gen::random_instance(seed, 5, 3, 2);
    auto on = full_horizon(), off = full_horizon();
    off.dominancePruning = false;
    off.boundPruning = false;
    try {
      auto a = plan_horizon(inst.problem, on);
      auto b = plan_horizon(inst.problem, off);
      EXPECT_NEAR(a.value, b.value, 1e-9) << seed;
      EXPECT_LE(a.generated, b.generated);
    } catch (const Infeasible&) {
    }
  }
}

TEST(Oracle, ProgressIsMonotoneAlongPaths) {
  for (std::uint64_t seed = 900; seed < 960; ++seed) {
    auto inst = gen::random_instance(seed, 5, 4, 2);
    Planner p(inst.problem, full_horizon());
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, int>> path;
    const std::size_t M = inst.problem.missions.size();
    auto psi_sum = [&](const std::vector<double>& z) {
      double s = 0;
      for (std::size_t i = z.size() - M; i < z.size(); ++i) s += z[i];
      return s;
    };
    double prev = psi_sum(p.profile_after(path));
    int teams = 0;
    for (;;) {
      auto cands = p.candidates_after(path);
      if (cands.empty()) break;
      std::string w = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
      int k = std::uniform_int_distribution<int>(-1, teams - 1)(rng);
      if (k < 0) ++teams;
      path.emplace_back(w, k);
      double now = psi_sum(p.profile_after(path));
      EXPECT_LE(now, prev) << seed;
      prev = now;
    }
  }
}

TEST(Oracle, HorizonMidPathValueReconstructs) {
  auto inst = gen::random_instance(31, 5, 4, 2);
  try {
    auto r = plan_horizon(inst.problem, full_horizon());
    Planner p(inst.problem, full_horizon());
    EXPECT_NEAR(p.value_after(appends_of(r)), r.value, 1e-9);
  } catch (const Infeasible&) {
  }
}

TEST(BruteForce, TooLarge) {
  Fixture f;
  f.mission("m", "F w1 & F w2 & F w3 & F w4 & F w5 & F w6 & F w7");
  for (int i = 1; i <= 7; ++i) f.task("w" + std::to_string(i), {0, 0}, {{"grasp", 1}}, 1);
  f.robot("r", {"grasp"}, 1, {0, 0});
  EXPECT_THROW(brute_force_assign(f.pb, full_horizon()), TooLarge);
}
