#include <gtest/gtest.h>

#include "../support/formation_gen.hpp"
#include "fleet/errors.hpp"
#include "fleet/formation/formation.hpp"

using namespace fleet;
using namespace fleet::formation;

namespace {

RobotSpec robot(const std::string& id, std::set<std::string> caps, Vec2 at, double speed = 1) {
  RobotSpec r;
  r.id = id;
  r.capabilities = std::move(caps);
  r.availablePos = at;
  r.speed = speed;
  return r;
}

TeamSpec team(Capacity cap, Vec2 site, double exec, std::vector<std::string> plan = {}) {
  TeamSpec t;
  t.capacity = std::move(cap);
  t.firstSite = site;
  t.execSum = exec;
  t.plan = std::move(plan);
  for (std::size_t i = 0; i < t.plan.size(); ++i) t.sites.push_back(site);
  return t;
}

void check_disjoint_and_bounds(const FormationProblem& p, const FormationResult& r) {
  ASSERT_EQ(r.teamOf.size(), p.robots.size());
  std::set<std::string> seen;
  for (const auto& m : r.members)
    for (const auto& id : m) EXPECT_TRUE(seen.insert(id).second) << id;
  EXPECT_TRUE(satisfies_bounds(p, r.teamOf));
}

}  // namespace

TEST(Formation, CrossAssignment) {
  FormationProblem p;
  p.robots = {robot("g0", {"grasping"}, {2, 0}), robot("g1", {"grasping"}, {8, 0})};
  p.teams = {team({{"grasping", 1}}, {0, 0}, 10), team({{"grasping", 1}}, {10, 0}, 10)};
  auto r = solve_formation(p);
  EXPECT_EQ(r.teamOf, (std::vector<int>{0, 1}));
  EXPECT_NEAR(r.objective, 2 + 10, 1e-12);
  EXPECT_EQ(r.status, Status::Optimal);
  auto e = enumerate_formation(p);
  EXPECT_NEAR(e.objective, r.objective, 1e-12);
  auto g = greedy_fallback(p);
  EXPECT_GE(g.objective + 1e-12, r.objective);
  EXPECT_EQ(g.status, Status::Fallback);
}

TEST(Formation, LockForcesAssignment) {
  FormationProblem p;
  p.robots = {robot("a", {"grasping"}, {0, 0})};
  p.teams = {team({{"grasping", 1}}, {3, 4}, 1)};
  p.locks = {{"a", 0}};
  auto r = solve_formation(p);
  EXPECT_EQ(r.teamOf, std::vector<int>{0});
  EXPECT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 6, 1e-12);
}

TEST(Formation, MarginBounds) {
  FormationProblem p;
  p.teams = {team({{"perception", 2}}, {0, 0}, 1)};
  for (int i = 0; i < 5; ++i) p.robots.push_back(robot("r" + std::to_string(i), {"perception"}, {double(i), 0}));
  p.alpha["perception"] = 1.5;
  EXPECT_EQ(p.upper(0, "perception"), 3);
  EXPECT_TRUE(satisfies_bounds(p, {0, 0, -1, -1, -1}));
  EXPECT_TRUE(satisfies_bounds(p, {0, 0, 0, -1, -1}));
  EXPECT_FALSE(satisfies_bounds(p, {0, 0, 0, 0, -1}));
  EXPECT_FALSE(satisfies_bounds(p, {0, -1, -1, -1, -1}));
  // idle robots stay idle
  auto r = solve_formation(p);
  EXPECT_EQ(r.members[0].size(), 2u);
}

TEST(Formation, GreedyEdgeCases) {
  FormationProblem empty;
  empty.robots = {robot("a", {"grasping"}, {0, 0})};
  auto r = greedy_fallback(empty);
  EXPECT_TRUE(r.members.empty());
  EXPECT_EQ(r.teamOf, std::vector<int>{-1});

  FormationProblem p;
  p.robots = {robot("a", {"grasping"}, {0, 0})};
  p.teams = {team({{"grasping", 1}}, {0, 0}, 1), team({{"grasping", 1}}, {1, 0}, 1)};
  EXPECT_THROW(greedy_fallback(p), Infeasible);
  EXPECT_THROW(solve_formation(p), Infeasible);
  EXPECT_THROW(enumerate_formation(p), Infeasible);
}

TEST(Formation, ConflictingLocks) {
  FormationProblem p;
  p.robots = {robot("a", {"grasping"}, {0, 0})};
  p.teams = {team({{"grasping", 1}}, {0, 0}, 1)};
  p.locks = {{"a", 0}};
  p.forbids = {{"a", 0}};
  EXPECT_THROW(solve_formation(p), Infeasible);
}

TEST(Formation, RobotPlans) {
  FormationProblem p;
  p.robots = {robot("a", {"grasping"}, {0, 0}), robot("b", {"grasping"}, {0, 0}), robot("c", {"delivery"}, {0, 0})};
  p.teams = {team({{"grasping", 2}}, {1, 1}, 4, {"w2", "w3"})};
  auto r = solve_formation(p);
  auto plans = robot_plans(p, r);
  ASSERT_EQ(plans.size(), 2u);
  ASSERT_EQ(plans["a"].size(), 2u);
  EXPECT_EQ(plans["a"][0].task, "w2");
  EXPECT_EQ(plans["b"][1].task, "w3");
  EXPECT_EQ(plans.count("c"), 0u);
}

TEST(Formation, FivePlusTeamRegression) {
  // ten robots; one team of five nearby members executes a four-task plan
  FormationProblem p;
  const std::set<std::string> pg{"perception", "grasping"}, dg{"delivery", "grasping"}, pd{"perception", "delivery"};
  const Vec2 west{0, 0}, east{30, 0};
  for (int i = 1; i <= 10; ++i) {
    bool nearWest = i == 2 || i == 4 || i == 6 || i == 7 || i == 9;
    Vec2 at = nearWest ? Vec2{1.0 * i, 1} : Vec2{30.0 - i, 1};
    const auto& caps = i % 3 == 0 ? pg : (i % 3 == 1 ? dg : pd);
    p.robots.push_back(robot(std::to_string(i), caps, at, 2));
  }
  p.alpha["grasping"] = 2.0;
  p.teams = {team({{"perception", 3}, {"delivery", 3}, {"grasping", 2}}, west, 60, {"w2", "w3", "w6", "w8"}),
             team({{"perception", 2}, {"delivery", 2}, {"grasping", 2}}, east, 50, {"w1", "w4", "w5", "w7"})};
  auto e = enumerate_formation(p);
  auto r = solve_formation(p);
  EXPECT_EQ(r.teamOf, e.teamOf);
  std::vector<std::string> expect{"2", "4", "6", "7", "9"};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(r.members[0], expect);
  auto plans = robot_plans(p, r);
  ASSERT_EQ(plans["6"].size(), 4u);
  EXPECT_EQ(plans["6"][2].task, "w6");
}

TEST(Formation, OracleMatchesEnumeration) {
  int feasible = 0;
  for (std::uint64_t seed = 1; seed <= 400 && feasible < 220; ++seed) {
    auto p = gen::random_formation(seed);
    FormationResult e;
    try {
      e = enumerate_formation(p);
    } catch (const Infeasible&) {
      EXPECT_THROW(solve_formation(p), Infeasible) << seed;
      continue;
    }
    ++feasible;
    auto r = solve_formation(p);
    EXPECT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, e.objective, 1e-9) << seed;
    EXPECT_EQ(r.teamOf, e.teamOf) << seed;
    check_disjoint_and_bounds(p, r);
    try {
      auto g = greedy_fallback(p);
      check_disjoint_and_bounds(p, g);
      EXPECT_GE(g.objective + 1e-9, r.objective);
    } catch (const Infeasible&) {
    }
  }
  EXPECT_GE(feasible, 200);
}

TEST(Formation, ForbidNeverHelps) {
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    auto p = gen::random_formation(seed, 6, 2);
    FormationResult base;
    try {
      base = solve_formation(p);
    } catch (const Infeasible&) {
      continue;
    }
    for (std::size_t i = 0; i < p.robots.size(); ++i) {
      if (base.teamOf[i] < 0) continue;
      auto q = p;
      q.forbids.emplace_back(p.robots[i].id, base.teamOf[i]);
      try {
        EXPECT_GE(solve_formation(q).objective + 1e-9, base.objective) << seed;
      } catch (const Infeasible&) {
      }
    }
  }
}

TEST(Formation, NodeLimitReturnsIncumbent) {
  FormationProblem p;
  for (int i = 0; i < 16; ++i)
    p.robots.push_back(robot(std::string("r") + (i < 10 ? "0" : "") + std::to_string(i), {"grasping", "delivery"},
                             {double(i % 5), double(i / 5)}));
  p.teams = {team({{"grasping", 3}}, {0, 0}, 5), team({{"delivery", 3}}, {5, 5}, 5), team({{"grasping", 2}}, {9, 0}, 5)};
  auto r = solve_formation(p, 50);
  EXPECT_EQ(r.status, Status::Incumbent);
  check_disjoint_and_bounds(p, r);
  auto full = solve_formation(p);
  EXPECT_LE(full.objective, r.objective + 1e-12);
}
