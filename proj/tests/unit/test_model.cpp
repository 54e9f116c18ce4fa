#include <gtest/gtest.h>

#include "fleet/errors.hpp"
#include "fleet/model/estimators.hpp"
#include "fleet/model/scenario.hpp"

using namespace fleet;
using namespace fleet::model;
using nlohmann::json;

namespace {

Task grasp_task(double base, double satCap) {
  Task t;
  t.id = "w";
  t.region = Polygon({{0, 0}, {4, 0}, {4, 4}, {0, 4}});
  t.eta["grasp"] = base;
  t.satCap = satCap;
  t.subtasks.push_back({"w.s0", 2, "grasp", {1, 1}, {}, false, SubtaskState::Open});
  return t;
}

std::vector<Robot> graspers(int n) {
  std::vector<Robot> out;
  for (int i = 0; i < n; ++i) {
    Robot r;
    r.id = "r" + std::to_string(i);
    r.capabilities = {"grasp"};
    out.push_back(r);
  }
  return out;
}

std::vector<const Robot*> ptrs(const std::vector<Robot>& v) {
  std::vector<const Robot*> p;
  for (const auto& r : v) p.push_back(&r);
  return p;
}

json small_scenario() {
  return json::parse(R"J({
    "robots": [
      {"id": "a0", "type": "A", "capabilities": ["perception", "delivery"], "maxSpeed": 2.5, "start": [0, 0]},
      {"id": "b0", "type": "B", "capabilities": ["perception", "grasping"], "maxSpeed": 2.5, "curvature": 3, "start": [1, 0]}
    ],
    "tasks": [
      {"id": "t1", "class": "staticKnown", "region": [[0,0],[4,0],[4,4],[0,4]],
       "subtasks": [{"n": 1, "action": "delivery", "loc": [1, 1]}], "eta": {"delivery": 5}, "satCap": 1},
      {"id": "t2", "class": "staticUnknown", "region": [[5,0],[9,0],[9,4],[5,4]],
       "subtasks": [{"n": 1, "action": "perception", "loc": [6, 1], "hidden": true}], "eta": {"perception": 3}}
    ],
    "missions": [{"id": "m1", "formula": "F(t1 & F t2)", "release": 0, "weight": 2}],
    "params": {"H": 6, "alpha": {"perception": 1.5}, "eta1": 0.1, "eta2": 0.5, "P": 2, "seed": 3, "dt": 0.1}
  })J");
}

}  // namespace

TEST(Duration, ExactStaffing) {
  auto team = graspers(2);
  EXPECT_DOUBLE_EQ(duration_estimate(grasp_task(10, 2), 2, "grasp", ptrs(team)), 10);
}

TEST(Duration, Saturates) {
  auto four = graspers(4), eight = graspers(8);
  EXPECT_DOUBLE_EQ(duration_estimate(grasp_task(10, 2), 2, "grasp", ptrs(four)), 5);
  EXPECT_DOUBLE_EQ(duration_estimate(grasp_task(10, 2), 2, "grasp", ptrs(eight)), 5);
}

TEST(Duration, NoCapableRobot) {
  std::vector<Robot> team(1);
  team[0].capabilities = {"delivery"};
  EXPECT_THROW(duration_estimate(grasp_task(10, 2), 2, "grasp", ptrs(team)), NoCapableRobot);
}

TEST(Duration, NonIncreasingInCapableCount) {
  for (double sat : {1.0, 1.5, 2.0, 3.0})
    for (int n = 1; n <= 4; ++n) {
      double prev = INFINITY;
      for (int c = 1; c <= 12; ++c) {
        double d = duration_for_count(7, n, c, sat);
        EXPECT_GT(d, 0);
        EXPECT_LE(d, prev);
        prev = d;
      }
    }
}

TEST(NavTime, Holonomic) {
  Robot r;
  r.maxSpeed = 2.5;
  EXPECT_DOUBLE_EQ(nav_time(Vec2{0, 0}, Vec2{5, 0}, r), 2.0);
  EXPECT_DOUBLE_EQ(nav_time(Vec2{3, 3}, Vec2{3, 3}, r), 0.0);
}

TEST(NavTime, CurvatureLimitedCollinear) {
  Robot r;
  r.maxSpeed = 2.5;
  r.curvatureLimit = 1.0;
  EXPECT_NEAR(nav_time(Pose{0, 0, 0}, Pose{4, 0, 0}, r), 1.6, 1e-12);
}

TEST(Response, MeanAndMax) {
  std::vector<Mission> ms(3);
  ms[0].id = "a";
  ms[0].release = 0;
  ms[0].finishTime = 30;
  ms[0].status = MissionStatus::Satisfied;
  ms[1].id = "b";
  ms[1].release = 10;
  ms[1].finishTime = 40;
  ms[1].status = MissionStatus::Satisfied;
  ms[2].id = "c";
  ms[2].status = MissionStatus::Cancelled;
  ms[2].finishTime = 99;
  auto m = response_metrics(ms, 50);
  EXPECT_DOUBLE_EQ(m.mean, 30);
  EXPECT_DOUBLE_EQ(m.max, 30);
  EXPECT_EQ(m.perMission.size(), 2u);

  std::vector<Mission> one(1);
  one[0].release = one[0].finishTime.emplace(12);
  one[0].status = MissionStatus::Satisfied;
  EXPECT_DOUBLE_EQ(response_metrics(one, 12).mean, 0);
}

TEST(LocalPlanTest, TimesIncrease) {
  LocalPlan p;
  p.append({1, {0, 0}, "grasp"});
  p.append({2, {1, 0}, "grasp"});
  EXPECT_THROW(p.append({2, {1, 0}, "grasp"}), std::invalid_argument);
  EXPECT_TRUE(p.monotone());
}

TEST(Geometry, PolygonBasics) {
  Polygon sq({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  EXPECT_DOUBLE_EQ(sq.area(), 4);
  EXPECT_EQ(sq.centroid(), (Vec2{1, 1}));
  EXPECT_TRUE(sq.contains({1, 1}));
  EXPECT_TRUE(sq.contains({2, 1}));
  EXPECT_FALSE(sq.contains({3, 1}));
  EXPECT_NEAR(sq.clip_x(0.5, 1.5).area(), 2, 1e-12);
  double lo, hi;
  ASSERT_TRUE(Polygon({{0, 0}, {2, 0}, {0, 2}}).span_at(1, lo, hi));
  EXPECT_NEAR(lo, 0, 1e-12);
  EXPECT_NEAR(hi, 1, 1e-12);
}

TEST(Scenario, LoadsAndValidates) {
  Scenario sc = scenario_from_json(small_scenario());
  ASSERT_EQ(sc.robots.size(), 2u);
  EXPECT_TRUE(sc.robots[1].curvatureLimit.has_value());
  ASSERT_EQ(sc.tasks.size(), 2u);
  EXPECT_EQ(sc.tasks[1].subtasks[0].state, SubtaskState::Undiscovered);
  EXPECT_EQ(sc.tasks[0].subtasks[0].id, "t1.s0");
  ASSERT_EQ(sc.missions.size(), 1u);
  EXPECT_EQ(sc.missions[0].tasks(), (std::vector<std::string>{"t1", "t2"}));
  EXPECT_DOUBLE_EQ(sc.missions[0].weight, 2);
  EXPECT_EQ(*sc.params.H, 6);
  EXPECT_EQ(sc.params.P, 2);
}

TEST(Scenario, RejectsBadInput) {
  auto j = small_scenario();
  j["missions"][0]["formula"] = "F(t1 & F zz)";
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
  j = small_scenario();
  j["missions"][0]["formula"] = "G t1";
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
  j = small_scenario();
  j["robots"][0]["maxSpeed"] = 0;
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
  j = small_scenario();
  j["tasks"][0]["subtasks"][0]["loc"] = json::array({10, 10});
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
  j = small_scenario();
  j["tasks"][0]["subtasks"][0]["n"] = 0;
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
  j = small_scenario();
  j["missions"][0]["formula"] = "t1 & t2";
  EXPECT_THROW(scenario_from_json(j), ScenarioInvalid);
}

TEST(Scenario, UnboundedHorizon) {
  auto j = small_scenario();
  j["params"]["H"] = "inf";
  EXPECT_FALSE(scenario_from_json(j).params.H.has_value());
}

TEST(ExecEstimate, SpreadsOverCrews) {
  Task t = grasp_task(10, 1);
  t.subtasks.push_back({"w.s1", 2, "grasp", {3, 3}, {}, false, SubtaskState::Open});
  FleetProfile f{2.0, 2.0};
  // two subtasks at beta = 2 form one crew: each 10 s, spacing sqrt(16/2)
  EXPECT_NEAR(exec_estimate(t, f), 20 + 2 * std::sqrt(8.0) / 2, 1e-9);
}
