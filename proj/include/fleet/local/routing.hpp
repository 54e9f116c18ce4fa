#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleet/local/dubins.hpp"
#include "fleet/model/geometry.hpp"

namespace fleet::local {

struct RouteRobot {
  std::string id;
  std::set<std::string> capabilities;
  Pose pose;
  double speed = 1;
  std::optional<double> radius;  // minimum turning radius; none is holonomic
  double availableAt = 0;
};

struct RouteSubtask {
  std::string id;
  Vec2 location;
  std::string action;
  int n = 1;
  double execTime = 0;
};

struct RouteOptions {
  int headings = 8;
  std::size_t exactMaxSubtasks = 8;
  std::size_t exactMaxRobots = 3;
  long nodeLimit = 3000000;
};

struct RouteVisit {
  int subtask = -1;
  double heading = 0;
  double arrive = 0;
  double start = 0;  // synchronized across members
  double end = 0;
  double legLength = 0;
  std::optional<MotionPrimitive> leg;  // curvature-limited legs only
  Pose from;
};

struct RobotRoute {
  std::string robot;
  std::vector<RouteVisit> visits;
  double finish = 0;
};

struct Route {
  std::vector<RobotRoute> routes;  // one per robot, same order as the input
  double makespan = 0;
  bool exact = false;
  long nodes = 0;
};

/// Joint assignment, ordering and heading selection minimizing makespan.
/// Throws CapabilityGap when a subtask cannot be staffed.
Route route_static_known(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subtasks,
                         const RouteOptions& opt = {});

/// Timing of fixed per-robot visit orders (subtask indices) with synchronized
/// multi-robot starts; headings are chosen per robot by shortest travel.
/// Returns nullopt when the orders deadlock.
std::optional<Route> schedule_routes(const std::vector<RouteRobot>& robots, const std::vector<RouteSubtask>& subtasks,
                                     const std::vector<std::vector<int>>& orders, const RouteOptions& opt = {});

}  // namespace fleet::local
