#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "fleet/exec/world.hpp"
#include "fleet/local/coalition.hpp"
#include "fleet/local/dubins.hpp"
#include "fleet/local/routing.hpp"

namespace fleet::exec {

/// One leg of first-order motion: straight for holonomic robots, a Dubins
/// path for curvature-limited ones.
struct Leg {
  bool curved = false;
  local::MotionPrimitive prim;
  Pose from;
  Vec2 to;
  double length = 0;

  Pose at(double s) const;
};

Leg make_leg(const Pose& from, Vec2 to, std::optional<double> heading, const model::Robot& r);

struct Waypoint {
  Vec2 p;
  int subtask = -1;  // -1: sweep point
};

/// Crew member of a coverage task.
struct Worker {
  std::size_t robot = 0;
  std::vector<Waypoint> path;
  std::size_t cursor = 0;
  std::optional<Leg> leg;
  double s = 0;
  int workingOn = -1;
  double workUntil = 0;
  int waitingOn = -1;

  bool finished() const { return cursor >= path.size() && workingOn < 0 && waitingOn < 0; }
};

struct World::Active {
  int team = 0;
  std::size_t task = 0;
  double start = 0;
  double predictedEnd = 0;
  std::vector<std::size_t> crew;  // robot indices
  std::set<std::size_t> doneSubs;

  // static, known subtasks
  std::optional<local::Route> route;
  std::vector<std::size_t> routeSub;  // route subtask -> task subtask
  std::vector<double> subStart, subEnd;

  // static, unknown subtasks
  std::vector<Worker> workers;
  std::map<int, std::vector<std::size_t>> syncCrew;  // subtask -> worker indices

  // dynamic subtasks
  std::unique_ptr<local::CoalitionEngine> engine;
  std::vector<std::size_t> pursuers;   // engine robot -> robot index
  std::vector<std::size_t> targetSub;  // engine target -> task subtask
  std::size_t logSeen = 0;
};

}  // namespace fleet::exec
