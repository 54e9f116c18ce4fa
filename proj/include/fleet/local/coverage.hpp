#pragma once

#include <set>
#include <string>
#include <vector>

#include "fleet/model/geometry.hpp"

namespace fleet::local {

struct CoverageRobot {
  std::string id;
  Vec2 position;
  double speed = 1;
  double sensorWidth = 2;  // swath diameter
};

struct Slab {
  std::string robot;
  double xlo = 0, xhi = 0;
  Polygon cell;
  std::vector<Vec2> sweep;  // boustrophedon waypoints
};

/// Vertical slabs with area proportional to speed * sensorWidth, one per
/// robot in left-to-right order of their positions, each swept in lanes.
/// Throws EmptyTeam.
std::vector<Slab> coverage_partition(const std::vector<CoverageRobot>& team, const Polygon& region);

/// Smallest distance from p to a polyline.
double distance_to_path(Vec2 p, const std::vector<Vec2>& path);

struct InsertionPlan {
  std::string robot;
  std::set<std::string> capabilities;
  double speed = 1;
  std::vector<Vec2> waypoints;  // first entry is the robot's current position
};

struct Insertion {
  std::size_t plan = 0;
  std::size_t position = 0;  // new waypoint index
  double deltaCost = 0;      // added travel time
};

/// Cheapest (robot, position) insertions for a discovered subtask needing
/// `n` robots capable of `action`; one entry per chosen robot. Does not
/// modify the plans. Throws CapabilityGap.
std::vector<Insertion> best_insertions(const std::vector<InsertionPlan>& plans, Vec2 site, const std::string& action, int n = 1);

/// Applies best_insertions and returns them.
std::vector<Insertion> insert_min_disruption(std::vector<InsertionPlan>& plans, Vec2 site, const std::string& action, int n = 1);

}  // namespace fleet::local
