#pragma once

#include <map>
#include <string>
#include <vector>

#include "fleet/model/types.hpp"

namespace fleet::model {

/// Execution time of one subtask needing `n` robots with action `a` when
/// `team` works on it: base(a) * n / min(capable, n * satCap).
double duration_estimate(const Task& task, int n, const std::string& a, const std::vector<const Robot*>& team);

/// Same model with the capable count given directly.
double duration_for_count(double base, int n, int capable, double satCap);

double nav_time(Vec2 p, Vec2 q, const Robot& robot);
/// Curvature-limited robots use the Dubins length between the poses.
double nav_time(const Pose& p, const Pose& q, const Robot& robot);

struct ResponseMetrics {
  double mean = 0;
  double max = 0;
  std::map<std::string, double> perMission;
};

/// Response time t_f - t_release over satisfied missions.
ResponseMetrics response_metrics(const std::vector<Mission>& missions, double now);

/// Fleet-level constants used by pre-formation execution estimates.
struct FleetProfile {
  double speed = 1;        // conservative (minimum) robot speed
  double sensorWidth = 2;  // swath width used for coverage
};

/// Execution estimate of a whole task at exact staffing. Known subtasks are
/// spread over the parallel crews the staffing allows; uncovered area of
/// unknown-class tasks adds a sweep term.
double exec_estimate(const Task& t, const FleetProfile& fleet);

}  // namespace fleet::model
