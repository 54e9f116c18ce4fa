#include "fleet/model/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "fleet/errors.hpp"
#include "fleet/local/dubins.hpp"

namespace fleet::model {

double duration_for_count(double base, int n, int capable, double satCap) {
  if (capable <= 0) throw NoCapableRobot("no capable robot");
  double denom = std::min(static_cast<double>(capable), n * std::max(1.0, satCap));
  return base * n / denom;
}

double duration_estimate(const Task& task, int n, const std::string& a, const std::vector<const Robot*>& team) {
  int capable = 0;
  for (const Robot* r : team)
    if (r && r->status != RobotStatus::Failed && r->can(a)) ++capable;
  if (capable == 0) throw NoCapableRobot("no member can perform " + a + " for " + task.id);
  return duration_for_count(task.base_duration(a), n, capable, task.satCap);
}

double nav_time(Vec2 p, Vec2 q, const Robot& robot) { return distance(p, q) / robot.maxSpeed; }

double nav_time(const Pose& p, const Pose& q, const Robot& robot) {
  if (auto r = robot.turning_radius()) return local::dubins_path(p, q, *r).totalLength / robot.maxSpeed;
  return distance(p.point(), q.point()) / robot.maxSpeed;
}

ResponseMetrics response_metrics(const std::vector<Mission>& missions, double now) {
  (void)now;
  ResponseMetrics m;
  double sum = 0;
  int count = 0;
  for (const Mission& ms : missions) {
    if (ms.status != MissionStatus::Satisfied || !ms.finishTime) continue;
    double r = *ms.finishTime - ms.release;
    m.perMission[ms.id] = r;
    sum += r;
    m.max = count == 0 ? r : std::max(m.max, r);
    ++count;
  }
  m.mean = count ? sum / count : 0;
  return m;
}

double exec_estimate(const Task& t, const FleetProfile& fleet) {
  const auto req = t.requirements();
  double beta_tot = 0;
  for (const auto& [a, n] : req) beta_tot += n;
  beta_tot = std::max(1.0, beta_tot);

  double work = 0, nsum = 0;
  int J = 0;
  for (const Subtask& s : t.subtasks) {
    if (s.state == SubtaskState::Undiscovered || s.state == SubtaskState::Done) continue;
    auto it = req.find(s.action);
    int beta = it == req.end() ? s.minRobots : std::max(it->second, s.minRobots);
    work += duration_for_count(t.base_duration(s.action), s.minRobots, beta, t.satCap);
    nsum += s.minRobots;
    ++J;
  }
  const double area = t.region.empty() ? 0 : t.region.area();
  double total = 0;
  if (J > 0) {
    double nbar = nsum / J;
    double crews = std::max(1.0, std::min(static_cast<double>(J), beta_tot / nbar));
    double spacing = std::sqrt(area / J);
    total += work / crews + (J / crews) * spacing / fleet.speed;
  }
  if (t.cls == TaskClass::StaticUnknown) total += area / (beta_tot * fleet.speed * fleet.sensorWidth);
  return total;
}

}  // namespace fleet::model
