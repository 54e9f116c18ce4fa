#include <algorithm>
#include <cmath>

#include "active.hpp"
#include "fleet/errors.hpp"
#include "fleet/local/coverage.hpp"

namespace fleet::exec {

using nlohmann::json;
using model::MissionStatus;
using model::RobotStatus;
using model::SubtaskState;
using model::TaskClass;
using model::TaskStatus;

namespace {

constexpr double kEps = 1e-9;

double bearing(Vec2 a, Vec2 b) { return normalize_angle(std::atan2(b.y - a.y, b.x - a.x)); }

std::set<std::string> task_actions(const model::Task& t) {
  std::set<std::string> out;
  for (const auto& s : t.subtasks) out.insert(s.action);
  return out;
}

bool can_all(const model::Robot& r, const std::set<std::string>& actions) {
  for (const auto& a : actions)
    if (!r.can(a)) return false;
  return true;
}

}  // namespace

Pose Leg::at(double s) const {
  if (curved) return prim.at(s);
  if (length <= 0) return from;
  double f = std::clamp(s / length, 0.0, 1.0);
  Vec2 a = from.point();
  return {a.x + f * (to.x - a.x), a.y + f * (to.y - a.y), bearing(a, to)};
}

Leg make_leg(const Pose& from, Vec2 to, std::optional<double> heading, const model::Robot& r) {
  Leg l;
  l.from = from;
  l.to = to;
  auto radius = r.turning_radius();
  if (!radius) {
    l.length = distance(from.point(), to);
    return l;
  }
  double h = heading ? *heading : (distance(from.point(), to) > kEps ? bearing(from.point(), to) : from.theta);
  l.curved = true;
  l.prim = local::dubins_path(from, {to.x, to.y, h}, *radius);
  l.length = l.prim.totalLength;
  return l;
}

// ---------------------------------------------------------------- starting

void World::start_ready_teams() {
  for (std::size_t k = 0; k < teams_.size(); ++k) {
    if (teams_[k].dissolved) continue;
    bool running = false;
    for (const auto& a : active_)
      if (a->team == teams_[k].id) running = true;
    if (!running) try_start(teams_[k]);
  }
}

bool World::try_start(TeamState& tm) {
  while (tm.next < tm.queue.size()) {
    auto s = tasks_[task_index(tm.queue[tm.next].task)].status;
    if (s != TaskStatus::Done && s != TaskStatus::Cancelled && s != TaskStatus::Executing) break;
    ++tm.next;
  }
  if (tm.next >= tm.queue.size()) {
    tm.dissolved = true;
    return false;
  }
  const std::size_t ti = task_index(tm.queue[tm.next].task);
  model::Task& task = tasks_[ti];
  const auto busy = busy_robots();
  std::vector<std::size_t> crew;
  for (const auto& id : tm.members) {
    std::size_t r = robot_index(id);
    if (robots_[r].status == RobotStatus::Failed) continue;
    if (busy.count(id)) return false;
    crew.push_back(r);
  }
  if (!permitted(task.id)) return false;

  if (params_.failureRho > 0) {
    // members that cannot work any of the task's actions sit it out and are not exposed
    std::bernoulli_distribution fail(params_.failureRho);
    auto acts = task_actions(task);
    std::vector<std::size_t> alive;
    for (std::size_t r : crew) {
      bool works = std::any_of(acts.begin(), acts.end(), [&](const std::string& a) { return robots_[r].can(a); });
      if (works && fail(rng_)) {
        robots_[r].status = RobotStatus::Failed;
        emit("failure", {{"robot", robots_[r].id}, {"team", tm.id}, {"task", task.id}});
      } else {
        alive.push_back(r);
      }
    }
    crew = alive;
  }

  auto capable = [&](const std::string& a) {
    int n = 0;
    for (std::size_t r : crew) n += robots_[r].can(a) ? 1 : 0;
    return n;
  };
  std::string gap;
  if (task.cls == TaskClass::DynamicKnown) {
    auto acts = task_actions(task);
    int pursuers = 0, need = 0;
    for (std::size_t r : crew) pursuers += can_all(robots_[r], acts) ? 1 : 0;
    for (const auto& s : task.subtasks) need = std::max(need, s.minRobots);
    if (pursuers < need) gap = "pursuers";
  } else {
    for (const auto& s : task.subtasks) {
      if (s.state == SubtaskState::Done) continue;
      int need = s.state == SubtaskState::Undiscovered ? 1 : s.minRobots;
      if (capable(s.action) < need) gap = s.action;
    }
  }
  auto release_queue = [&](std::size_t from) {
    for (std::size_t k = from; k < tm.queue.size(); ++k) {
      auto& t = tasks_[task_index(tm.queue[k].task)];
      if (t.status == TaskStatus::Assigned) t.status = TaskStatus::Unassigned;
    }
    tm.queue.resize(std::min(from, tm.queue.size()));
  };
  if (!gap.empty() || crew.empty()) {
    std::string detail = "team " + std::to_string(tm.id) + " cannot staff " + task.id + " (" + gap + ")";
    pending_.push_back({TriggerKind::Infeasibility, clock_, detail});
    emit("teamInfeasible", {{"team", tm.id}, {"task", task.id}, {"constraint", gap.empty() ? "crew" : gap}});
    release_queue(tm.next);
    tm.dissolved = true;
    return false;
  }
  for (const auto& [a, beta] : tm.capacity)
    if (capable(a) < beta && tm.next + 1 < tm.queue.size()) {
      pending_.push_back({TriggerKind::Infeasibility, clock_, "team " + std::to_string(tm.id) + " below capacity for " + a});
      release_queue(tm.next + 1);
      break;
    }

  auto act = std::make_unique<Active>();
  Active& a = *act;
  a.team = tm.id;
  a.task = ti;
  a.start = clock_;
  a.crew = crew;
  a.predictedEnd = clock_ + exec_estimate(task);

  if (task.cls == TaskClass::StaticKnown) {
    std::vector<local::RouteRobot> rr;
    for (std::size_t r : crew) {
      const auto& rb = robots_[r];
      rr.push_back({rb.id, rb.capabilities, {rb.position.x, rb.position.y, rb.heading}, rb.maxSpeed, rb.turning_radius(), clock_});
    }
    std::vector<local::RouteSubtask> subs;
    for (std::size_t j = 0; j < task.subtasks.size(); ++j) {
      const auto& s = task.subtasks[j];
      if (s.state == SubtaskState::Done) continue;
      subs.push_back({s.id, s.location, s.action, s.minRobots, task.base_duration(s.action)});
      a.routeSub.push_back(j);
    }
    local::RouteOptions opt;
    opt.headings = params_.headings;
    a.route = local::route_static_known(rr, subs, opt);
    a.subStart.assign(subs.size(), 0);
    a.subEnd.assign(subs.size(), 0);
    for (const auto& route : a.route->routes)
      for (const auto& v : route.visits) {
        a.subStart[static_cast<std::size_t>(v.subtask)] = v.start;
        a.subEnd[static_cast<std::size_t>(v.subtask)] = v.end;
      }
    a.predictedEnd = a.route->makespan;
  } else if (task.cls == TaskClass::StaticUnknown) {
    std::vector<local::CoverageRobot> team;
    for (std::size_t r : crew)
      team.push_back({robots_[r].id, robots_[r].position, robots_[r].maxSpeed, 1.8 * robots_[r].perceptionRadius});
    auto slabs = local::coverage_partition(team, task.region);
    double longest = 0;
    for (std::size_t k = 0; k < slabs.size(); ++k) {
      Worker w;
      w.robot = robot_index(slabs[k].robot);
      Vec2 at = robots_[w.robot].position;
      double len = 0;
      for (Vec2 p : slabs[k].sweep) {
        w.path.push_back({p, -1});
        len += distance(at, p);
        at = p;
      }
      longest = std::max(longest, len / robots_[w.robot].maxSpeed);
      a.workers.push_back(std::move(w));
    }
    a.predictedEnd = std::max(a.predictedEnd, clock_ + longest);
  } else {
    auto acts = task_actions(task);
    std::vector<local::Pursuer> ps;
    for (std::size_t r : crew)
      if (can_all(robots_[r], acts)) {
        ps.push_back({robots_[r].id, robots_[r].position, robots_[r].maxSpeed});
        a.pursuers.push_back(r);
      }
    std::vector<local::MovingTarget> ts;
    for (std::size_t j = 0; j < task.subtasks.size(); ++j) {
      const auto& s = task.subtasks[j];
      if (s.state == SubtaskState::Done) continue;
      ts.push_back({s.id, s.location, s.velocity.value_or(Vec2{0, 0}), s.minRobots, task.base_duration(s.action), task.satCap});
      a.targetSub.push_back(j);
    }
    local::DcfConfig cfg;
    cfg.delayLoMs = params_.commDelayMs.first;
    cfg.delayHiMs = params_.commDelayMs.second;
    cfg.seed = params_.seed * 1000003ULL + ti * 7919ULL + static_cast<std::uint64_t>(tick_);
    cfg.captureRadius = params_.captureRadius;
    cfg.arenaLo = {task.region.min_x(), task.region.min_y()};
    cfg.arenaHi = {task.region.max_x(), task.region.max_y()};
    a.engine = std::make_unique<local::CoalitionEngine>(std::move(ps), std::move(ts), cfg);
  }

  task.status = TaskStatus::Executing;
  ++tm.next;
  json crewIds = json::array();
  for (std::size_t r : crew) crewIds.push_back(robots_[r].id);
  emit("taskStart", {{"team", tm.id}, {"task", task.id}, {"robots", crewIds}, {"class", model::to_string(task.cls)}});
  active_.push_back(std::move(act));

  if (task.cls == TaskClass::StaticUnknown) {
    Active& live = *active_.back();
    for (std::size_t j = 0; j < task.subtasks.size(); ++j)
      if (task.subtasks[j].state == SubtaskState::Open) insert_subtask(live, j);
  }
  return true;
}

// ---------------------------------------------------------------- coverage tasks

void World::insert_subtask(Active& a, std::size_t j) {
  const model::Task& task = tasks_[a.task];
  const model::Subtask& s = task.subtasks[j];
  std::vector<local::InsertionPlan> plans;
  for (const Worker& w : a.workers) {
    const auto& rb = robots_[w.robot];
    local::InsertionPlan p{rb.id, rb.capabilities, rb.maxSpeed, {}};
    if (s.minRobots == 1) {
      p.waypoints.push_back(rb.position);
      for (std::size_t k = w.cursor; k < w.path.size(); ++k) p.waypoints.push_back(w.path[k].p);
    } else {
      // joint subtasks go to the end so every member meets them in one order
      p.waypoints.push_back(w.path.empty() || w.cursor >= w.path.size() ? rb.position : w.path.back().p);
    }
    plans.push_back(std::move(p));
  }
  std::vector<local::Insertion> ins;
  try {
    ins = local::best_insertions(plans, s.location, s.action, s.minRobots);
  } catch (const CapabilityGap& e) {
    coordination("insertionFailed", a.team, task.id, {{"subtask", s.id}, {"detail", e.what()}});
    pending_.push_back({TriggerKind::Infeasibility, clock_, e.what()});
    return;
  }
  std::vector<std::size_t> crew;
  for (const auto& i : ins) {
    Worker& w = a.workers[i.plan];
    std::size_t at = s.minRobots == 1 ? w.cursor + i.position - 1 : w.path.size();
    w.path.insert(w.path.begin() + static_cast<long>(at), Waypoint{s.location, static_cast<int>(j)});
    if (at == w.cursor) w.leg.reset();
    crew.push_back(i.plan);
    coordination("insertion", a.team, task.id,
                 {{"robot", robots_[w.robot].id}, {"subtask", s.id}, {"deltaCost", i.deltaCost}, {"position", at}});
  }
  a.syncCrew[static_cast<int>(j)] = crew;
}

void World::reveal(Active& a, std::size_t robot, Vec2 p0, Vec2 p1) {
  model::Task& task = tasks_[a.task];
  for (std::size_t j = 0; j < task.subtasks.size(); ++j) {
    auto& s = task.subtasks[j];
    if (s.state != SubtaskState::Undiscovered) continue;
    if (point_segment_distance(s.location, p0, p1) > robots_[robot].perceptionRadius + kEps) continue;
    s.state = SubtaskState::Open;
    coordination("discovery", a.team, task.id, {{"robot", robots_[robot].id}, {"subtask", s.id}, {"at", json::array({s.location.x, s.location.y})}});
    insert_subtask(a, j);
  }
}

void World::advance_sweep(Active& a, double t0, double t1) {
  model::Task& task = tasks_[a.task];
  for (std::size_t wi = 0; wi < a.workers.size(); ++wi) {
    Worker& w = a.workers[wi];
    model::Robot& rb = robots_[w.robot];
    double t = t0;
    while (t < t1 - kEps) {
      if (w.workingOn >= 0) {
        if (w.workUntil > t1 + kEps) {
          t = t1;
          break;
        }
        t = std::max(t, w.workUntil);
        int j = w.workingOn;
        w.workingOn = -1;
        bool all = true;
        for (std::size_t o : a.syncCrew[j])
          if (a.workers[o].workingOn == j) all = false;
        if (all && !a.doneSubs.count(static_cast<std::size_t>(j))) on_subtask_done(a, static_cast<std::size_t>(j));
        continue;
      }
      if (w.waitingOn >= 0) {
        t = t1;
        break;
      }
      if (w.cursor >= w.path.size()) break;
      if (!w.leg) {
        std::optional<double> h;
        if (w.cursor + 1 < w.path.size() && distance(w.path[w.cursor].p, w.path[w.cursor + 1].p) > kEps)
          h = bearing(w.path[w.cursor].p, w.path[w.cursor + 1].p);
        w.leg = make_leg({rb.position.x, rb.position.y, rb.heading}, w.path[w.cursor].p, h, rb);
        w.s = 0;
      }
      Vec2 before = rb.position;
      double remain = (w.leg->length - w.s) / rb.maxSpeed;
      Pose pose;
      bool arrived = t + remain <= t1 + kEps;
      if (arrived) {
        t += remain;
        pose = w.leg->at(w.leg->length);
      } else {
        w.s += (t1 - t) * rb.maxSpeed;
        pose = w.leg->at(w.s);
        t = t1;
      }
      rb.position = pose.point();
      rb.heading = pose.theta;
      reveal(a, w.robot, before, rb.position);
      if (!arrived) break;
      w.leg.reset();
      const Waypoint wp = w.path[w.cursor++];
      if (wp.subtask < 0) continue;
      const auto& s = task.subtasks[static_cast<std::size_t>(wp.subtask)];
      const double exec = task.base_duration(s.action);
      if (s.minRobots == 1) {
        w.workingOn = wp.subtask;
        w.workUntil = t + exec;
        task.subtasks[static_cast<std::size_t>(wp.subtask)].state = SubtaskState::InProgress;
        continue;
      }
      w.waitingOn = wp.subtask;
      bool all = true;
      for (std::size_t o : a.syncCrew[wp.subtask])
        if (a.workers[o].waitingOn != wp.subtask) all = false;
      if (all) {
        for (std::size_t o : a.syncCrew[wp.subtask]) {
          a.workers[o].waitingOn = -1;
          a.workers[o].workingOn = wp.subtask;
          a.workers[o].workUntil = t + exec;
        }
        task.subtasks[static_cast<std::size_t>(wp.subtask)].state = SubtaskState::InProgress;
      }
    }
    rb.status = w.workingOn >= 0 ? RobotStatus::Executing
                : (w.waitingOn >= 0 || w.cursor >= w.path.size()) ? RobotStatus::Waiting
                                                                    : RobotStatus::Navigating;
  }
  bool swept = std::all_of(a.workers.begin(), a.workers.end(), [](const Worker& w) { return w.finished(); });
  if (!swept) return;
  // the sweep is over: anything still hidden lies outside every swath
  for (std::size_t j = 0; j < task.subtasks.size(); ++j) {
    auto& s = task.subtasks[j];
    if (s.state != SubtaskState::Undiscovered) continue;
    s.state = SubtaskState::Open;
    coordination("lateDiscovery", a.team, task.id, {{"subtask", s.id}});
    insert_subtask(a, j);
  }
}

// ---------------------------------------------------------------- known routes

void World::advance_route(Active& a, double t) {
  model::Task& task = tasks_[a.task];
  for (std::size_t k = 0; k < a.route->routes.size(); ++k) {
    const auto& route = a.route->routes[k];
    model::Robot& rb = robots_[a.crew[k]];
    rb.status = RobotStatus::Waiting;
    double dep = a.start;
    for (const auto& v : route.visits) {
      const Vec2 goal = task.subtasks[a.routeSub[static_cast<std::size_t>(v.subtask)]].location;
      if (t < v.arrive - kEps) {
        double s = (t - dep) * rb.maxSpeed;
        Pose p;
        if (v.leg) {
          p = v.leg->at(s);
        } else {
          Leg l;
          l.from = v.from;
          l.to = goal;
          l.length = distance(v.from.point(), goal);
          p = l.at(s);
        }
        rb.position = p.point();
        rb.heading = p.theta;
        rb.status = RobotStatus::Navigating;
        break;
      }
      rb.position = goal;
      rb.heading = v.leg ? v.heading : (distance(v.from.point(), goal) > kEps ? bearing(v.from.point(), goal) : rb.heading);
      if (t < v.start - kEps) {
        rb.status = RobotStatus::Waiting;
        break;
      }
      if (t < v.end - kEps) {
        rb.status = RobotStatus::Executing;
        break;
      }
      dep = v.end;
    }
  }
  for (std::size_t j = 0; j < a.routeSub.size(); ++j) {
    std::size_t sj = a.routeSub[j];
    if (a.doneSubs.count(sj)) continue;
    if (t >= a.subEnd[j] - kEps) on_subtask_done(a, sj);
    else if (t >= a.subStart[j] - kEps) task.subtasks[sj].state = SubtaskState::InProgress;
  }
}

// ---------------------------------------------------------------- pursuit

void World::advance_pursuit(Active& a) {
  model::Task& task = tasks_[a.task];
  a.engine->step(params_.dt);
  const auto& ps = a.engine->robots();
  const auto& ts = a.engine->targets();
  const auto& scheme = a.engine->scheme();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    model::Robot& rb = robots_[a.pursuers[i]];
    if (distance(rb.position, ps[i].pos) > kEps) rb.heading = bearing(rb.position, ps[i].pos);
    rb.position = ps[i].pos;
    int j = scheme[i];
    rb.status = j < 0 ? RobotStatus::Waiting
                : ts[static_cast<std::size_t>(j)].phase == local::TargetPhase::Handling ? RobotStatus::Executing
                                                                                       : RobotStatus::Navigating;
  }
  for (std::size_t r : a.crew)
    if (std::find(a.pursuers.begin(), a.pursuers.end(), r) == a.pursuers.end()) robots_[r].status = RobotStatus::Waiting;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    auto& s = task.subtasks[a.targetSub[k]];
    s.location = ts[k].pos;
    if (ts[k].phase == local::TargetPhase::Handling) s.state = SubtaskState::InProgress;
    if (ts[k].phase == local::TargetPhase::Done && !a.doneSubs.count(a.targetSub[k])) on_subtask_done(a, a.targetSub[k]);
  }
  const auto& log = a.engine->log();
  for (; a.logSeen < log.size(); ++a.logSeen) {
    const auto& e = log[a.logSeen];
    coordination(e.kind, a.team, task.id,
                 {{"at", a.start + e.t}, {"robot", e.robot}, {"from", e.from}, {"to", e.to}, {"round", e.round}, {"value", e.value}});
  }
}

// ---------------------------------------------------------------- queries

std::map<std::pair<std::string, std::string>, std::vector<std::string>> World::servicing() const {
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> out;
  for (const auto& ap : active_) {
    const Active& a = *ap;
    const model::Task& task = tasks_[a.task];
    auto add = [&](std::size_t sub, std::size_t robot) { out[{task.id, task.subtasks[sub].id}].push_back(robots_[robot].id); };
    if (a.route) {
      for (std::size_t k = 0; k < a.route->routes.size(); ++k)
        for (const auto& v : a.route->routes[k].visits)
          if (clock_ >= v.start - kEps && clock_ < v.end - kEps) add(a.routeSub[static_cast<std::size_t>(v.subtask)], a.crew[k]);
    } else if (a.engine) {
      const auto& ts = a.engine->targets();
      const auto& scheme = a.engine->scheme();
      for (std::size_t i = 0; i < scheme.size(); ++i) {
        int j = scheme[i];
        if (j >= 0 && ts[static_cast<std::size_t>(j)].phase == local::TargetPhase::Handling)
          add(a.targetSub[static_cast<std::size_t>(j)], a.pursuers[i]);
      }
    } else {
      for (const auto& w : a.workers)
        if (w.workingOn >= 0) add(static_cast<std::size_t>(w.workingOn), w.robot);
    }
  }
  return out;
}

// ---------------------------------------------------------------- progress

void World::on_subtask_done(Active& a, std::size_t j) {
  model::Task& task = tasks_[a.task];
  task.subtasks[j].state = SubtaskState::Done;
  a.doneSubs.insert(j);
  emit("subtaskDone", {{"team", a.team}, {"task", task.id}, {"subtask", task.subtasks[j].id}});
}

bool World::advance_active(Active& a) {
  const model::Task& task = tasks_[a.task];
  if (task.cls == TaskClass::StaticKnown) advance_route(a, clock_);
  else if (task.cls == TaskClass::StaticUnknown) advance_sweep(a, clock_ - params_.dt, clock_);
  else advance_pursuit(a);
  if (task.cls == TaskClass::DynamicKnown) return a.engine->all_done();
  for (const auto& s : task.subtasks)
    if (s.state != SubtaskState::Done) return false;
  return task.cls != TaskClass::StaticUnknown ||
         std::all_of(a.workers.begin(), a.workers.end(), [](const Worker& w) { return w.finished(); });
}

void World::finish_task(Active& a) {
  model::Task& task = tasks_[a.task];
  task.status = TaskStatus::Done;
  json crewIds = json::array();
  for (std::size_t r : a.crew) crewIds.push_back(robots_[r].id);
  emit("taskDone", {{"team", a.team}, {"task", task.id}, {"robots", crewIds}});
  if (committed_.count(task.id)) doneSinceCycle_.insert(task.id);
  idleSinceCycle_ = true;
  for (std::size_t m = 0; m < missions_.size(); ++m) {
    model::Mission& ms = missions_[m];
    if (!released_[m] || ms.status != MissionStatus::Active) continue;
    const auto& A = *ms.automaton;
    if (!A.symbol_index(task.id)) continue;
    reach_[m] = A.advance(reach_[m], task.id);
    words_[m].push_back(task.id);
    if (reach_[m].empty()) {
      pending_.push_back({TriggerKind::Infeasibility, clock_, "mission " + ms.id + " left its automaton"});
      continue;
    }
    if (A.intersects_accepting(reach_[m])) {
      ms.status = MissionStatus::Satisfied;
      ms.finishTime = clock_;
      emit("missionSatisfied", {{"mission", ms.id}, {"response", clock_ - ms.release}, {"word", words_[m]}});
    }
  }
}

void World::step() {
  start_ready_teams();
  ++tick_;
  clock_ = static_cast<double>(tick_) * params_.dt;
  std::vector<std::size_t> finished;
  for (std::size_t k = 0; k < active_.size(); ++k)
    if (advance_active(*active_[k])) finished.push_back(k);
  for (std::size_t k : finished) finish_task(*active_[k]);
  for (auto it = finished.rbegin(); it != finished.rend(); ++it) active_.erase(active_.begin() + static_cast<long>(*it));

  std::set<std::size_t> crew;
  for (const auto& a : active_) crew.insert(a->crew.begin(), a->crew.end());
  std::set<std::string> waiting;
  for (const auto& tm : teams_)
    if (!tm.dissolved && tm.next < tm.queue.size()) waiting.insert(tm.members.begin(), tm.members.end());
  for (std::size_t r = 0; r < robots_.size(); ++r) {
    if (robots_[r].status == RobotStatus::Failed || crew.count(r)) continue;
    robots_[r].status = waiting.count(robots_[r].id) ? RobotStatus::Waiting : RobotStatus::Idle;
  }
  sample_metrics();
}

}  // namespace fleet::exec
