#include "fleet/exec/world.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "active.hpp"
#include "fleet/errors.hpp"
#include "fleet/formation/formation.hpp"
#include "fleet/model/estimators.hpp"

namespace fleet::exec {

using nlohmann::json;
using model::MissionStatus;
using model::RobotStatus;
using model::TaskStatus;

namespace {

json point(Vec2 p) { return json::array({p.x, p.y}); }

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const char* to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::ProgressMajority: return "progressMajority";
    case TriggerKind::MissionChange: return "missionChange";
    case TriggerKind::Infeasibility: return "infeasibility";
  }
  return "?";
}

json EventRecord::to_json() const {
  json j{{"seq", seq}, {"t", t}, {"kind", kind}};
  for (const auto& [k, v] : payload.items()) j[k] = v;
  return j;
}

World::World(model::Scenario sc)
    : params_(sc.params), robots_(std::move(sc.robots)), tasks_(std::move(sc.tasks)), rng_(sc.params.seed) {
  for (auto& m : sc.missions) {
    reach_.push_back(m.automaton->initial());
    words_.emplace_back();
    oracles_.push_back(std::make_unique<logic::CompletionOracle>(m.automaton.get()));
    released_.push_back(false);
    missions_.push_back(std::move(m));
  }
  emit("init", {{"robots", robots_.size()}, {"tasks", tasks_.size()}, {"missions", missions_.size()}});
}

World::~World() = default;

// Same problem with team k removed; later team indices shift down and
// robots locked to k are kept out of every team.
static formation::FormationProblem without_team(formation::FormationProblem p, int k) {
  p.teams.erase(p.teams.begin() + k);
  auto remap = [&](std::vector<std::pair<std::string, int>>& v, bool lockSide) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [r, t] : v) {
      if (t == k) {
        if (lockSide)
          for (int o = 0; o < static_cast<int>(p.teams.size()); ++o) p.forbids.push_back({r, o});
        continue;
      }
      out.push_back({r, t > k ? t - 1 : t});
    }
    v = out;
  };
  remap(p.forbids, false);
  remap(p.locks, true);
  return p;
}

// Spare robots join a team as backups when the margin leaves room and their
// arrival is no later than the team's last member, so no J(k) grows.
static void pad_teams(const formation::FormationProblem& p, formation::FormationResult& r) {
  std::set<std::pair<std::string, int>> forbidden(p.forbids.begin(), p.forbids.end());
  for (std::size_t i = 0; i < p.robots.size(); ++i) {
    if (r.teamOf[i] >= 0) continue;
    const auto& rb = p.robots[i];
    int best = -1;
    double bestArrival = 0;
    for (std::size_t k = 0; k < p.teams.size(); ++k) {
      if (forbidden.count({rb.id, static_cast<int>(k)})) continue;
      bool useful = false, room = true;
      for (const auto& [a, beta] : p.teams[k].capacity) {
        if (!rb.capabilities.count(a)) continue;
        useful = true;
        int n = 0;
        for (std::size_t o = 0; o < p.robots.size(); ++o)
          if (r.teamOf[o] == static_cast<int>(k) && p.robots[o].capabilities.count(a)) ++n;
        if (n + 1 > p.upper(static_cast<int>(k), a)) room = false;
      }
      if (!useful || !room) continue;
      double latest = -1;
      for (std::size_t o = 0; o < p.robots.size(); ++o)
        if (r.teamOf[o] == static_cast<int>(k)) latest = std::max(latest, p.arrival(o, k));
      double mine = p.arrival(i, k);
      if (latest < 0 || mine > latest + 1e-9) continue;
      if (best < 0 || mine < bestArrival) best = static_cast<int>(k), bestArrival = mine;
    }
    if (best < 0) continue;
    r.teamOf[i] = best;
    r.members[static_cast<std::size_t>(best)].push_back(rb.id);
  }
}

std::size_t World::task_index(const std::string& id) const {
  for (std::size_t i = 0; i < tasks_.size(); ++i)
    if (tasks_[i].id == id) return i;
  throw UnknownEntity("task " + id);
}

std::size_t World::robot_index(const std::string& id) const {
  for (std::size_t i = 0; i < robots_.size(); ++i)
    if (robots_[i].id == id) return i;
  throw UnknownEntity("robot " + id);
}

const model::Robot* World::find_robot(const std::string& id) const {
  for (const auto& r : robots_)
    if (r.id == id) return &r;
  return nullptr;
}

const model::Task* World::find_task(const std::string& id) const {
  for (const auto& t : tasks_)
    if (t.id == id) return &t;
  return nullptr;
}

const model::Mission* World::find_mission(const std::string& id) const {
  for (const auto& m : missions_)
    if (m.id == id) return &m;
  return nullptr;
}

const std::vector<std::string>& World::word(const std::string& mission) const {
  for (std::size_t i = 0; i < missions_.size(); ++i)
    if (missions_[i].id == mission) return words_[i];
  return noWord_;
}

const logic::ReachableSet& World::reach(const std::string& mission) const {
  for (std::size_t i = 0; i < missions_.size(); ++i)
    if (missions_[i].id == mission) return reach_[i];
  throw UnknownEntity("mission " + mission);
}

bool World::task_executing(const std::string& task) const {
  for (const auto& a : active_)
    if (tasks_[a->task].id == task) return true;
  return false;
}

std::set<std::string> World::busy_robots() const {
  std::set<std::string> out;
  for (const auto& a : active_)
    for (std::size_t r : a->crew) out.insert(robots_[r].id);
  return out;
}

void World::emit(const std::string& kind, json payload) {
  events_.push_back({static_cast<long>(events_.size()), clock_, kind, std::move(payload)});
}

void World::coordination(const std::string& kind, int team, const std::string& task, json extra) {
  json j{{"t", clock_}, {"team", team}, {"task", task}, {"kind", kind}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  coordinationLog_.push_back(std::move(j));
}

void World::set_pending_conflicts(json conflicts) { conflicts_ = std::move(conflicts); }

void World::flag_mission_change(const std::string& detail) {
  pending_.push_back({TriggerKind::MissionChange, clock_, detail});
}

// ---------------------------------------------------------------- requests

void World::add_mission(model::Mission m, std::vector<model::Task> tasks, const std::string& request) {
  for (auto& t : tasks) tasks_.push_back(std::move(t));
  m.release = std::max(m.release, clock_);
  reach_.push_back(m.automaton->initial());
  words_.emplace_back();
  oracles_.push_back(std::make_unique<logic::CompletionOracle>(m.automaton.get()));
  released_.push_back(false);
  emit("requestApplied", {{"request", request}, {"requestKind", "newMission"}, {"mission", m.id}});
  missions_.push_back(std::move(m));
}

void World::cancel_mission(const std::string& mission, const std::string& request) {
  for (std::size_t i = 0; i < missions_.size(); ++i) {
    if (missions_[i].id != mission) continue;
    missions_[i].status = MissionStatus::Cancelled;
    for (const auto& sym : missions_[i].tasks()) {
      const model::Task* t = find_task(sym);
      if (!t || t->status == TaskStatus::Done || task_executing(sym)) continue;
      bool shared = false;
      for (std::size_t k = 0; k < missions_.size(); ++k)
        if (k != i && missions_[k].status == MissionStatus::Active && contains(missions_[k].tasks(), sym)) shared = true;
      if (!shared) tasks_[task_index(sym)].status = TaskStatus::Cancelled;
    }
  }
  emit("requestApplied", {{"request", request}, {"requestKind", "cancel"}, {"mission", mission}});
  flag_mission_change("cancel:" + mission);
}

void World::reprioritize(const model::PriorityUpdate& u, const std::string& request) {
  for (auto& m : missions_) {
    if (m.id != u.mission) continue;
    if (u.deadline) m.deadline = *u.deadline;
    if (u.weight) m.weight = *u.weight;
  }
  json j{{"request", request}, {"requestKind", "reprioritize"}, {"mission", u.mission}};
  if (u.deadline) j["deadline"] = *u.deadline;
  if (u.weight) j["weight"] = *u.weight;
  emit("requestApplied", j);
  flag_mission_change("reprioritize:" + u.mission);
}

void World::lock_robots(const Lock& lock) {
  for (auto& l : locks_) {
    std::vector<std::string> keep;
    for (const auto& r : l.robots)
      if (!contains(lock.robots, r)) keep.push_back(r);
    l.robots = keep;
  }
  std::erase_if(locks_, [](const Lock& l) { return l.robots.empty(); });
  locks_.push_back(lock);
  emit("requestApplied", {{"request", lock.request}, {"requestKind", "reassign"}, {"mission", lock.mission}, {"robots", lock.robots}});
  flag_mission_change("reassign:" + lock.mission);
}

void World::unlock(const std::string& request) {
  std::erase_if(locks_, [&](const Lock& l) { return l.request == request; });
  flag_mission_change("unlock:" + request);
}

// ---------------------------------------------------------------- triggers

void World::release_due() {
  for (std::size_t i = 0; i < missions_.size(); ++i) {
    if (released_[i] || missions_[i].release > clock_ + 1e-9) continue;
    released_[i] = true;
    if (missions_[i].status == MissionStatus::Active) flag_mission_change("release:" + missions_[i].id);
  }
}

bool World::has_future_releases() const {
  for (std::size_t i = 0; i < missions_.size(); ++i)
    if (!released_[i] && missions_[i].status == MissionStatus::Active) return true;
  return false;
}

bool World::settled() const {
  if (!active_.empty() || has_future_releases()) return false;
  for (std::size_t i = 0; i < missions_.size(); ++i)
    if (released_[i] && missions_[i].status == MissionStatus::Active) return false;
  return true;
}

std::vector<std::string> World::pool() const {
  std::vector<std::string> out;
  for (const auto& t : tasks_) {
    if (t.status != TaskStatus::Unassigned && t.status != TaskStatus::Assigned) continue;
    for (std::size_t i = 0; i < missions_.size(); ++i)
      if (released_[i] && missions_[i].status == MissionStatus::Active && contains(missions_[i].tasks(), t.id)) {
        out.push_back(t.id);
        break;
      }
  }
  return out;
}

std::vector<Trigger> World::check_triggers() const {
  std::vector<Trigger> out = pending_;
  if (!committed_.empty() && 2 * doneSinceCycle_.size() > committed_.size())
    out.push_back({TriggerKind::ProgressMajority, clock_,
                   std::to_string(doneSinceCycle_.size()) + "/" + std::to_string(committed_.size())});
  else if (committed_.empty() && idleSinceCycle_ && !pool().empty())
    out.push_back({TriggerKind::ProgressMajority, clock_, "idle"});
  if (out.empty() && active_.empty() && !pool().empty()) {
    // nothing runs and nothing can start: retry at a bounded rate
    double last = cycles_.empty() ? -1e9 : cycles_.back().t;
    // a team still travelling to its first task gets until its predicted start
    bool startable = false;
    double due = last;
    for (const auto& tm : teams_)
      if (!tm.dissolved && tm.next < tm.queue.size()) {
        startable = true;
        due = std::max(due, tm.queue[tm.next].start);
      }
    if (clock_ - last >= 5.0 - 1e-9 && (!startable || clock_ - due >= 20.0 - 1e-9))
      out.push_back({TriggerKind::ProgressMajority, clock_, "stall"});
  }
  return out;
}

// ---------------------------------------------------------------- planning

double World::exec_estimate(const model::Task& t) const {
  model::FleetProfile fp;
  double slow = model::kInf, perception = model::kInf;
  for (const auto& r : robots_) {
    if (r.status == RobotStatus::Failed) continue;
    slow = std::min(slow, r.maxSpeed);
    perception = std::min(perception, r.perceptionRadius);
  }
  fp.speed = params_.speedProbe > 0 ? params_.speedProbe : (std::isfinite(slow) ? slow : 1.0);
  fp.sensorWidth = std::isfinite(perception) ? 1.8 * perception : 2.0;
  return model::exec_estimate(t, fp);
}

std::map<std::string, double> World::margins() const {
  std::map<std::string, double> out;
  for (const auto& t : tasks_)
    for (const auto& s : t.subtasks) {
      double a = t.cls == model::TaskClass::StaticKnown ? 1.0 : params_.alphaUncertain;
      out[s.action] = std::max(out.count(s.action) ? out[s.action] : 1.0, a);
    }
  for (const auto& [a, v] : params_.alpha) out[a] = v;
  return out;
}

logic::ReachableSet World::reach_with_executing(std::size_t m) const {
  logic::ReachableSet r = reach_[m];
  const auto& A = *missions_[m].automaton;
  for (const auto& a : active_) {
    const std::string& sym = tasks_[a->task].id;
    if (A.symbol_index(sym)) r = A.advance(r, sym);
  }
  return r;
}

std::vector<std::string> World::mission_pool_symbols(const model::Mission& m, const std::string& except) const {
  std::vector<std::string> out;
  for (const auto& sym : m.tasks()) {
    if (sym == except) continue;
    const model::Task* t = find_task(sym);
    if (!t || t->status == TaskStatus::Done || t->status == TaskStatus::Cancelled || task_executing(sym)) continue;
    out.push_back(sym);
  }
  return out;
}

bool World::permitted(const std::string& task) const {
  for (std::size_t m = 0; m < missions_.size(); ++m) {
    const model::Mission& ms = missions_[m];
    if (!released_[m] || ms.status != MissionStatus::Active) continue;
    const auto& A = *ms.automaton;
    auto sym = A.symbol_index(task);
    if (!sym || !contains(ms.tasks(), task)) continue;
    for (const auto& a : active_) {
      auto other = A.symbol_index(tasks_[a->task].id);
      if (other && !logic::symbols_commute(A, *other, *sym)) return false;
    }
    logic::ReachableSet r = reach_with_executing(m);
    logic::ReachableSet next = A.advance(r, task);
    if (next.empty()) return false;
    std::uint64_t mask = 0;
    for (const auto& s : mission_pool_symbols(ms, task))
      if (auto i = A.symbol_index(s)) mask |= std::uint64_t{1} << *i;
    // a mission that is already beyond completion does not veto
    if (!oracles_[m]->completable(r, mask | (std::uint64_t{1} << *sym))) continue;
    if (!oracles_[m]->completable(next, mask)) return false;
  }
  return true;
}

void World::replan(const std::vector<Trigger>& triggers) {
  pending_.clear();
  ++cycle_;
  CycleStats stats;
  stats.cycle = cycle_;
  stats.t = clock_;
  json trig = json::array();
  for (const auto& t : triggers) trig.push_back({{"kind", to_string(t.kind)}, {"detail", t.detail}});

  // Locks expire with their mission.
  std::erase_if(locks_, [&](const Lock& l) {
    const model::Mission* m = find_mission(l.mission);
    return !m || m->status != MissionStatus::Active;
  });

  const auto poolIds = pool();
  assign::PlanningProblem prob;
  prob.now = clock_;
  for (std::size_t m = 0; m < missions_.size(); ++m) {
    if (!released_[m] || missions_[m].status != MissionStatus::Active) continue;
    assign::MissionInput mi;
    mi.id = missions_[m].id;
    mi.automaton = missions_[m].automaton.get();
    mi.reach = reach_with_executing(m);
    mi.weight = missions_[m].weight;
    mi.deadline = std::isfinite(missions_[m].deadline) ? missions_[m].deadline : 1e300;
    prob.missions.push_back(std::move(mi));
  }
  std::map<std::string, double> execOf;
  for (const auto& id : poolIds) {
    const model::Task& t = tasks_[task_index(id)];
    assign::TaskInput ti{t.id, t.region.centroid(), t.requirements(), exec_estimate(t)};
    execOf[t.id] = ti.execTime;
    prob.tasks.push_back(std::move(ti));
  }
  std::map<std::string, std::pair<double, Vec2>> rolled;  // robot -> (t_hat, x_hat)
  for (const auto& a : active_) {
    prob.frozen.push_back({tasks_[a->task].id, std::max(clock_, a->predictedEnd)});
    for (std::size_t r : a->crew)
      rolled[robots_[r].id] = {std::max(clock_, a->predictedEnd), tasks_[a->task].region.centroid()};
  }
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    const auto& r = robots_[i];
    if (r.status == RobotStatus::Failed) continue;
    alive.push_back(i);
    assign::RobotInput ri{r.id, {r.capabilities.begin(), r.capabilities.end()}, r.maxSpeed, clock_, r.position};
    if (auto it = rolled.find(r.id); it != rolled.end()) ri.availableAt = it->second.first, ri.availablePos = it->second.second;
    prob.robots.push_back(std::move(ri));
  }

  json replanEvent{{"cycle", cycle_}, {"triggers", trig}, {"pool", poolIds.size()}};
  if (poolIds.empty() || prob.missions.empty()) {
    replanEvent["K"] = 0;
    replanEvent["plans"] = json::array();
    emit("replan", replanEvent);
    committed_.clear();
    doneSinceCycle_.clear();
    idleSinceCycle_ = false;
    cycles_.push_back(stats);
    planningLog_.push_back({{"cycle", cycle_}, {"durationMs", 0.0}, {"expanded", 0}, {"pruned", 0}, {"K", 0},
                            {"predictedMakespan", 0.0}, {"plans", json::array()}});
    return;
  }

  assign::SearchConfig cfg;
  cfg.horizon = params_.H;
  cfg.batch = params_.P;
  cfg.eta1 = params_.eta1;
  cfg.eta2 = params_.eta2;
  cfg.lambdaD = params_.lambdaD;
  cfg.maxExpansions = params_.maxExpansions;
  cfg.wallBudgetSeconds = 1e9;  // expansion count is the only budget, for reproducibility

  auto t0 = std::chrono::steady_clock::now();
  assign::AssignmentResult res;
  try {
    res = assign::plan_horizon(prob, cfg);
  } catch (const Error& e) {
    stats.planMs = ms_since(t0);
    stats.failed = true;
    cycles_.push_back(stats);
    json missions = json::array();
    for (const auto& m : prob.missions) missions.push_back(m.id);
    emit("conflictWarning",
         {{"cycle", cycle_}, {"constraint", "planning"}, {"detail", e.what()}, {"missions", missions}, {"triggers", trig}});
    planningLog_.push_back({{"cycle", cycle_}, {"durationMs", stats.planMs}, {"failed", e.what()}});
    committed_.clear();
    doneSinceCycle_.clear();
    idleSinceCycle_ = false;
    return;
  }
  stats.planMs = ms_since(t0);
  stats.expanded = res.expanded;
  stats.pruned = res.pruned;

  // Formation over every live robot with rolled-forward availability.
  formation::FormationProblem fp;
  std::vector<std::vector<std::string>> planTasks;
  for (const auto& tp : res.plans) {
    formation::TeamSpec ts;
    ts.capacity = tp.capacity;
    for (const auto& pt : tp.tasks) {
      ts.plan.push_back(pt.task);
      ts.sites.push_back(tasks_[task_index(pt.task)].region.centroid());
      ts.execSum += execOf[pt.task];
    }
    ts.firstSite = ts.sites.front();
    planTasks.push_back(ts.plan);
    fp.teams.push_back(std::move(ts));
  }
  for (std::size_t i : alive) {
    const auto& r = robots_[i];
    formation::RobotSpec rs{r.id, r.capabilities, clock_, r.position, r.maxSpeed};
    if (auto it = rolled.find(r.id); it != rolled.end()) rs.availableAt = it->second.first, rs.availablePos = it->second.second;
    fp.robots.push_back(std::move(rs));
  }
  fp.alpha = margins();
  for (const auto& lock : locks_) {
    const model::Mission* m = find_mission(lock.mission);
    int team = -1;
    for (std::size_t k = 0; k < planTasks.size() && team < 0; ++k)
      for (const auto& t : planTasks[k])
        if (contains(m->tasks(), t)) team = static_cast<int>(k);
    std::map<std::string, int> used;
    for (const auto& rid : lock.robots) {
      const model::Robot* r = find_robot(rid);
      if (!r || r->status == RobotStatus::Failed) continue;
      bool fits = team >= 0;
      if (fits)
        for (const auto& [a, beta] : fp.teams[static_cast<std::size_t>(team)].capacity)
          if (r->can(a) && used[a] + 1 > fp.upper(team, a)) fits = false;
      if (fits) {
        for (const auto& [a, beta] : fp.teams[static_cast<std::size_t>(team)].capacity)
          if (r->can(a)) ++used[a];
        fp.locks.push_back({rid, team});
      } else {
        // reserved for its mission: kept out of every other team this cycle
        for (std::size_t k = 0; k < fp.teams.size(); ++k) fp.forbids.push_back({rid, static_cast<int>(k)});
      }
    }
  }

  auto t1 = std::chrono::steady_clock::now();
  formation::FormationResult fr;
  std::vector<std::string> deferred;
  while (true) {
    try {
      fr = formation::solve_formation(fp, params_.formationNodeLimit);
      break;
    } catch (const Infeasible&) {
    }
    try {
      fr = formation::greedy_fallback(fp);
      fr.status = formation::Status::Fallback;
      break;
    } catch (const Infeasible&) {
    }
    // per-action totals fit but no disjoint staffing does: shed the latest
    // plan whose removal lets the rest be staffed, else the last one
    if (fp.teams.empty()) break;
    int gone = static_cast<int>(fp.teams.size()) - 1;
    for (int k = gone; k >= 0; --k) {
      formation::FormationProblem trial = without_team(fp, k);
      try {
        formation::greedy_fallback(trial);
        gone = k;
        break;
      } catch (const Infeasible&) {
      }
    }
    if (gone != static_cast<int>(fp.teams.size()) - 1) {
      std::swap(fp.teams[static_cast<std::size_t>(gone)], fp.teams.back());
      std::swap(res.plans[static_cast<std::size_t>(gone)], res.plans.back());
      std::swap(planTasks[static_cast<std::size_t>(gone)], planTasks.back());
      const int last = static_cast<int>(fp.teams.size()) - 1;
      for (auto* v : {&fp.locks, &fp.forbids})
        for (auto& e : *v) e.second = e.second == gone ? last : (e.second == last ? gone : e.second);
      gone = last;
    }
    for (const auto& pt : res.plans.back().tasks) deferred.push_back(pt.task);
    fp.teams.pop_back();
    res.plans.pop_back();
    planTasks.pop_back();
    std::erase_if(fp.forbids, [&](const auto& f) { return f.second == gone; });
    for (const auto& l : fp.locks)
      if (l.second == gone)
        for (int k = 0; k < gone; ++k) fp.forbids.push_back({l.first, k});
    std::erase_if(fp.locks, [&](const auto& l) { return l.second == gone; });
  }
  if (fp.teams.empty()) fr = formation::FormationResult{};
  stats.formationMs = ms_since(t1);
  if (!deferred.empty())
    emit("teamsDeferred", {{"cycle", cycle_}, {"tasks", deferred}});
  if (!fp.teams.empty()) pad_teams(fp, fr);

  // Replace every plan that has not started.
  for (auto& tm : teams_) {
    bool running = false;
    for (const auto& a : active_)
      if (a->team == tm.id) running = true;
    if (running) {
      for (std::size_t k = tm.next; k < tm.queue.size(); ++k) {
        auto& t = tasks_[task_index(tm.queue[k].task)];
        if (t.status == TaskStatus::Assigned) t.status = TaskStatus::Unassigned;
      }
      tm.queue.resize(tm.next);
    } else if (!tm.dissolved) {
      for (std::size_t k = tm.next; k < tm.queue.size(); ++k) {
        auto& t = tasks_[task_index(tm.queue[k].task)];
        if (t.status == TaskStatus::Assigned) t.status = TaskStatus::Unassigned;
      }
      tm.dissolved = true;
    }
  }

  committed_.clear();
  doneSinceCycle_.clear();
  idleSinceCycle_ = false;
  json plans = json::array(), teamsJson = json::array(), planRecs = json::array();
  double makespan = 0;
  for (std::size_t k = 0; k < res.plans.size(); ++k) {
    const auto& members = fr.members[k];
    bool staffed = true;
    for (const auto& [a, beta] : res.plans[k].capacity) {
      int n = 0;
      for (const auto& rid : members) n += find_robot(rid)->can(a) ? 1 : 0;
      if (n < beta) staffed = false;
    }
    json tasksJson = json::array();
    for (const auto& pt : res.plans[k].tasks) tasksJson.push_back(pt.task);
    if (!staffed) {
      plans.push_back({{"team", nullptr}, {"tasks", tasksJson}, {"robots", members}, {"unstaffed", true}});
      continue;
    }
    TeamState tm;
    tm.id = nextTeam_++;
    tm.cycle = cycle_;
    tm.members = members;
    tm.capacity = res.plans[k].capacity;
    json slots = json::array();
    for (const auto& pt : res.plans[k].tasks) {
      tm.queue.push_back({pt.task, pt.start, pt.end});
      tasks_[task_index(pt.task)].status = TaskStatus::Assigned;
      committed_.insert(pt.task);
      slots.push_back({{"task", pt.task}, {"start", pt.start}, {"end", pt.end}});
    }
    double tStart = res.plans[k].tasks.front().start, tEnd = res.plans[k].endTime;
    makespan = std::max(makespan, tEnd);
    plans.push_back({{"team", tm.id}, {"tasks", slots}, {"robots", members}});
    teamsJson.push_back({{"team", tm.id}, {"robots", members}});
    planRecs.push_back({{"team", tm.id}, {"tasks", tasksJson}, {"tStart", tStart}, {"tEnd", tEnd}});
    teams_.push_back(std::move(tm));
  }
  stats.teams = static_cast<int>(teamsJson.size());
  stats.predictedMakespan = makespan;
  cycles_.push_back(stats);

  replanEvent["K"] = stats.teams;
  replanEvent["complete"] = res.complete;
  replanEvent["predictedMakespan"] = makespan;
  replanEvent["expanded"] = res.expanded;
  replanEvent["formation"] = formation::to_string(fr.status);
  replanEvent["plans"] = plans;
  emit("replan", replanEvent);
  planningLog_.push_back({{"cycle", cycle_}, {"durationMs", stats.planMs}, {"expanded", res.expanded},
                          {"pruned", res.pruned}, {"K", stats.teams}, {"predictedMakespan", makespan},
                          {"plans", planRecs}});
  formationLog_.push_back({{"cycle", cycle_}, {"status", formation::to_string(fr.status)}, {"objective", fr.objective},
                           {"durationMs", stats.formationMs}, {"teams", teamsJson}});
}

// ---------------------------------------------------------------- loop

void World::advance() {
  release_due();
  auto trig = check_triggers();
  if (!trig.empty()) replan(trig);
  step();
}

void World::sample_metrics() {
  if (missions_.empty() || clock_ + 1e-9 < nextMetrics_) return;
  nextMetrics_ += 1.0;
  double nav = 0, wait = 0, exe = 0, assigned = 0, unassigned = 0;
  for (const auto& r : robots_) {
    nav += r.status == RobotStatus::Navigating;
    wait += r.status == RobotStatus::Waiting;
    exe += r.status == RobotStatus::Executing;
  }
  for (const auto& id : pool()) {
    auto s = tasks_[task_index(id)].status;
    (s == TaskStatus::Assigned ? assigned : unassigned) += 1;
  }
  assigned += static_cast<double>(active_.size());
  metrics_.push_back({clock_, nav, wait, exe, assigned, unassigned});
}

// ---------------------------------------------------------------- reporting

json World::snapshot(std::size_t recentEvents) const {
  json j{{"v", 1}, {"clock", clock_}, {"tick", tick_}, {"cycle", cycle_}};
  std::map<std::string, int> teamOf;
  for (const auto& tm : teams_)
    if (!tm.dissolved)
      for (const auto& r : tm.members) teamOf[r] = tm.id;
  for (const auto& a : active_)
    for (std::size_t r : a->crew) teamOf[robots_[r].id] = a->team;
  json robots = json::array();
  for (const auto& r : robots_) {
    json rj = model::to_json(r);
    rj["position"] = point(r.position);
    rj["team"] = teamOf.count(r.id) ? json(teamOf[r.id]) : json(nullptr);
    robots.push_back(rj);
  }
  j["robots"] = robots;
  json tasks = json::array();
  for (const auto& t : tasks_) tasks.push_back(model::to_json(t));
  j["tasks"] = tasks;
  json missions = json::array();
  for (std::size_t m = 0; m < missions_.size(); ++m) {
    json mj = model::to_json(missions_[m]);
    mj["released"] = static_cast<bool>(released_[m]);
    mj["reach"] = reach_[m];
    mj["word"] = words_[m];
    missions.push_back(mj);
  }
  j["missions"] = missions;
  json teams = json::array();
  for (const auto& tm : teams_) {
    bool running = false;
    std::string current;
    for (const auto& a : active_)
      if (a->team == tm.id) running = true, current = tasks_[a->task].id;
    if (tm.dissolved && !running) continue;
    json gantt = json::array();
    for (const auto& s : tm.queue) gantt.push_back({{"task", s.task}, {"start", s.start}, {"end", s.end}});
    teams.push_back({{"team", tm.id}, {"cycle", tm.cycle}, {"robots", tm.members}, {"current", running ? json(current) : json(nullptr)},
                     {"next", tm.next}, {"gantt", gantt}});
  }
  j["teams"] = teams;
  json recent = json::array();
  std::size_t from = events_.size() > recentEvents ? events_.size() - recentEvents : 0;
  for (std::size_t i = from; i < events_.size(); ++i) recent.push_back(events_[i].to_json());
  j["recentEvents"] = recent;
  j["pendingConflicts"] = conflicts_;
  return j;
}

json World::summary() const {
  auto rm = model::response_metrics(missions_, clock_);
  json j{{"t", clock_}, {"meanResponse", rm.mean}, {"maxResponse", rm.max}, {"perMission", rm.perMission}};
  std::size_t satisfied = 0, counted = 0, done = 0, required = 0;
  for (std::size_t m = 0; m < missions_.size(); ++m) {
    if (missions_[m].status == MissionStatus::Cancelled || !released_[m]) continue;
    ++counted;
    satisfied += missions_[m].status == MissionStatus::Satisfied;
    for (const auto& sym : missions_[m].tasks())
      if (const model::Task* t = find_task(sym)) {
        ++required;
        done += t->status == TaskStatus::Done;
      }
  }
  j["missions"] = counted;
  j["successRate"] = counted ? static_cast<double>(satisfied) / static_cast<double>(counted) : 1.0;
  j["taskCompletion"] = required ? static_cast<double>(done) / static_cast<double>(required) : 1.0;
  json planMs = json::array();
  double sum = 0, mx = 0;
  for (const auto& c : cycles_) {
    planMs.push_back(c.planMs + c.formationMs);
    sum += c.planMs + c.formationMs;
    mx = std::max(mx, c.planMs + c.formationMs);
  }
  j["cycles"] = cycles_.size();
  j["planMs"] = planMs;
  j["meanPlanMs"] = cycles_.empty() ? 0.0 : sum / static_cast<double>(cycles_.size());
  j["maxPlanMs"] = mx;
  std::size_t failed = 0;
  for (const auto& r : robots_) failed += r.status == RobotStatus::Failed;
  j["failedRobots"] = failed;
  json genealogy = json::array();
  for (const auto& tm : teams_) {
    json tasks = json::array();
    for (std::size_t k = 0; k < tm.next && k < tm.queue.size(); ++k) tasks.push_back(tm.queue[k].task);
    genealogy.push_back({{"team", tm.id}, {"cycle", tm.cycle}, {"robots", tm.members}, {"executed", tasks}});
  }
  j["teams"] = genealogy;
  return j;
}

}  // namespace fleet::exec
