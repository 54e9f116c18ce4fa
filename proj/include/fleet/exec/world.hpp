#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleet/assign/planner.hpp"
#include "fleet/model/scenario.hpp"

namespace fleet::exec {

enum class TriggerKind { ProgressMajority, MissionChange, Infeasibility };
const char* to_string(TriggerKind k);

struct Trigger {
  TriggerKind kind = TriggerKind::MissionChange;
  double firedAt = 0;
  std::string detail;
};

struct EventRecord {
  long seq = 0;
  double t = 0;
  std::string kind;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

struct PlannedSlot {
  std::string task;
  double start = 0;  // predicted
  double end = 0;
};

struct TeamState {
  int id = 0;
  int cycle = 0;
  std::vector<std::string> members;
  std::vector<PlannedSlot> queue;
  std::size_t next = 0;  // first task not yet started
  assign::Capacity capacity;
  bool dissolved = false;
};

/// Request bookkeeping the protocol layer shares with the world.
struct Lock {
  std::string request;
  std::vector<std::string> robots;
  std::string mission;
};

struct CycleStats {
  int cycle = 0;
  double t = 0;
  double planMs = 0;
  double formationMs = 0;
  long expanded = 0;
  long pruned = 0;
  int teams = 0;
  double predictedMakespan = 0;
  bool failed = false;
};

/// Discrete-time simulation and receding-horizon online loop. The world is
/// the single writer of its state; callers drive it tick by tick.
class World {
 public:
  explicit World(model::Scenario scenario);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  double now() const { return clock_; }
  long tick() const { return tick_; }
  double dt() const { return params_.dt; }
  const model::Params& params() const { return params_; }

  /// Missions whose release time has passed become active.
  void release_due();
  std::vector<Trigger> check_triggers() const;
  /// Replanning cycle over the current pool; non-executing plans are
  /// replaced, executing tasks keep their robots.
  void replan(const std::vector<Trigger>& triggers);
  /// Advance motion, local coordination and task progress by one dt.
  void step();
  /// release_due + triggers + replan + step.
  void advance();
  /// Everything released is satisfied or cancelled and nothing is pending.
  bool settled() const;
  bool has_future_releases() const;

  // Mutations applied by the request layer at tick boundaries.
  void add_mission(model::Mission m, std::vector<model::Task> tasks, const std::string& request);
  void cancel_mission(const std::string& mission, const std::string& request);
  void reprioritize(const model::PriorityUpdate& u, const std::string& request);
  void lock_robots(const Lock& lock);
  /// Drops every lock installed by `request`.
  void unlock(const std::string& request);
  void flag_mission_change(const std::string& detail);
  void emit(const std::string& kind, nlohmann::json payload);
  void set_pending_conflicts(nlohmann::json conflicts);

  // Queries.
  const std::vector<model::Robot>& robots() const { return robots_; }
  const std::vector<model::Task>& tasks() const { return tasks_; }
  const std::vector<model::Mission>& missions() const { return missions_; }
  const std::vector<TeamState>& teams() const { return teams_; }
  const std::vector<Lock>& locks() const { return locks_; }
  const model::Robot* find_robot(const std::string& id) const;
  const model::Task* find_task(const std::string& id) const;
  const model::Mission* find_mission(const std::string& id) const;
  /// Task symbols completed per mission, in completion order.
  const std::vector<std::string>& word(const std::string& mission) const;
  const logic::ReachableSet& reach(const std::string& mission) const;
  bool task_executing(const std::string& task) const;
  /// Robots currently working on an executing task.
  std::set<std::string> busy_robots() const;
  /// (task, subtask) pairs being worked this tick and the robots working them.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> servicing() const;

  const std::vector<EventRecord>& events() const { return events_; }
  const std::vector<nlohmann::json>& planning_log() const { return planningLog_; }
  const std::vector<nlohmann::json>& formation_log() const { return formationLog_; }
  const std::vector<nlohmann::json>& coordination_log() const { return coordinationLog_; }
  const std::vector<CycleStats>& cycles() const { return cycles_; }
  const std::vector<std::vector<double>>& metrics() const { return metrics_; }

  nlohmann::json snapshot(std::size_t recentEvents = 50) const;
  nlohmann::json summary() const;

 private:
  struct Active;

  void start_ready_teams();
  bool try_start(TeamState& team);
  bool permitted(const std::string& task) const;
  bool advance_active(Active& a);
  void advance_route(Active& a, double t);
  void advance_sweep(Active& a, double t0, double t1);
  void advance_pursuit(Active& a);
  void insert_subtask(Active& a, std::size_t subtask);
  void reveal(Active& a, std::size_t robot, Vec2 p0, Vec2 p1);
  void finish_task(Active& a);
  void on_subtask_done(Active& a, std::size_t subtask);
  void sample_metrics();
  std::size_t task_index(const std::string& id) const;
  std::size_t robot_index(const std::string& id) const;
  std::vector<std::string> pool() const;
  std::vector<std::string> mission_pool_symbols(const model::Mission& m, const std::string& except) const;
  logic::ReachableSet reach_with_executing(std::size_t mission) const;
  double exec_estimate(const model::Task& t) const;
  std::map<std::string, double> margins() const;
  void coordination(const std::string& kind, int team, const std::string& task, nlohmann::json extra);

  model::Params params_;
  std::vector<model::Robot> robots_;
  std::vector<model::Task> tasks_;
  std::vector<model::Mission> missions_;
  std::vector<bool> released_;
  std::vector<logic::ReachableSet> reach_;
  std::vector<std::vector<std::string>> words_;
  std::vector<std::unique_ptr<logic::CompletionOracle>> oracles_;
  std::vector<TeamState> teams_;
  std::vector<std::unique_ptr<Active>> active_;
  std::vector<Lock> locks_;
  std::mt19937_64 rng_;

  double clock_ = 0;
  long tick_ = 0;
  int cycle_ = 0;
  int nextTeam_ = 0;
  double nextMetrics_ = 0;
  std::vector<Trigger> pending_;
  std::set<std::string> committed_;
  std::set<std::string> doneSinceCycle_;
  bool idleSinceCycle_ = false;
  nlohmann::json conflicts_ = nlohmann::json::array();

  std::vector<EventRecord> events_;
  std::vector<nlohmann::json> planningLog_, formationLog_, coordinationLog_;
  std::vector<CycleStats> cycles_;
  std::vector<std::vector<double>> metrics_;
  std::vector<std::string> noWord_;
};

}  // namespace fleet::exec
