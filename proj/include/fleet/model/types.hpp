#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleet/logic/automaton.hpp"
#include "fleet/logic/formula.hpp"
#include "fleet/model/geometry.hpp"

namespace fleet::model {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RobotStatus { Idle, Navigating, Waiting, Executing, Failed };
enum class SubtaskState { Undiscovered, Open, InProgress, Done };
enum class TaskClass { StaticKnown, StaticUnknown, DynamicKnown };
enum class TaskStatus { Unassigned, Assigned, Executing, Done, Cancelled };
enum class MissionStatus { Active, Satisfied, Cancelled };

const char* to_string(RobotStatus s);
const char* to_string(SubtaskState s);
const char* to_string(TaskClass c);
const char* to_string(TaskStatus s);
const char* to_string(MissionStatus s);
TaskClass task_class_from_string(const std::string& s);

struct Robot {
  std::string id;
  std::string type;
  std::set<std::string> capabilities;
  double maxSpeed = 1;
  std::optional<double> curvatureLimit;  // 1/m
  double perceptionRadius = 1;
  Vec2 position;
  double heading = 0;
  double availableAt = 0;
  Vec2 availablePos;
  RobotStatus status = RobotStatus::Idle;

  bool can(const std::string& action) const { return capabilities.count(action) > 0; }
  std::optional<double> turning_radius() const {
    if (!curvatureLimit) return std::nullopt;
    return 1.0 / *curvatureLimit;
  }
};

struct Subtask {
  std::string id;
  int minRobots = 1;
  std::string action;
  Vec2 location;
  std::optional<Vec2> velocity;  // dynamic class only
  bool hidden = false;
  SubtaskState state = SubtaskState::Open;
};

struct Task {
  std::string id;
  Polygon region;
  TaskClass cls = TaskClass::StaticKnown;
  std::vector<Subtask> subtasks;
  std::map<std::string, double> eta;  // action -> base seconds
  double satCap = 1;
  TaskStatus status = TaskStatus::Unassigned;

  double base_duration(const std::string& action) const;
  /// Largest n_j per action over all subtasks (hidden ones included).
  std::map<std::string, int> requirements() const;
  std::size_t known_count() const;
};

struct Mission {
  std::string id;
  std::string formulaText;
  std::optional<logic::Formula> formula;
  std::shared_ptr<const logic::TaskAutomaton> automaton;
  double release = 0;
  double deadline = kInf;
  double weight = 1;
  MissionStatus status = MissionStatus::Active;
  std::optional<double> finishTime;

  /// Task symbols referenced by the formula.
  std::vector<std::string> tasks() const;
};

/// Timed action sequence of one robot.
struct PlanStep {
  double t;
  Vec2 p;
  std::string action;
};

class LocalPlan {
 public:
  const std::vector<PlanStep>& steps() const noexcept { return steps_; }
  /// Appends a step; throws std::invalid_argument if time does not increase.
  void append(PlanStep s);
  bool monotone() const;

 private:
  std::vector<PlanStep> steps_;
};

enum class RequestKind { NewMission, Cancel, Reprioritize, Reassign, Resolve };

const char* to_string(RequestKind k);
RequestKind request_kind_from_string(const std::string& s);

struct PriorityUpdate {
  std::string mission;
  std::optional<double> deadline;
  std::optional<double> weight;
};

struct ReassignItem {
  std::vector<std::string> robots;
  std::string mission;
};

struct NewMissionPayload {
  Mission mission;
  std::vector<Task> tasks;
};

/// Operator request. Exactly one payload member is meaningful per kind.
struct OperatorRequest {
  std::string id;
  RequestKind kind = RequestKind::NewMission;
  double issuedAt = 0;
  std::optional<NewMissionPayload> newMission;
  std::vector<std::string> cancel;
  std::vector<PriorityUpdate> priorities;
  std::vector<ReassignItem> reassign;
  std::string resolveConflict;  // conflict id
  std::string resolveKeep;      // request id to keep
};

}  // namespace fleet::model
