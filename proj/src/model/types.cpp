#include "fleet/model/types.hpp"

#include <algorithm>
#include <stdexcept>

#include "fleet/errors.hpp"

namespace fleet::model {

const char* to_string(RobotStatus s) {
  switch (s) {
    case RobotStatus::Idle: return "idle";
    case RobotStatus::Navigating: return "navigating";
    case RobotStatus::Waiting: return "waiting";
    case RobotStatus::Executing: return "executing";
    case RobotStatus::Failed: return "failed";
  }
  return "?";
}

const char* to_string(SubtaskState s) {
  switch (s) {
    case SubtaskState::Undiscovered: return "undiscovered";
    case SubtaskState::Open: return "open";
    case SubtaskState::InProgress: return "inProgress";
    case SubtaskState::Done: return "done";
  }
  return "?";
}

const char* to_string(TaskClass c) {
  switch (c) {
    case TaskClass::StaticKnown: return "staticKnown";
    case TaskClass::StaticUnknown: return "staticUnknown";
    case TaskClass::DynamicKnown: return "dynamicKnown";
  }
  return "?";
}

const char* to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Unassigned: return "unassigned";
    case TaskStatus::Assigned: return "assigned";
    case TaskStatus::Executing: return "executing";
    case TaskStatus::Done: return "done";
    case TaskStatus::Cancelled: return "cancelled";
  }
  return "?";
}

const char* to_string(MissionStatus s) {
  switch (s) {
    case MissionStatus::Active: return "active";
    case MissionStatus::Satisfied: return "satisfied";
    case MissionStatus::Cancelled: return "cancelled";
  }
  return "?";
}

TaskClass task_class_from_string(const std::string& s) {
  if (s == "staticKnown") return TaskClass::StaticKnown;
  if (s == "staticUnknown") return TaskClass::StaticUnknown;
  if (s == "dynamicKnown") return TaskClass::DynamicKnown;
  throw ScenarioInvalid("unknown task class '" + s + "'");
}

const char* to_string(RequestKind k) {
  switch (k) {
    case RequestKind::NewMission: return "newMission";
    case RequestKind::Cancel: return "cancel";
    case RequestKind::Reprioritize: return "reprioritize";
    case RequestKind::Reassign: return "reassign";
    case RequestKind::Resolve: return "resolve";
  }
  return "?";
}

RequestKind request_kind_from_string(const std::string& s) {
  if (s == "newMission" || s == "k1") return RequestKind::NewMission;
  if (s == "cancel" || s == "k2") return RequestKind::Cancel;
  if (s == "reprioritize" || s == "k3") return RequestKind::Reprioritize;
  if (s == "reassign" || s == "k4") return RequestKind::Reassign;
  if (s == "resolve") return RequestKind::Resolve;
  throw TraceInvalid("unknown request kind '" + s + "'");
}

double Task::base_duration(const std::string& action) const {
  auto it = eta.find(action);
  if (it == eta.end()) throw ScenarioInvalid("task " + id + " has no duration for action " + action);
  return it->second;
}

std::map<std::string, int> Task::requirements() const {
  std::map<std::string, int> req;
  for (const Subtask& s : subtasks) {
    // hidden subtasks expose their action but not their staffing
    int n = s.state == SubtaskState::Undiscovered ? 1 : s.minRobots;
    int& slot = req[s.action];
    slot = std::max(slot, n);
  }
  return req;
}

std::size_t Task::known_count() const {
  return static_cast<std::size_t>(std::count_if(subtasks.begin(), subtasks.end(), [](const Subtask& s) {
    return s.state != SubtaskState::Undiscovered;
  }));
}

std::vector<std::string> Mission::tasks() const {
  if (automaton) return automaton->alphabet();
  if (formula) {
    auto a = formula->atoms();
    return {a.begin(), a.end()};
  }
  return {};
}

void LocalPlan::append(PlanStep s) {
  if (!steps_.empty() && !(s.t > steps_.back().t)) throw std::invalid_argument("plan times must increase");
  steps_.push_back(std::move(s));
}

bool LocalPlan::monotone() const {
  for (std::size_t i = 1; i < steps_.size(); ++i)
    if (!(steps_[i].t > steps_[i - 1].t)) return false;
  return true;
}

}  // namespace fleet::model
