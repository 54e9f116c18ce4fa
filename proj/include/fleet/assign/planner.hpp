#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fleet/logic/automaton.hpp"
#include "fleet/model/geometry.hpp"

namespace fleet::assign {

using Capacity = std::map<std::string, int>;  // action -> beta

/// Mission as seen by one planning cycle.
struct MissionInput {
  std::string id;
  const logic::TaskAutomaton* automaton = nullptr;
  logic::ReachableSet reach;  // after completed and executing tasks
  double weight = 1;
  double deadline = 1e300;
};

/// Unassigned task offered to the search.
struct TaskInput {
  std::string id;
  Vec2 site;            // region centroid
  Capacity need;        // max n_j per action
  double execTime = 0;  // T_exec estimate
};

/// Task already executing: its robots are busy and its end is predicted.
struct FrozenInput {
  std::string id;
  double end = 0;
};

struct RobotInput {
  std::string id;
  std::vector<std::string> capabilities;
  double speed = 1;
  double availableAt = 0;
  Vec2 availablePos;
};

struct SearchConfig {
  std::optional<int> horizon;  // nullopt: unbounded
  int batch = 1;               // P
  double eta1 = 0.01;
  double eta2 = 1.0;
  double lambdaD = 10;
  long maxExpansions = 200000;
  double wallBudgetSeconds = 60;
  bool dominancePruning = true;
  bool boundPruning = true;
  bool checkFrontier = false;  // assert the non-domination invariant after merges
};

struct PlanningProblem {
  std::vector<MissionInput> missions;
  std::vector<TaskInput> tasks;
  std::vector<FrozenInput> frozen;
  std::vector<RobotInput> robots;
  double navSpeed = 0;  // 0: slowest robot speed
  double now = 0;
};

struct PlannedTask {
  std::string task;
  double start = 0;
  double end = 0;
};

struct TeamPlan {
  std::vector<PlannedTask> tasks;
  Capacity capacity;
  double endTime = 0;
  double cost = 0;
};

struct AssignmentResult {
  bool found = false;
  bool complete = false;  // every mission reaches acceptance
  std::vector<TeamPlan> plans;
  double predictedMakespan = 0;
  double value = 0;  // chi of the selected node
  long expanded = 0;
  long generated = 0;
  long pruned = 0;
  bool budgetHit = false;
  /// Global order in which tasks were appended along the selected branch.
  std::vector<std::string> order;

  std::size_t team_count() const { return plans.size(); }
};

/// chi = max T + eta1 * sum C + eta2 * sum w * psi.
double node_value(const std::vector<double>& teamEnd, const std::vector<double>& teamCost,
                  const std::vector<int>& psiMin, const std::vector<double>& weights, double eta1, double eta2);

/// Summed team capacities fit the number of capable robots per action.
bool capacity_feasible(const std::vector<Capacity>& teams, const std::vector<RobotInput>& robots);

/// Element-wise Pareto dominance over equal-length profiles.
bool dominates(const std::vector<double>& a, const std::vector<double>& b);

/// Best-first branch-and-bound over joint task decomposition and team
/// assignment. Deterministic for fixed inputs.
class Planner {
 public:
  Planner(PlanningProblem problem, SearchConfig config);
  ~Planner();
  Planner(const Planner&) = delete;
  Planner& operator=(const Planner&) = delete;

  AssignmentResult run();

  // Introspection on the root node, used by tests and the executor.
  std::vector<std::string> root_candidates() const;
  double root_value() const;
  /// Profile [T_1..T_K, C_1..C_K, psi_1..psi_M] of the node reached by
  /// applying (task, team) appends from the root; team == -1 opens a team.
  std::vector<double> profile_after(const std::vector<std::pair<std::string, int>>& appends) const;
  double value_after(const std::vector<std::pair<std::string, int>>& appends) const;
  /// Throws InvalidCandidate when a task is not a candidate at that point.
  std::vector<std::string> candidates_after(const std::vector<std::pair<std::string, int>>& appends) const;
  bool feasible_after(const std::vector<std::pair<std::string, int>>& appends) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

AssignmentResult plan_horizon(const PlanningProblem& problem, const SearchConfig& config);

/// Exhaustive reference over every candidate-consistent task order and every
/// team partition. Throws TooLarge above six tasks and Infeasible when no
/// capacity-feasible complete plan exists.
AssignmentResult brute_force_assign(const PlanningProblem& problem, const SearchConfig& config);

}  // namespace fleet::assign
