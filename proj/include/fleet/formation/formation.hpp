#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fleet/model/geometry.hpp"

namespace fleet::formation {

using Capacity = std::map<std::string, int>;

struct TeamSpec {
  Capacity capacity;                // beta per action
  Vec2 firstSite;                   // region of the first planned task
  double execSum = 0;               // sum of T_exec over the team's plan
  std::vector<std::string> plan;    // task ids in order
  std::vector<Vec2> sites;          // region centroid per plan entry
};

struct RobotSpec {
  std::string id;
  std::set<std::string> capabilities;
  double availableAt = 0;
  Vec2 availablePos;
  double speed = 1;
};

struct FormationProblem {
  std::vector<TeamSpec> teams;
  std::vector<RobotSpec> robots;
  std::map<std::string, double> alpha;  // action -> margin >= 1, missing means 1
  std::vector<std::pair<std::string, int>> locks;    // robot -> team
  std::vector<std::pair<std::string, int>> forbids;  // robot -/-> team

  double margin(const std::string& action) const;
  /// Upper bound floor(beta * alpha) on capable members.
  int upper(int team, const std::string& action) const;
  /// t_ik: availability plus straight-line travel to the team's first region.
  double arrival(std::size_t robot, std::size_t team) const;
};

enum class Status { Optimal, Incumbent, Fallback };
const char* to_string(Status s);

struct FormationResult {
  std::vector<int> teamOf;                 // per robot, -1 unassigned
  std::vector<std::vector<std::string>> members;  // per team, robot ids
  double objective = 0;                    // max_k J(k)
  Status status = Status::Optimal;
  long nodes = 0;
};

/// Objective and tie-break key of an assignment; infeasible assignments
/// return false.
bool evaluate(const FormationProblem& p, const std::vector<int>& teamOf, double& objective);
bool satisfies_bounds(const FormationProblem& p, const std::vector<int>& teamOf);

/// Exact min-max branch-and-bound; returns the incumbent with status
/// Incumbent when the node limit is reached. Throws Infeasible.
FormationResult solve_formation(const FormationProblem& p, long nodeLimit = 200000);

/// Fill teams in descending demand with the earliest capable robots.
FormationResult greedy_fallback(const FormationProblem& p);

/// Exhaustive reference over all (K+1)^N labelings.
FormationResult enumerate_formation(const FormationProblem& p);

struct Visit {
  std::string task;
  Vec2 site;
};

std::map<std::string, std::vector<Visit>> robot_plans(const FormationProblem& p, const FormationResult& r);

}  // namespace fleet::formation
