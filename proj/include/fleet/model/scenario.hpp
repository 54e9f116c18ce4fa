#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fleet/model/types.hpp"

namespace fleet::model {

struct Params {
  std::optional<int> H = 6;  // nullopt: unbounded horizon
  std::map<std::string, double> alpha;  // per-action redundancy margin overrides
  double alphaUncertain = 1.5;          // default for unknown/dynamic task actions
  double eta1 = 0.01;
  double eta2 = 1.0;
  double lambdaD = 10;
  int P = 4;
  std::uint64_t seed = 1;
  double dt = 0.1;
  double failureRho = 0;
  std::pair<double, double> commDelayMs{0, 0};
  double captureRadius = 0.5;
  double perceptionRadius = 1.0;
  std::map<std::string, double> perceptionByType;
  int headings = 8;
  long maxExpansions = 200000;
  double planBudgetSeconds = 30;
  long formationNodeLimit = 200000;
  double speedProbe = 0;  // 0: fleet minimum speed for navigation estimates
};

struct Scenario {
  std::vector<Robot> robots;
  std::vector<Task> tasks;
  std::vector<Mission> missions;
  Params params;
};

/// Build a mission from its text fields, parsing and compiling the formula.
/// Throws MalformedFormula for unparsable or unsatisfiable formulas.
Mission make_mission(std::string id, std::string formula, double release, double deadline, double weight);

Robot robot_from_json(const nlohmann::json& j, const Params& p);
Task task_from_json(const nlohmann::json& j);
Mission mission_from_json(const nlohmann::json& j);
Params params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Task& t);
nlohmann::json to_json(const Mission& m);
nlohmann::json to_json(const Robot& r);

/// Parse and validate a scenario document. Throws ScenarioInvalid.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

/// Structural checks shared by scenario loading and new-mission requests.
void validate_task(const Task& t);

}  // namespace fleet::model
