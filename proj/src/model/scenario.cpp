#include "fleet/model/scenario.hpp"

#include <fstream>
#include <set>

#include "fleet/errors.hpp"
#include "fleet/logic/parser.hpp"

namespace fleet::model {

using nlohmann::json;

namespace {

Vec2 point(const json& j) {
  if (!j.is_array() || j.size() < 2) throw ScenarioInvalid("expected [x, y], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

}  // namespace

Mission make_mission(std::string id, std::string formula, double release, double deadline, double weight) {
  Mission m;
  m.id = std::move(id);
  m.formulaText = std::move(formula);
  try {
    m.formula = logic::parse_formula(m.formulaText);
  } catch (const SyntaxError& e) {
    throw MalformedFormula("mission " + m.id + ": " + e.what());
  } catch (const NotCoSafe& e) {
    throw MalformedFormula("mission " + m.id + ": operator " + std::string(e.what()) + " is not co-safe");
  }
  auto a = std::make_shared<logic::TaskAutomaton>(logic::build_automaton(*m.formula));
  if (a->is_empty()) throw MalformedFormula("mission " + m.id + ": formula is unsatisfiable");
  m.automaton = std::move(a);
  m.release = release;
  m.deadline = deadline;
  m.weight = weight;
  if (!(weight > 0)) throw MalformedFormula("mission " + m.id + ": weight must be positive");
  return m;
}

Robot robot_from_json(const json& j, const Params& p) {
  Robot r;
  r.id = j.at("id").get<std::string>();
  r.type = j.value("type", std::string{});
  for (const auto& c : j.at("capabilities")) r.capabilities.insert(c.get<std::string>());
  r.maxSpeed = j.value("maxSpeed", 1.0);
  if (j.contains("curvature") && !j["curvature"].is_null()) r.curvatureLimit = j["curvature"].get<double>();
  r.position = point(j.at("start"));
  r.heading = j.value("heading", 0.0);
  r.availablePos = r.position;
  auto it = p.perceptionByType.find(r.type);
  r.perceptionRadius = j.value("perception", it != p.perceptionByType.end() ? it->second : p.perceptionRadius);
  if (!(r.maxSpeed > 0)) throw ScenarioInvalid("robot " + r.id + ": maxSpeed must be positive");
  if (r.curvatureLimit && !(*r.curvatureLimit > 0)) throw ScenarioInvalid("robot " + r.id + ": curvature must be positive");
  if (r.capabilities.empty()) throw ScenarioInvalid("robot " + r.id + ": no capabilities");
  return r;
}

Task task_from_json(const json& j) {
  Task t;
  t.id = j.at("id").get<std::string>();
  t.cls = task_class_from_string(j.value("class", std::string("staticKnown")));
  std::vector<Vec2> verts;
  for (const auto& v : j.at("region")) verts.push_back(point(v));
  t.region = Polygon(std::move(verts));
  int idx = 0;
  for (const auto& s : j.at("subtasks")) {
    Subtask st;
    st.id = s.contains("id") ? s["id"].get<std::string>() : t.id + ".s" + std::to_string(idx);
    st.minRobots = s.value("n", 1);
    st.action = s.at("action").get<std::string>();
    st.location = point(s.at("loc"));
    st.hidden = s.value("hidden", false);
    if (s.contains("vel") && !s["vel"].is_null()) st.velocity = point(s["vel"]);
    st.state = st.hidden ? SubtaskState::Undiscovered : SubtaskState::Open;
    t.subtasks.push_back(std::move(st));
    ++idx;
  }
  for (const auto& [a, v] : j.at("eta").items()) t.eta[a] = v.get<double>();
  t.satCap = j.value("satCap", 1.0);
  return t;
}

Mission mission_from_json(const json& j) {
  double deadline = kInf;
  if (j.contains("deadline") && !j["deadline"].is_null()) deadline = j["deadline"].get<double>();
  return make_mission(j.at("id").get<std::string>(), j.at("formula").get<std::string>(), j.value("release", 0.0),
                      deadline, j.value("weight", 1.0));
}

Params params_from_json(const json& j) {
  Params p;
  if (j.is_null()) return p;
  if (j.contains("H")) {
    const auto& h = j["H"];
    if (h.is_null() || (h.is_string() && h.get<std::string>() == "inf") || (h.is_number() && h.get<int>() <= 0))
      p.H.reset();
    else
      p.H = h.get<int>();
  }
  if (j.contains("alpha"))
    for (const auto& [a, v] : j["alpha"].items()) p.alpha[a] = v.get<double>();
  p.alphaUncertain = j.value("alphaUncertain", p.alphaUncertain);
  p.eta1 = j.value("eta1", p.eta1);
  p.eta2 = j.value("eta2", p.eta2);
  p.lambdaD = j.value("lambdaD", p.lambdaD);
  p.P = j.value("P", p.P);
  p.seed = j.value("seed", p.seed);
  p.dt = j.value("dt", p.dt);
  p.failureRho = j.value("failureRho", p.failureRho);
  if (j.contains("commDelayMs")) p.commDelayMs = {j["commDelayMs"].at(0).get<double>(), j["commDelayMs"].at(1).get<double>()};
  p.captureRadius = j.value("captureRadius", p.captureRadius);
  if (j.contains("perception")) {
    if (j["perception"].is_number()) p.perceptionRadius = j["perception"].get<double>();
    else
      for (const auto& [t, v] : j["perception"].items()) p.perceptionByType[t] = v.get<double>();
  }
  p.headings = j.value("headings", p.headings);
  p.maxExpansions = j.value("maxExpansions", p.maxExpansions);
  p.planBudgetSeconds = j.value("planBudgetSeconds", p.planBudgetSeconds);
  p.formationNodeLimit = j.value("formationNodeLimit", p.formationNodeLimit);
  if (p.P < 1) throw ScenarioInvalid("P must be at least 1");
  if (!(p.dt > 0)) throw ScenarioInvalid("dt must be positive");
  if (p.failureRho < 0 || p.failureRho > 1) throw ScenarioInvalid("failureRho must lie in [0, 1]");
  for (const auto& [a, v] : p.alpha)
    if (v < 1) throw ScenarioInvalid("alpha for " + a + " must be >= 1");
  return p;
}

void validate_task(const Task& t) {
  if (t.region.vertices().size() < 3 || !t.region.is_convex())
    throw ScenarioInvalid("task " + t.id + ": region must be a convex polygon");
  if (t.subtasks.empty() && t.cls != TaskClass::StaticUnknown) throw ScenarioInvalid("task " + t.id + ": no subtasks");
  if (t.satCap < 1) throw ScenarioInvalid("task " + t.id + ": satCap must be >= 1");
  std::set<std::string> ids;
  for (const Subtask& s : t.subtasks) {
    if (s.minRobots < 1) throw ScenarioInvalid("subtask " + s.id + ": n must be >= 1");
    if (!ids.insert(s.id).second) throw ScenarioInvalid("duplicate subtask id " + s.id);
    if (!t.region.contains(s.location, 1e-6)) throw ScenarioInvalid("subtask " + s.id + " lies outside its region");
    if (!t.eta.count(s.action)) throw ScenarioInvalid("task " + t.id + ": no eta for action " + s.action);
    if (t.cls == TaskClass::DynamicKnown && !s.velocity)
      throw ScenarioInvalid("subtask " + s.id + ": dynamic subtasks need a velocity");
    if (s.hidden && t.cls != TaskClass::StaticUnknown)
      throw ScenarioInvalid("subtask " + s.id + ": only staticUnknown tasks may hide subtasks");
  }
  for (const auto& [a, v] : t.eta)
    if (!(v > 0)) throw ScenarioInvalid("task " + t.id + ": eta must be positive");
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  try {
    sc.params = params_from_json(j.value("params", json::object()));
    std::set<std::string> ids;
    for (const auto& r : j.value("robots", json::array())) {
      sc.robots.push_back(robot_from_json(r, sc.params));
      if (!ids.insert(sc.robots.back().id).second) throw ScenarioInvalid("duplicate robot id " + sc.robots.back().id);
    }
    ids.clear();
    for (const auto& t : j.value("tasks", json::array())) {
      sc.tasks.push_back(task_from_json(t));
      validate_task(sc.tasks.back());
      if (!ids.insert(sc.tasks.back().id).second) throw ScenarioInvalid("duplicate task id " + sc.tasks.back().id);
    }
    std::set<std::string> mids;
    for (const auto& m : j.value("missions", json::array())) {
      sc.missions.push_back(mission_from_json(m));
      const Mission& ms = sc.missions.back();
      if (!mids.insert(ms.id).second) throw ScenarioInvalid("duplicate mission id " + ms.id);
      for (const auto& sym : ms.tasks())
        if (!ids.count(sym)) throw ScenarioInvalid("mission " + ms.id + " references unknown task " + sym);
    }
  } catch (const MalformedFormula& e) {
    throw ScenarioInvalid(e.what());
  } catch (const json::exception& e) {
    throw ScenarioInvalid(std::string("scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioInvalid(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

json to_json(const Task& t) {
  json j;
  j["id"] = t.id;
  j["class"] = to_string(t.cls);
  j["status"] = to_string(t.status);
  json reg = json::array();
  for (Vec2 v : t.region.vertices()) reg.push_back(point_json(v));
  j["region"] = reg;
  json subs = json::array();
  for (const Subtask& s : t.subtasks) {
    json sj{{"id", s.id}, {"n", s.minRobots}, {"action", s.action}, {"loc", point_json(s.location)},
            {"state", to_string(s.state)}};
    if (s.hidden) sj["hidden"] = true;
    if (s.velocity) sj["vel"] = point_json(*s.velocity);
    subs.push_back(sj);
  }
  j["subtasks"] = subs;
  j["eta"] = t.eta;
  j["satCap"] = t.satCap;
  return j;
}

json to_json(const Mission& m) {
  json j{{"id", m.id}, {"formula", m.formulaText}, {"release", m.release}, {"weight", m.weight},
         {"status", to_string(m.status)}};
  j["deadline"] = std::isinf(m.deadline) ? json(nullptr) : json(m.deadline);
  if (m.finishTime) j["finishTime"] = *m.finishTime;
  return j;
}

json to_json(const Robot& r) {
  json j{{"id", r.id}, {"type", r.type}, {"capabilities", r.capabilities}, {"maxSpeed", r.maxSpeed},
         {"start", point_json(r.position)}, {"status", to_string(r.status)}, {"heading", r.heading}};
  if (r.curvatureLimit) j["curvature"] = *r.curvatureLimit;
  return j;
}

}  // namespace fleet::model
