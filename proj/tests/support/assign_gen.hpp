#pragma once

#include <deque>
#include <random>
#include <string>
#include <vector>

#include "fleet/assign/planner.hpp"
#include "fleet/logic/automaton.hpp"
#include "fleet/logic/parser.hpp"
#include "formula_gen.hpp"

namespace fleet::gen {

/// Random planning instance. Owns the automata the problem points at.
struct AssignInstance {
  std::deque<logic::TaskAutomaton> automata;
  std::vector<logic::Formula> formulas;
  assign::PlanningProblem problem;
};

inline logic::Formula mission_formula(std::mt19937_64& rng, const std::vector<std::string>& syms) {
  using logic::Formula;
  std::uniform_int_distribution<int> kind(0, 6);
  auto a = [&](std::size_t i) { return Formula::atom(syms[i % syms.size()]); };
  switch (syms.size() == 1 ? 0 : kind(rng)) {
    case 0: {
      Formula f = Formula::eventually(a(0));
      for (std::size_t i = 1; i < syms.size(); ++i) f = Formula::conj(f, Formula::eventually(a(i)));
      return f;
    }
    case 1: {
      Formula f = Formula::eventually(a(syms.size() - 1));
      for (std::size_t i = syms.size() - 1; i-- > 0;) f = Formula::eventually(Formula::conj(a(i), f));
      return f;
    }
    case 2: {
      Formula f = Formula::eventually(Formula::conj(a(0), Formula::eventually(a(1))));
      for (std::size_t i = 2; i < syms.size(); ++i) f = Formula::conj(f, Formula::eventually(a(i)));
      return f;
    }
    case 3: {
      Formula f = Formula::until(Formula::not_atom(syms[0]), a(1));
      for (std::size_t i = 0; i < syms.size(); ++i) f = Formula::conj(f, Formula::eventually(a(i)));
      return f;
    }
    case 4: {
      Formula f = Formula::disj(Formula::eventually(a(0)), Formula::eventually(a(1)));
      for (std::size_t i = 2; i < syms.size(); ++i) f = Formula::conj(f, Formula::eventually(a(i)));
      return f;
    }
    case 5: {
      Formula f = Formula::eventually(Formula::conj(a(0), Formula::eventually(a(1))));
      Formula g = Formula::until(Formula::not_atom(syms[0]), a(1));
      for (std::size_t i = 2; i < syms.size(); ++i) g = Formula::conj(g, Formula::eventually(a(i)));
      return Formula::conj(f, g);
    }
    default:
      return Formula::conj(random_formula(rng, syms, 2), Formula::eventually(a(0)));
  }
}

/// ≤maxTasks tasks, ≤maxRobots robots, ≤maxMissions missions over two actions.
inline AssignInstance random_instance(std::uint64_t seed, int maxTasks = 5, int maxRobots = 4, int maxMissions = 2) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> xy(0, 10), ex(1, 10);
  AssignInstance inst;
  auto& pb = inst.problem;
  const std::vector<std::string> actions{"grasp", "deliver"};

  int R = uni(1, maxRobots);
  for (int i = 0; i < R; ++i) {
    assign::RobotInput r;
    r.id = "r" + std::to_string(i);
    int caps = uni(1, 3);
    if (caps & 1) r.capabilities.push_back("grasp");
    if (caps & 2) r.capabilities.push_back("deliver");
    r.speed = std::uniform_real_distribution<double>(1, 3)(rng);
    r.availablePos = {xy(rng), xy(rng)};
    pb.robots.push_back(r);
  }
  int T = uni(1, maxTasks);
  for (int t = 0; t < T; ++t) {
    assign::TaskInput task;
    task.id = "w" + std::to_string(t + 1);
    task.site = {xy(rng), xy(rng)};
    task.execTime = ex(rng);
    task.need[actions[static_cast<std::size_t>(uni(0, 1))]] = uni(1, 2);
    if (uni(0, 3) == 0) task.need[actions[static_cast<std::size_t>(uni(0, 1))]] = 1;
    pb.tasks.push_back(task);
  }
  int Mn = std::min(uni(1, maxMissions), T);
  // split tasks across missions, each mission gets at least one
  std::vector<std::vector<std::string>> split(static_cast<std::size_t>(Mn));
  for (int t = 0; t < T; ++t)
    split[static_cast<std::size_t>(t < Mn ? t : uni(0, Mn - 1))].push_back(pb.tasks[static_cast<std::size_t>(t)].id);
  for (int m = 0; m < Mn; ++m) {
    auto& syms = split[static_cast<std::size_t>(m)];
    std::shuffle(syms.begin(), syms.end(), rng);
    logic::Formula f = mission_formula(rng, syms);
    std::vector<std::string> extra(syms.begin(), syms.end());
    logic::TaskAutomaton A = logic::build_automaton(f, extra);
    if (A.is_empty()) {
      f = logic::Formula::eventually(logic::Formula::atom(syms[0]));
      for (std::size_t i = 1; i < syms.size(); ++i)
        f = logic::Formula::conj(f, logic::Formula::eventually(logic::Formula::atom(syms[i])));
      A = logic::build_automaton(f, extra);
    }
    inst.automata.push_back(std::move(A));
    inst.formulas.push_back(f);
    assign::MissionInput mi;
    mi.id = "m" + std::to_string(m + 1);
    mi.automaton = &inst.automata.back();
    mi.reach = inst.automata.back().initial();
    mi.weight = uni(1, 3);
    pb.missions.push_back(mi);
  }
  return inst;
}

}  // namespace fleet::gen
