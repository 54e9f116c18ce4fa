// fleetctl: headless runs, live serving and formula inspection.

#include <csignal>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fleet/errors.hpp"
#include "fleet/logic/automaton.hpp"
#include "fleet/logic/parser.hpp"
#include "fleet/model/scenario.hpp"
#include "fleet/service/protocol.hpp"
#include "fleet/service/runner.hpp"
#include "fleet/service/server.hpp"

using nlohmann::json;
using namespace fleet;

namespace {

volatile std::sig_atomic_t interrupted = 0;

void on_signal(int) { interrupted = 1; }

json automaton_json(const logic::TaskAutomaton& a) {
  json states = json::array();
  for (std::size_t q = 0; q < a.state_count(); ++q)
    states.push_back({{"id", q}, {"label", a.state_label(static_cast<int>(q))}, {"accepting", a.is_accepting(static_cast<int>(q))}});
  json edges = json::array();
  for (const auto& t : a.transitions()) {
    json g;
    if (t.guard.require) g["require"] = a.alphabet()[static_cast<std::size_t>(*t.guard.require)];
    json forbid = json::array();
    for (int s : t.guard.forbid) forbid.push_back(a.alphabet()[static_cast<std::size_t>(s)]);
    g["forbid"] = forbid;
    edges.push_back({{"from", t.from}, {"to", t.to}, {"guard", g}});
  }
  return {{"alphabet", a.alphabet()}, {"initial", a.initial()}, {"accepting", a.accepting()}, {"states", states},
          {"transitions", edges}};
}

std::string automaton_dot(const logic::TaskAutomaton& a) {
  std::ostringstream out;
  out << "digraph automaton {\n  rankdir=LR;\n";
  for (std::size_t q = 0; q < a.state_count(); ++q)
    out << "  q" << q << " [shape=" << (a.is_accepting(static_cast<int>(q)) ? "doublecircle" : "circle") << "];\n";
  for (int q : a.initial()) out << "  start" << q << " [shape=point];\n  start" << q << " -> q" << q << ";\n";
  for (const auto& t : a.transitions()) {
    std::string label;
    if (t.guard.require) label = a.alphabet()[static_cast<std::size_t>(*t.guard.require)];
    else {
      label = "*";
      for (int s : t.guard.forbid) label += " !" + a.alphabet()[static_cast<std::size_t>(s)];
    }
    out << "  q" << t.from << " -> q" << t.to << " [label=\"" << label << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleet coordination runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate a scenario with an optional request trace");
  std::string scenarioPath, tracePath, outDir, serveAddr;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, rho, alpha;
  std::optional<int> horizon;
  double until = 600, pace = -1, linger = 0;
  run->add_option("--scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--trace", tracePath, "request trace (JSONL)")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--until", until, "simulated seconds")->check(CLI::PositiveNumber);
  run->add_option("--dt", dt, "tick length in seconds")->check(CLI::PositiveNumber);
  run->add_option("--rho", rho, "per-robot failure probability at task start")->check(CLI::Range(0.0, 1.0));
  run->add_option("--horizon", horizon, "planning horizon, 0 for unbounded")->check(CLI::NonNegativeNumber);
  run->add_option("--alpha", alpha, "uniform redundancy margin for every action")->check(CLI::Range(1.0, 10.0));
  run->add_option("--out", outDir, "output directory")->required();
  run->add_option("--serve", serveAddr, "serve HTTP on host:port while running");
  run->add_option("--pace", pace, "simulated seconds per wall second (default 1 when serving, else unpaced)");
  run->add_option("--linger", linger, "keep serving this many wall seconds after the run");

  auto* aut = app.add_subcommand("automaton", "compile a formula and print its automaton");
  std::string formula, format = "json", word;
  aut->add_option("formula", formula, "formula text")->required();
  aut->add_option("--format", format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
  aut->add_option("--accepts", word, "comma-separated word to test");

  auto* val = app.add_subcommand("validate", "check a scenario and trace without running");
  val->add_option("--scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  val->add_option("--trace", tracePath, "request trace (JSONL)")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*aut) {
      auto a = logic::build_automaton(logic::parse_formula(formula));
      if (!word.empty()) {
        std::vector<std::string> letters;
        std::stringstream ss(word);
        for (std::string s; std::getline(ss, s, ',');) letters.push_back(s);
        bool ok = a.accepts(letters);
        std::cout << (ok ? "accepted" : "rejected") << "\n";
        return ok ? 0 : 1;
      }
      std::cout << (format == "dot" ? automaton_dot(a) : automaton_json(a).dump(2) + "\n");
      return 0;
    }
    if (*val) {
      auto sc = model::load_scenario(scenarioPath);
      std::size_t n = tracePath.empty() ? 0 : service::load_trace(tracePath).size();
      std::cout << "ok: " << sc.robots.size() << " robots, " << sc.tasks.size() << " tasks, " << sc.missions.size()
                << " missions, " << n << " requests\n";
      return 0;
    }

    service::RunOptions opt;
    opt.until = until;
    opt.seed = seed;
    opt.dt = dt;
    opt.failureRho = rho;
    opt.alpha = alpha;
    opt.horizon = horizon;
    opt.outDir = outDir;
    auto sc = model::load_scenario(scenarioPath);
    std::vector<service::RequestEnvelope> trace;
    if (!tracePath.empty()) trace = service::load_trace(tracePath);

    service::RunResult result;
    if (serveAddr.empty()) {
      opt.pace = pace > 0 ? pace : 0;
      result = service::run_scenario(std::move(sc), std::move(trace), opt);
    } else {
      opt.pace = pace >= 0 ? pace : 1.0;
      opt.stopWhenSettled = false;
      auto [host, port] = service::parse_address(serveAddr);
      service::Session session(std::move(sc), std::move(trace), opt);
      service::Board board;
      service::HttpServer server(session.desk(), board);
      int bound = server.start(host, port);
      if (bound < 0) {
        std::cerr << "fleetctl: cannot bind " << serveAddr << "\n";
        return 2;
      }
      std::cerr << "serving on http://" << host << ":" << bound << "\n";
      std::signal(SIGINT, on_signal);
      board.publish(session.world());
      auto wallStart = std::chrono::steady_clock::now();
      while (!session.finished() && !interrupted) {
        session.tick();
        board.publish(session.world());
        if (opt.pace > 0)
          std::this_thread::sleep_until(wallStart + std::chrono::duration<double>(session.world().now() / opt.pace));
      }
      session.write_outputs(outDir);
      result = session.result();
      auto lingerEnd = std::chrono::steady_clock::now() + std::chrono::duration<double>(linger);
      while (!interrupted && std::chrono::steady_clock::now() < lingerEnd)
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      board.close();
      server.stop();
    }
    const auto& s = result.summary;
    std::cout << "t=" << result.endTime << " cycles=" << result.cycles << " success=" << s["successRate"]
              << " meanResponse=" << s["meanResponse"] << " meanPlanMs=" << s["meanPlanMs"] << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "fleetctl: " << e.what() << "\n";
    return 2;
  }
}
