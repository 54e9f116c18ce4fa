#include "fleet/service/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "fleet/errors.hpp"
#include "fleet/model/scenario.hpp"

namespace fleet::service {

using nlohmann::json;

// ---------------------------------------------------------------- board

void Board::publish(const exec::World& w) {
  auto snap = std::make_shared<const json>(w.snapshot());
  std::lock_guard lock(mu_);
  for (std::size_t i = events_.size(); i < w.events().size(); ++i) events_.push_back(w.events()[i].to_json());
  snap_ = std::move(snap);
  ++version_;
  cv_.notify_all();
}

std::shared_ptr<const json> Board::snapshot() const {
  std::lock_guard lock(mu_);
  return snap_;
}

std::vector<json> Board::events_since(long since) const {
  std::lock_guard lock(mu_);
  std::size_t from = static_cast<std::size_t>(std::max(0L, since));
  if (from >= events_.size()) return {};
  return {events_.begin() + static_cast<long>(from), events_.end()};
}

long Board::version() const {
  std::lock_guard lock(mu_);
  return version_;
}

long Board::wait_for(long seen, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return version_ != seen || closed_; });
  return version_;
}

void Board::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

bool Board::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

// ---------------------------------------------------------------- session

namespace {

model::Scenario with_overrides(model::Scenario sc, const RunOptions& opt) {
  if (opt.seed) sc.params.seed = *opt.seed;
  if (opt.dt) {
    if (!(*opt.dt > 0)) throw ScenarioInvalid("dt must be positive");
    sc.params.dt = *opt.dt;
  }
  if (opt.failureRho) {
    if (*opt.failureRho < 0 || *opt.failureRho > 1) throw ScenarioInvalid("failure probability must lie in [0, 1]");
    sc.params.failureRho = *opt.failureRho;
  }
  if (opt.horizon) {
    if (*opt.horizon < 0) throw ScenarioInvalid("horizon must be >= 0");
    sc.params.H = *opt.horizon == 0 ? std::nullopt : std::optional<int>(*opt.horizon);
  }
  if (opt.alpha) {
    if (!(*opt.alpha >= 1)) throw ScenarioInvalid("alpha must be >= 1");
    sc.params.alphaUncertain = *opt.alpha;
    for (const auto& r : sc.robots)
      for (const auto& a : r.capabilities) sc.params.alpha[a] = *opt.alpha;
  }
  return sc;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
}

std::string jsonl(const std::vector<json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

}  // namespace

Session::Session(model::Scenario scenario, std::vector<RequestEnvelope> trace, const RunOptions& opt)
    : opt_(opt), world_(std::make_unique<exec::World>(with_overrides(std::move(scenario), opt))), desk_(std::move(trace)) {}

void Session::tick() {
  desk_.drain(*world_);
  world_->advance();
}

bool Session::finished() const {
  if (world_->now() >= opt_.until - 1e-9) return true;
  return opt_.stopWhenSettled && world_->settled() && desk_.idle();
}

RunResult Session::result() const {
  RunResult r;
  r.summary = world_->summary();
  r.outcomes = desk_.outcomes();
  r.events = events_jsonl(*world_);
  r.cycles = world_->cycles().size();
  r.endTime = world_->now();
  return r;
}

std::string events_jsonl(const exec::World& w) {
  std::string s;
  for (const auto& e : w.events()) s += e.to_json().dump() + "\n";
  return s;
}

std::string metrics_csv(const exec::World& w) {
  std::ostringstream out;
  out << "t,navCount,waitCount,execCount,assignedTasks,unassignedTasks\n";
  for (const auto& row : w.metrics()) {
    out << row[0];
    for (std::size_t i = 1; i < row.size(); ++i) out << ',' << static_cast<long>(row[i]);
    out << '\n';
  }
  return out.str();
}

void Session::write_outputs(const std::string& dir) const {
  std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  write_file(d / "events.jsonl", events_jsonl(*world_));
  write_file(d / "planning.jsonl", jsonl(world_->planning_log()));
  write_file(d / "formation.jsonl", jsonl(world_->formation_log()));
  write_file(d / "coordination.jsonl", jsonl(world_->coordination_log()));
  std::vector<json> outcomes;
  for (const auto& o : desk_.outcomes()) outcomes.push_back(o.to_json());
  write_file(d / "outcomes.jsonl", jsonl(outcomes));
  write_file(d / "metrics.csv", metrics_csv(*world_));
  write_file(d / "summary.json", world_->summary().dump(2) + "\n");
}

RunResult run_scenario(model::Scenario scenario, std::vector<RequestEnvelope> trace, const RunOptions& opt, Board* board) {
  Session s(std::move(scenario), std::move(trace), opt);
  return drive(s, opt, board);
}

RunResult drive(Session& s, const RunOptions& opt, Board* board) {
  if (board) board->publish(s.world());
  auto wallStart = std::chrono::steady_clock::now();
  while (!s.finished()) {
    s.tick();
    if (board) board->publish(s.world());
    if (opt.pace > 0) {
      auto due = wallStart + std::chrono::duration<double>(s.world().now() / opt.pace);
      std::this_thread::sleep_until(due);
    }
  }
  if (!opt.outDir.empty()) s.write_outputs(opt.outDir);
  return s.result();
}

RunResult run_scenario(const std::string& scenarioPath, const std::string& tracePath, const RunOptions& opt) {
  auto sc = model::load_scenario(scenarioPath);
  std::vector<RequestEnvelope> trace;
  if (!tracePath.empty()) trace = load_trace(tracePath);
  return run_scenario(std::move(sc), std::move(trace), opt);
}

}  // namespace fleet::service
