#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleet/exec/world.hpp"
#include "fleet/service/protocol.hpp"

namespace fleet::service {

/// Latest published view of the world. The simulation thread publishes
/// after each tick; readers never touch the world itself.
class Board {
 public:
  void publish(const exec::World& w);
  std::shared_ptr<const nlohmann::json> snapshot() const;
  /// Events with seq >= since, in order.
  std::vector<nlohmann::json> events_since(long since) const;
  long version() const;
  /// Blocks until the version moves past `seen` or the timeout expires.
  long wait_for(long seen, std::chrono::milliseconds timeout) const;
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::shared_ptr<const nlohmann::json> snap_;
  std::vector<nlohmann::json> events_;
  long version_ = 0;
  bool closed_ = false;
};

struct RunOptions {
  double until = 600;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> failureRho;
  std::optional<double> alpha;  // uniform redundancy margin for every action
  std::optional<int> horizon;   // 0: unbounded
  double pace = 0;         // simulated seconds per wall second; 0 runs flat out
  bool stopWhenSettled = true;
  std::string outDir;      // empty: nothing written
};

struct RunResult {
  nlohmann::json summary;
  std::vector<RequestOutcome> outcomes;
  std::string events;      // events.jsonl contents
  std::size_t cycles = 0;
  double endTime = 0;
};

/// One simulated run: a world plus its request desk.
class Session {
 public:
  Session(model::Scenario scenario, std::vector<RequestEnvelope> trace, const RunOptions& opt);

  exec::World& world() { return *world_; }
  const exec::World& world() const { return *world_; }
  RequestDesk& desk() { return desk_; }
  const RequestDesk& desk() const { return desk_; }

  /// Requests, triggers, planning and one dt of motion.
  void tick();
  bool finished() const;
  RunResult result() const;
  void write_outputs(const std::string& dir) const;

 private:
  RunOptions opt_;
  std::unique_ptr<exec::World> world_;
  RequestDesk desk_;
};

std::string events_jsonl(const exec::World& w);
std::string metrics_csv(const exec::World& w);

/// Ticks the session until it finishes, publishing to `board` if given.
RunResult drive(Session& s, const RunOptions& opt, Board* board = nullptr);

/// Headless run. With a board, every tick is published.
RunResult run_scenario(model::Scenario scenario, std::vector<RequestEnvelope> trace, const RunOptions& opt,
                       Board* board = nullptr);
RunResult run_scenario(const std::string& scenarioPath, const std::string& tracePath, const RunOptions& opt);

}  // namespace fleet::service
