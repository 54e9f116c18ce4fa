#pragma once

#include <deque>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleet/exec/world.hpp"
#include "fleet/model/types.hpp"

namespace fleet::service {

inline constexpr int kWireVersion = 1;

enum class Origin { Trace, Live };

struct RequestEnvelope {
  std::string id;
  double issuedAt = 0;
  model::RequestKind kind = model::RequestKind::NewMission;
  nlohmann::json payload = nlohmann::json::object();
  Origin origin = Origin::Trace;
  long arrival = 0;  // submission order
};

enum class OutcomeStatus { Accepted, Rejected, Conflict };
const char* to_string(OutcomeStatus s);

struct RequestOutcome {
  std::string requestId;
  OutcomeStatus status = OutcomeStatus::Accepted;
  double at = 0;  // simulation time of the decision
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Throws TraceInvalid on a missing or unsupported `v`, unknown kind or
/// missing fields.
RequestEnvelope envelope_from_json(const nlohmann::json& j, Origin origin = Origin::Trace);
nlohmann::json to_json(const RequestEnvelope& e);

/// JSONL trace; blank lines and lines starting with '#' are skipped.
/// Throws TraceInvalid on out-of-order timestamps or duplicate ids.
std::vector<RequestEnvelope> parse_trace(std::istream& in);
std::vector<RequestEnvelope> load_trace(const std::string& path);

/// Payload decoding against the current world. Throws UnknownEntity,
/// MalformedFormula or ScenarioInvalid.
model::OperatorRequest decode(const RequestEnvelope& e, const exec::World& w);

/// A pair of requests that cannot both hold.
struct Conflict {
  std::string id;
  std::string earlier;  // request already in force
  std::string later;    // request held back
  std::string constraint;
  std::vector<std::string> missions;
  std::vector<std::string> robots;
  std::string action;
  int required = 0;
  int available = 0;

  nlohmann::json to_json() const;
};

/// Serialized request queue between operators and the world. Submissions
/// may come from any thread; drain runs on the simulation thread at tick
/// boundaries only.
class RequestDesk {
 public:
  explicit RequestDesk(std::vector<RequestEnvelope> trace = {});

  /// Live submission; the id is generated when absent and issuedAt is set
  /// to the current simulation time. Returns the request id.
  std::string submit(const nlohmann::json& body);
  void submit(RequestEnvelope env);

  /// Applies every request due at the world's clock.
  void drain(exec::World& w);

  /// No queued requests and no parked conflicts.
  bool idle() const;
  std::optional<double> next_due() const;
  std::vector<RequestOutcome> outcomes() const;
  std::optional<RequestOutcome> outcome(const std::string& id) const;
  std::vector<Conflict> open_conflicts() const;

 private:
  void handle(const RequestEnvelope& e, exec::World& w);
  void apply(const RequestEnvelope& e, const model::OperatorRequest& r, exec::World& w);
  void resolve(const RequestEnvelope& e, const model::OperatorRequest& r, exec::World& w);
  std::optional<Conflict> find_conflict(const RequestEnvelope& e, const model::OperatorRequest& r,
                                        const exec::World& w) const;
  void record(RequestOutcome o);
  void reject(const RequestEnvelope& e, exec::World& w, const std::string& reason, const std::string& detail);

  mutable std::mutex mu_;
  std::deque<RequestEnvelope> queue_;  // sorted by (issuedAt, arrival, id)
  std::set<std::string> seen_;
  long arrivals_ = 0;
  double clock_ = 0;

  // simulation-thread state
  std::map<std::string, RequestEnvelope> applied_;  // accepted requests by id
  std::map<std::string, RequestEnvelope> held_;     // parked, awaiting resolve
  std::map<std::string, std::string> urgentBy_;     // mission -> request that set a hard deadline
  std::vector<Conflict> conflicts_;
  int nextConflict_ = 1;

  std::vector<RequestOutcome> outcomes_;
};

}  // namespace fleet::service
