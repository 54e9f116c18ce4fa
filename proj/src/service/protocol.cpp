#include "fleet/service/protocol.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fleet/errors.hpp"
#include "fleet/model/scenario.hpp"

namespace fleet::service {

using nlohmann::json;
using model::MissionStatus;
using model::RequestKind;
using model::RobotStatus;
using model::TaskStatus;

namespace {

json as_list(const json& payload, const char* plural, const char* single) {
  if (payload.contains(plural)) return payload.at(plural);
  if (payload.contains(single)) return json::array({payload.at(single)});
  return json::array({payload});
}

bool active(const model::Mission* m) { return m && m->status == MissionStatus::Active; }

}  // namespace

const char* to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Accepted: return "accepted";
    case OutcomeStatus::Rejected: return "rejected";
    case OutcomeStatus::Conflict: return "conflict";
  }
  return "?";
}

json RequestOutcome::to_json() const {
  return {{"v", kWireVersion}, {"request", requestId}, {"status", to_string(status)}, {"t", at}, {"detail", detail}};
}

json Conflict::to_json() const {
  return {{"conflict", id},       {"constraint", constraint}, {"action", action},   {"required", required},
          {"available", available}, {"missions", missions},   {"robots", robots},   {"requests", {earlier, later}}};
}

// ---------------------------------------------------------------- wire format

RequestEnvelope envelope_from_json(const json& j, Origin origin) {
  if (!j.is_object()) throw TraceInvalid("request must be a JSON object");
  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kWireVersion)
    throw TraceInvalid("request needs \"v\": " + std::to_string(kWireVersion));
  RequestEnvelope e;
  e.origin = origin;
  try {
    if (j.contains("id")) e.id = j.at("id").get<std::string>();
    else if (origin == Origin::Trace) throw TraceInvalid("trace request without id");
    if (j.contains("issuedAt")) e.issuedAt = j.at("issuedAt").get<double>();
    else if (origin == Origin::Trace) throw TraceInvalid("request " + e.id + " without issuedAt");
    e.kind = model::request_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.value("payload", json::object());
  } catch (const json::exception& ex) {
    throw TraceInvalid(std::string("request: ") + ex.what());
  }
  if (!(e.issuedAt >= 0)) throw TraceInvalid("request " + e.id + ": issuedAt must be >= 0");
  return e;
}

json to_json(const RequestEnvelope& e) {
  return {{"v", kWireVersion},
          {"id", e.id},
          {"issuedAt", e.issuedAt},
          {"kind", model::to_string(e.kind)},
          {"payload", e.payload},
          {"origin", e.origin == Origin::Trace ? "trace" : "live"}};
}

std::vector<RequestEnvelope> parse_trace(std::istream& in) {
  std::vector<RequestEnvelope> out;
  std::set<std::string> ids;
  std::string line;
  long lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw TraceInvalid("line " + std::to_string(lineNo) + ": " + ex.what());
    }
    RequestEnvelope e = envelope_from_json(j, Origin::Trace);
    if (!ids.insert(e.id).second) throw TraceInvalid("line " + std::to_string(lineNo) + ": duplicate id " + e.id);
    if (!out.empty() && e.issuedAt < out.back().issuedAt)
      throw TraceInvalid("line " + std::to_string(lineNo) + ": issuedAt goes backwards");
    e.arrival = static_cast<long>(out.size());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<RequestEnvelope> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceInvalid("cannot open trace " + path);
  return parse_trace(in);
}

model::OperatorRequest decode(const RequestEnvelope& e, const exec::World& w) {
  model::OperatorRequest r;
  r.id = e.id;
  r.kind = e.kind;
  r.issuedAt = e.issuedAt;
  const json& p = e.payload;
  try {
    switch (e.kind) {
      case RequestKind::NewMission: {
        model::NewMissionPayload nm;
        std::set<std::string> fresh;
        for (const auto& tj : p.value("tasks", json::array())) {
          model::Task t = model::task_from_json(tj);
          model::validate_task(t);
          if (w.find_task(t.id) || !fresh.insert(t.id).second) throw ScenarioInvalid("duplicate task id " + t.id);
          nm.tasks.push_back(std::move(t));
        }
        nm.mission = model::mission_from_json(p.at("mission"));
        if (w.find_mission(nm.mission.id)) throw ScenarioInvalid("duplicate mission id " + nm.mission.id);
        for (const auto& sym : nm.mission.tasks())
          if (!fresh.count(sym) && !w.find_task(sym)) throw UnknownEntity("task " + sym);
        r.newMission = std::move(nm);
        break;
      }
      case RequestKind::Cancel:
        for (const auto& m : as_list(p, "missions", "mission")) {
          auto id = m.get<std::string>();
          if (!w.find_mission(id)) throw UnknownEntity("mission " + id);
          r.cancel.push_back(id);
        }
        break;
      case RequestKind::Reprioritize:
        for (const auto& u : as_list(p, "updates", "update")) {
          model::PriorityUpdate pu;
          pu.mission = u.at("mission").get<std::string>();
          if (!w.find_mission(pu.mission)) throw UnknownEntity("mission " + pu.mission);
          if (u.contains("deadline") && !u["deadline"].is_null()) pu.deadline = u["deadline"].get<double>();
          if (u.contains("weight") && !u["weight"].is_null()) pu.weight = u["weight"].get<double>();
          if (!pu.deadline && !pu.weight) throw ScenarioInvalid("reprioritize needs a deadline or a weight");
          if (pu.weight && !(*pu.weight > 0)) throw ScenarioInvalid("weight must be positive");
          r.priorities.push_back(pu);
        }
        break;
      case RequestKind::Reassign:
        for (const auto& item : as_list(p, "locks", "lock")) {
          model::ReassignItem ri;
          ri.mission = item.at("mission").get<std::string>();
          if (!w.find_mission(ri.mission)) throw UnknownEntity("mission " + ri.mission);
          for (const auto& rb : item.at("robots")) {
            auto id = rb.get<std::string>();
            if (!w.find_robot(id)) throw UnknownEntity("robot " + id);
            ri.robots.push_back(id);
          }
          if (ri.robots.empty()) throw ScenarioInvalid("reassign needs robots");
          r.reassign.push_back(ri);
        }
        break;
      case RequestKind::Resolve:
        r.resolveConflict = p.at("conflict").get<std::string>();
        r.resolveKeep = p.at("keep").get<std::string>();
        break;
    }
  } catch (const json::exception& ex) {
    throw ScenarioInvalid(std::string("payload: ") + ex.what());
  }
  return r;
}

// ---------------------------------------------------------------- desk

RequestDesk::RequestDesk(std::vector<RequestEnvelope> trace) {
  for (auto& e : trace) submit(std::move(e));
}

void RequestDesk::submit(RequestEnvelope env) {
  std::lock_guard lock(mu_);
  if (env.id.empty()) env.id = "live-" + std::to_string(arrivals_ + 1);
  if (!seen_.insert(env.id).second) throw TraceInvalid("duplicate request id " + env.id);
  if (env.origin == Origin::Live) env.issuedAt = std::max(env.issuedAt, clock_);
  env.arrival = arrivals_++;
  auto key = [](const RequestEnvelope& e) { return std::tie(e.issuedAt, e.arrival, e.id); };
  auto it = std::upper_bound(queue_.begin(), queue_.end(), env,
                             [&](const RequestEnvelope& a, const RequestEnvelope& b) { return key(a) < key(b); });
  queue_.insert(it, std::move(env));
}

std::string RequestDesk::submit(const json& body) {
  RequestEnvelope e = envelope_from_json(body, Origin::Live);
  {
    std::lock_guard lock(mu_);
    if (e.id.empty()) e.id = "live-" + std::to_string(arrivals_ + 1);
  }
  std::string id = e.id;
  submit(std::move(e));
  return id;
}

bool RequestDesk::idle() const {
  std::lock_guard lock(mu_);
  return queue_.empty() && conflicts_.empty();
}

std::optional<double> RequestDesk::next_due() const {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  return queue_.front().issuedAt;
}

std::vector<RequestOutcome> RequestDesk::outcomes() const {
  std::lock_guard lock(mu_);
  return outcomes_;
}

std::optional<RequestOutcome> RequestDesk::outcome(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& o : outcomes_)
    if (o.requestId == id) return o;
  return std::nullopt;
}

std::vector<Conflict> RequestDesk::open_conflicts() const {
  std::lock_guard lock(mu_);
  return conflicts_;
}

void RequestDesk::drain(exec::World& w) {
  std::lock_guard lock(mu_);
  clock_ = w.now();
  while (!queue_.empty() && queue_.front().issuedAt <= clock_ + 1e-9) {
    RequestEnvelope e = std::move(queue_.front());
    queue_.pop_front();
    handle(e, w);
  }
}

void RequestDesk::record(RequestOutcome o) { outcomes_.push_back(std::move(o)); }

void RequestDesk::reject(const RequestEnvelope& e, exec::World& w, const std::string& reason, const std::string& detail) {
  w.emit("requestRejected", {{"request", e.id}, {"requestKind", model::to_string(e.kind)}, {"reason", reason}, {"detail", detail}});
  record({e.id, OutcomeStatus::Rejected, w.now(), {{"reason", reason}, {"message", detail}}});
}

void RequestDesk::handle(const RequestEnvelope& e, exec::World& w) {
  model::OperatorRequest r;
  try {
    r = decode(e, w);
  } catch (const UnknownEntity& ex) {
    return reject(e, w, "unknownEntity", ex.what());
  } catch (const MalformedFormula& ex) {
    return reject(e, w, "malformedFormula", ex.what());
  } catch (const ScenarioInvalid& ex) {
    return reject(e, w, "invalidPayload", ex.what());
  }
  if (r.kind == RequestKind::Resolve) return resolve(e, r, w);
  if (r.kind == RequestKind::Cancel)
    for (const auto& id : r.cancel) {
      const model::Mission* m = w.find_mission(id);
      if (m->status == MissionStatus::Cancelled) return reject(e, w, "alreadyCancelled", "mission " + id);
      if (m->status == MissionStatus::Satisfied) return reject(e, w, "alreadySatisfied", "mission " + id);
    }
  if (auto c = find_conflict(e, r, w)) {
    c->id = "c" + std::to_string(nextConflict_++);
    held_[e.id] = e;
    conflicts_.push_back(*c);
    w.emit("conflictWarning", c->to_json());
    json open = json::array();
    for (const auto& k : conflicts_) open.push_back(k.to_json());
    w.set_pending_conflicts(open);
    record({e.id, OutcomeStatus::Conflict, w.now(), c->to_json()});
    return;
  }
  apply(e, r, w);
  record({e.id, OutcomeStatus::Accepted, w.now(), json::object()});
}

void RequestDesk::apply(const RequestEnvelope& e, const model::OperatorRequest& r, exec::World& w) {
  switch (r.kind) {
    case RequestKind::NewMission:
      w.add_mission(r.newMission->mission, r.newMission->tasks, e.id);
      break;
    case RequestKind::Cancel:
      for (const auto& id : r.cancel) {
        w.cancel_mission(id, e.id);
        urgentBy_.erase(id);
      }
      break;
    case RequestKind::Reprioritize:
      for (const auto& u : r.priorities) {
        w.reprioritize(u, e.id);
        if (u.deadline) urgentBy_[u.mission] = e.id;
      }
      break;
    case RequestKind::Reassign:
      for (const auto& item : r.reassign) w.lock_robots({e.id, item.robots, item.mission});
      break;
    case RequestKind::Resolve:
      break;
  }
  applied_[e.id] = e;
}

/// Hard constraints checked here: every pending task of a mission carrying
/// an operator deadline must keep, per action, at least its required number
/// of live capable robots that are not locked to another mission.
std::optional<Conflict> RequestDesk::find_conflict(const RequestEnvelope& e, const model::OperatorRequest& r,
                                                   const exec::World& w) const {
  if (r.kind != RequestKind::Reprioritize && r.kind != RequestKind::Reassign) return std::nullopt;
  std::map<std::string, std::string> lockedTo, lockedBy;
  for (const auto& l : w.locks()) {
    if (!active(w.find_mission(l.mission))) continue;
    for (const auto& rb : l.robots) lockedTo[rb] = l.mission, lockedBy[rb] = l.request;
  }
  std::map<std::string, std::string> urgent;  // mission -> request
  for (const auto& [m, req] : urgentBy_)
    if (active(w.find_mission(m))) urgent[m] = req;
  auto proposedLocks = lockedTo;
  std::set<std::string> newlyUrgent;
  if (r.kind == RequestKind::Reprioritize) {
    for (const auto& u : r.priorities)
      if (u.deadline && active(w.find_mission(u.mission))) urgent[u.mission] = e.id, newlyUrgent.insert(u.mission);
  } else {
    for (const auto& item : r.reassign)
      for (const auto& rb : item.robots) proposedLocks[rb] = item.mission, lockedBy[rb] = e.id;
  }

  struct Shortfall {
    std::string action;
    int required = 0, available = 0;
    std::vector<std::string> blockers;
  };
  auto shortfall = [&](const std::string& mission, const std::map<std::string, std::string>& locks) -> std::optional<Shortfall> {
    const model::Mission* m = w.find_mission(mission);
    for (const auto& sym : m->tasks()) {
      const model::Task* t = w.find_task(sym);
      if (!t || t->status == TaskStatus::Done || t->status == TaskStatus::Cancelled || w.task_executing(sym)) continue;
      for (const auto& [a, beta] : t->requirements()) {
        Shortfall s{a, beta, 0, {}};
        for (const auto& rb : w.robots()) {
          if (rb.status == RobotStatus::Failed || !rb.can(a)) continue;
          auto it = locks.find(rb.id);
          if (it == locks.end() || it->second == mission) ++s.available;
          else s.blockers.push_back(rb.id);
        }
        // only a shortfall that releasing the locks would cure is a conflict
        const int freed = s.available + static_cast<int>(s.blockers.size());
        if (s.available < beta && freed >= beta) return s;
      }
    }
    return std::nullopt;
  };

  for (const auto& [mission, req] : urgent) {
    bool mine = newlyUrgent.count(mission) > 0;
    if (!mine && (r.kind != RequestKind::Reassign || shortfall(mission, lockedTo))) continue;
    auto s = shortfall(mission, proposedLocks);
    if (!s) continue;
    // the request in force that this one collides with
    std::string earlier;
    if (mine) {
      for (const auto& l : w.locks())
        for (const auto& rb : l.robots)
          if (std::find(s->blockers.begin(), s->blockers.end(), rb) != s->blockers.end()) earlier = l.request;
    } else {
      earlier = req;
    }
    if (earlier.empty() || earlier == e.id) continue;
    Conflict c;
    c.earlier = earlier;
    c.later = e.id;
    c.constraint = "capacity";
    c.action = s->action;
    c.required = s->required;
    c.available = s->available;
    c.robots = s->blockers;
    c.missions.push_back(mission);
    for (const auto& rb : s->blockers)
      if (std::find(c.missions.begin(), c.missions.end(), proposedLocks[rb]) == c.missions.end())
        c.missions.push_back(proposedLocks[rb]);
    return c;
  }
  return std::nullopt;
}

void RequestDesk::resolve(const RequestEnvelope& e, const model::OperatorRequest& r, exec::World& w) {
  auto it = std::find_if(conflicts_.begin(), conflicts_.end(), [&](const Conflict& c) { return c.id == r.resolveConflict; });
  if (it == conflicts_.end()) return reject(e, w, "unknownEntity", "conflict " + r.resolveConflict);
  if (r.resolveKeep != it->earlier && r.resolveKeep != it->later)
    return reject(e, w, "unknownEntity", "request " + r.resolveKeep + " is not part of " + it->id);
  Conflict c = *it;
  conflicts_.erase(it);
  RequestEnvelope later = held_.at(c.later);
  held_.erase(c.later);
  const bool keepLater = r.resolveKeep == c.later;
  const std::string& dropped = keepLater ? c.earlier : c.later;
  if (keepLater) {
    const RequestEnvelope& earlier = applied_.at(c.earlier);
    if (earlier.kind == RequestKind::Reassign) w.unlock(earlier.id);
    std::erase_if(urgentBy_, [&](const auto& kv) { return kv.second == earlier.id; });
  }
  w.emit("requestRejected", {{"request", dropped}, {"reason", "resolved"}, {"conflict", c.id}, {"kept", r.resolveKeep}});
  for (auto& o : outcomes_)
    if (o.requestId == c.later) o.detail["resolution"] = keepLater ? "applied" : "dropped";
  if (keepLater) {
    try {
      apply(later, decode(later, w), w);
    } catch (const Error& ex) {
      w.emit("requestRejected", {{"request", later.id}, {"reason", "stale"}, {"detail", ex.what()}});
    }
  }
  json open = json::array();
  for (const auto& k : conflicts_) open.push_back(k.to_json());
  w.set_pending_conflicts(open);
  record({e.id, OutcomeStatus::Accepted, w.now(), {{"conflict", c.id}, {"kept", r.resolveKeep}}});
}

}  // namespace fleet::service
