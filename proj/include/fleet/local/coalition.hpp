#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "fleet/model/geometry.hpp"

namespace fleet::local {

struct Pursuer {
  std::string id;
  Vec2 pos;
  double speed = 1;
};

enum class TargetPhase { Free, Handling, Done };

struct MovingTarget {
  std::string id;
  Vec2 pos;
  Vec2 vel;
  int n = 1;          // robots needed within capture radius
  double base = 1;    // handling seconds at exact staffing
  double satCap = 1;
  TargetPhase phase = TargetPhase::Free;
  double doneAt = 0;  // end of handling once captured
};

struct DcfConfig {
  double delayLoMs = 0;
  double delayHiMs = 0;
  std::uint64_t seed = 1;
  double captureRadius = 0.5;
  double renegotiatePeriod = 2.0;  // s between fresh cost snapshots
  double understaffPenalty = 1e4;  // flat cost of a coalition that cannot capture yet
  double retryMs = 5;              // back-off after a denied intent
  Vec2 arenaLo{-1e9, -1e9};
  Vec2 arenaHi{1e9, 1e9};
};

/// Earliest time a robot at p with speed s meets a target at q moving with v;
/// infinity when it cannot catch up.
double interception_time(Vec2 p, double s, Vec2 q, Vec2 v);

/// Coalition cost: slowest member's interception plus handling time at the
/// coalition's size. An understaffed coalition, empty or not, costs the
/// penalty plus its members' reach, so vacating one never outweighs
/// completing another.
double coalition_cost(const std::vector<const Pursuer*>& members, const MovingTarget& t, double penalty);

/// max + mean of the coalition costs.
double scheme_value(const std::vector<double>& costs);

/// Switch rule: the larger of the two touched costs strictly decreases.
bool switch_improves(double fromBefore, double toBefore, double fromAfter, double toAfter);

/// Sorted-descending comparison used by the descent assertion.
bool lex_less_sorted(std::vector<double> a, std::vector<double> b);

struct CoordinationEvent {
  double t = 0;
  std::string kind;  // switch, join, capture, done, converged
  std::string robot;
  std::string from;
  std::string to;
  int round = 0;
  double value = 0;
};

/// Distributed coalition formation for one team over moving targets, with
/// per-robot mailboxes and seeded delivery delays. Deterministic per seed.
class CoalitionEngine {
 public:
  CoalitionEngine(std::vector<Pursuer> robots, std::vector<MovingTarget> targets, DcfConfig cfg);

  /// Advance messages and motion from the current clock by dt seconds.
  void step(double dt);
  /// Run the message exchange (no motion) until no robot can switch.
  void negotiate(double maxSeconds = 60);

  double now() const { return clock_; }
  bool negotiating() const { return negotiating_; }
  bool all_done() const;
  /// Robot -> target index (-1 when idle).
  const std::vector<int>& scheme() const { return of_; }
  /// Costs per free target at the current snapshot.
  std::vector<double> snapshot_costs() const;
  /// Exhaustive check: does any single move from the current scheme satisfy
  /// the switch rule on the snapshot?
  bool has_improving_switch() const;

  std::vector<Pursuer>& robots() { return robots_; }
  const std::vector<Pursuer>& robots() const { return robots_; }
  const std::vector<MovingTarget>& targets() const { return targets_; }
  const std::vector<CoordinationEvent>& log() const { return log_; }
  int switch_count() const { return switches_; }
  /// Sorted cost vectors recorded at each accepted switch (before, after).
  const std::vector<std::pair<std::vector<double>, std::vector<double>>>& descent() const { return descent_; }

 private:
  enum class Msg { Intent, Grant, Deny, Commit, Release, View, Think };
  struct Message {
    double at;
    long seq;
    Msg kind;
    int robot;   // robot actor involved
    int target;  // coordinator involved
    int from, to;
    long epoch;
  };
  struct Later {
    bool operator()(const Message& a, const Message& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.robot != b.robot) return a.robot > b.robot;  // lowest id first on ties
      return a.seq > b.seq;
    }
  };
  struct RobotState {
    std::vector<int> view;  // believed scheme
    bool pending = false;
    int from = -1, to = -1;
    int grants = 0, denies = 0;
    int round = 0;
  };

  void start_epoch();
  void send(Msg k, int robot, int target, int from, int to, double extraMs = -1);
  void deliver(const Message& m);
  void think(int r);
  void finish_intent(int r);
  std::optional<int> best_move(int r, const std::vector<int>& view) const;
  double cost_with(int target, const std::vector<int>& scheme) const;
  std::vector<double> sorted_costs(const std::vector<int>& scheme) const;
  void check_convergence();
  void move(double dt);
  void captures();
  void reassign_idle();

  std::vector<Pursuer> robots_;
  std::vector<MovingTarget> targets_;
  DcfConfig cfg_;
  std::mt19937_64 rng_;
  double clock_ = 0;
  std::vector<int> of_;
  std::vector<Pursuer> snapRobots_;
  std::vector<MovingTarget> snapTargets_;
  std::vector<int> lockedBy_;  // per target coordinator
  std::vector<RobotState> rs_;
  std::priority_queue<Message, std::vector<Message>, Later> queue_;
  long seq_ = 0;
  long epoch_ = 0;
  bool negotiating_ = false;
  double lastEpoch_ = 0;
  int switches_ = 0;
  std::vector<CoordinationEvent> log_;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> descent_;
};

}  // namespace fleet::local
