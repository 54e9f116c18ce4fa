#include "fleet/local/coalition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fleet/model/estimators.hpp"

namespace fleet::local {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double interception_time(Vec2 p, double s, Vec2 q, Vec2 v) {
  Vec2 d = q - p;
  double a = v.dot(v) - s * s, b = 2 * d.dot(v), c = d.dot(d);
  if (c <= 1e-18) return 0;
  if (std::abs(a) < 1e-12) {
    if (b >= 0) return kInf;
    return -c / b;
  }
  double disc = b * b - 4 * a * c;
  if (disc < 0) return kInf;
  double sq = std::sqrt(disc);
  double t1 = (-b - sq) / (2 * a), t2 = (-b + sq) / (2 * a);
  double best = kInf;
  for (double t : {t1, t2})
    if (t >= 0) best = std::min(best, t);
  return best;
}

double coalition_cost(const std::vector<const Pursuer*>& members, const MovingTarget& t, double penalty) {
  double reach = 0;
  for (const Pursuer* m : members) reach = std::max(reach, interception_time(m->pos, m->speed, t.pos, t.vel));
  int size = static_cast<int>(members.size());
  if (size < t.n) return penalty + (std::isfinite(reach) ? reach : penalty);
  if (!std::isfinite(reach)) reach = penalty;
  return reach + model::duration_for_count(t.base, t.n, size, t.satCap);
}

double scheme_value(const std::vector<double>& costs) {
  if (costs.empty()) return 0;
  double mx = *std::max_element(costs.begin(), costs.end()), sum = 0;
  for (double c : costs) sum += c;
  return mx + sum / static_cast<double>(costs.size());
}

bool switch_improves(double fromBefore, double toBefore, double fromAfter, double toAfter) {
  return std::max(fromAfter, toAfter) < std::max(fromBefore, toBefore) - 1e-12;
}

bool lex_less_sorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

CoalitionEngine::CoalitionEngine(std::vector<Pursuer> robots, std::vector<MovingTarget> targets, DcfConfig cfg)
    : robots_(std::move(robots)), targets_(std::move(targets)), cfg_(cfg), rng_(cfg.seed) {
  of_.assign(robots_.size(), -1);
  lockedBy_.assign(targets_.size(), -1);
  rs_.resize(robots_.size());
  snapRobots_ = robots_;
  snapTargets_ = targets_;
  reassign_idle();
  start_epoch();
}

bool CoalitionEngine::all_done() const {
  for (const auto& t : targets_)
    if (t.phase != TargetPhase::Done) return false;
  return true;
}

double CoalitionEngine::cost_with(int target, const std::vector<int>& scheme) const {
  std::vector<const Pursuer*> members;
  for (std::size_t r = 0; r < scheme.size(); ++r)
    if (scheme[r] == target) members.push_back(&snapRobots_[r]);
  return coalition_cost(members, snapTargets_[static_cast<std::size_t>(target)], cfg_.understaffPenalty);
}

std::vector<double> CoalitionEngine::sorted_costs(const std::vector<int>& scheme) const {
  std::vector<double> c;
  for (std::size_t t = 0; t < snapTargets_.size(); ++t)
    if (snapTargets_[t].phase == TargetPhase::Free) c.push_back(cost_with(static_cast<int>(t), scheme));
  std::sort(c.begin(), c.end(), std::greater<>());
  return c;
}

std::vector<double> CoalitionEngine::snapshot_costs() const {
  std::vector<double> c;
  for (std::size_t t = 0; t < snapTargets_.size(); ++t)
    if (snapTargets_[t].phase == TargetPhase::Free) c.push_back(cost_with(static_cast<int>(t), of_));
  return c;
}

std::optional<int> CoalitionEngine::best_move(int r, const std::vector<int>& view) const {
  const int j = view[static_cast<std::size_t>(r)];
  if (j < 0 || snapTargets_[static_cast<std::size_t>(j)].phase != TargetPhase::Free) return std::nullopt;
  std::vector<int> moved = view;
  double fromBefore = cost_with(j, view);
  std::optional<int> best;
  double bestMax = kInf;
  for (std::size_t t = 0; t < snapTargets_.size(); ++t) {
    const int jt = static_cast<int>(t);
    if (jt == j || snapTargets_[t].phase != TargetPhase::Free) continue;
    moved[static_cast<std::size_t>(r)] = jt;
    double toBefore = cost_with(jt, view);
    double fromAfter = cost_with(j, moved), toAfter = cost_with(jt, moved);
    moved[static_cast<std::size_t>(r)] = j;
    if (!switch_improves(fromBefore, toBefore, fromAfter, toAfter)) continue;
    double m = std::max(fromAfter, toAfter);
    if (m < bestMax - 1e-12) {
      bestMax = m;
      best = jt;
    }
  }
  return best;
}

bool CoalitionEngine::has_improving_switch() const {
  for (std::size_t r = 0; r < robots_.size(); ++r)
    if (best_move(static_cast<int>(r), of_)) return true;
  return false;
}

void CoalitionEngine::send(Msg k, int robot, int target, int from, int to, double extraMs) {
  double ms = extraMs >= 0 ? extraMs
                           : (cfg_.delayHiMs > cfg_.delayLoMs
                                  ? std::uniform_real_distribution<double>(cfg_.delayLoMs, cfg_.delayHiMs)(rng_)
                                  : cfg_.delayLoMs);
  queue_.push({clock_ + ms / 1000.0, seq_++, k, robot, target, from, to, epoch_});
}

void CoalitionEngine::reassign_idle() {
  for (std::size_t r = 0; r < robots_.size(); ++r) {
    int j = of_[r];
    if (j >= 0 && targets_[static_cast<std::size_t>(j)].phase != TargetPhase::Done) continue;
    of_[r] = -1;
    // join the free coalition whose cost after joining is smallest
    snapRobots_ = robots_;
    snapTargets_ = targets_;
    int best = -1;
    double bestCost = kInf;
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      if (targets_[t].phase != TargetPhase::Free) continue;
      of_[r] = static_cast<int>(t);
      double c = cost_with(static_cast<int>(t), of_);
      of_[r] = -1;
      if (c < bestCost - 1e-12) bestCost = c, best = static_cast<int>(t);
    }
    of_[r] = best;
    if (best >= 0) log_.push_back({clock_, "join", robots_[r].id, "", targets_[static_cast<std::size_t>(best)].id, 0, bestCost});
  }
}

void CoalitionEngine::start_epoch() {
  ++epoch_;
  snapRobots_ = robots_;
  snapTargets_ = targets_;
  std::fill(lockedBy_.begin(), lockedBy_.end(), -1);
  negotiating_ = false;
  lastEpoch_ = clock_;
  bool anyFree = false;
  for (const auto& t : targets_) anyFree |= t.phase == TargetPhase::Free;
  if (!anyFree) return;
  negotiating_ = true;
  for (std::size_t r = 0; r < robots_.size(); ++r) {
    rs_[r].view = of_;
    rs_[r].pending = false;
    rs_[r].grants = rs_[r].denies = 0;
    send(Msg::Think, static_cast<int>(r), -1, -1, -1);
  }
}

void CoalitionEngine::think(int r) {
  auto& s = rs_[static_cast<std::size_t>(r)];
  if (s.pending) return;
  s.view[static_cast<std::size_t>(r)] = of_[static_cast<std::size_t>(r)];
  auto move = best_move(r, s.view);
  if (!move) return;
  s.pending = true;
  s.from = of_[static_cast<std::size_t>(r)];
  s.to = *move;
  s.grants = s.denies = 0;
  ++s.round;
  send(Msg::Intent, r, s.from, s.from, s.to);
  send(Msg::Intent, r, s.to, s.from, s.to);
}

void CoalitionEngine::finish_intent(int r) {
  auto& s = rs_[static_cast<std::size_t>(r)];
  const bool both = s.grants == 2;
  bool committed = false;
  if (both && of_[static_cast<std::size_t>(r)] == s.from) {
    // coordinators are locked: memberships of both coalitions are exact
    std::vector<int> after = of_;
    after[static_cast<std::size_t>(r)] = s.to;
    if (switch_improves(cost_with(s.from, of_), cost_with(s.to, of_), cost_with(s.from, after), cost_with(s.to, after))) {
      auto before = sorted_costs(of_);
      auto post = sorted_costs(after);
      if (!lex_less_sorted(post, before)) throw std::logic_error("coalition switch without strict descent");
      descent_.emplace_back(before, post);
      of_ = after;
      ++switches_;
      log_.push_back({clock_, "switch", robots_[static_cast<std::size_t>(r)].id,
                      targets_[static_cast<std::size_t>(s.from)].id, targets_[static_cast<std::size_t>(s.to)].id, s.round,
                      scheme_value(post)});
      committed = true;
    }
  }
  // granted locks are released either way; commits also carry the new view
  for (int t : {s.from, s.to}) send(committed ? Msg::Commit : Msg::Release, r, t, s.from, s.to);
  s.view = of_;
  if (committed)
    for (std::size_t q = 0; q < robots_.size(); ++q)
      if (static_cast<int>(q) != r) send(Msg::View, static_cast<int>(q), -1, r, s.to);
  s.pending = false;
  // retry later after a denial, immediately after a decision otherwise
  send(Msg::Think, r, -1, -1, -1, both ? -1 : cfg_.retryMs + std::uniform_real_distribution<double>(0, cfg_.retryMs)(rng_));
}

void CoalitionEngine::deliver(const Message& m) {
  if (m.epoch != epoch_) return;
  switch (m.kind) {
    case Msg::Think:
      think(m.robot);
      break;
    case Msg::Intent: {
      int& lock = lockedBy_[static_cast<std::size_t>(m.target)];
      if (lock < 0) {
        lock = m.robot;
        send(Msg::Grant, m.robot, m.target, m.from, m.to);
      } else {
        send(Msg::Deny, m.robot, m.target, m.from, m.to);
      }
      break;
    }
    case Msg::Grant:
    case Msg::Deny: {
      auto& s = rs_[static_cast<std::size_t>(m.robot)];
      if (!s.pending || m.from != s.from || m.to != s.to) break;
      (m.kind == Msg::Grant ? s.grants : s.denies)++;
      if (s.grants + s.denies == 2) finish_intent(m.robot);
      break;
    }
    case Msg::Commit:
    case Msg::Release:
      if (lockedBy_[static_cast<std::size_t>(m.target)] == m.robot) lockedBy_[static_cast<std::size_t>(m.target)] = -1;
      break;
    case Msg::View: {
      auto& s = rs_[static_cast<std::size_t>(m.robot)];
      s.view[static_cast<std::size_t>(m.from)] = m.to;
      think(m.robot);
      break;
    }
  }
}

void CoalitionEngine::check_convergence() {
  if (!negotiating_ || !queue_.empty()) return;
  for (const auto& s : rs_)
    if (s.pending) return;
  negotiating_ = false;
  log_.push_back({clock_, "converged", "", "", "", 0, scheme_value(snapshot_costs())});
}

void CoalitionEngine::negotiate(double maxSeconds) {
  const double limit = clock_ + maxSeconds;
  while (negotiating_) {
    if (queue_.empty()) {
      check_convergence();
      break;
    }
    Message m = queue_.top();
    if (m.at > limit) break;
    queue_.pop();
    clock_ = std::max(clock_, m.at);
    deliver(m);
    if (queue_.empty()) check_convergence();
  }
}

void CoalitionEngine::move(double dt) {
  for (auto& t : targets_) {
    if (t.phase != TargetPhase::Free) continue;
    t.pos = t.pos + t.vel * dt;
    if (t.pos.x < cfg_.arenaLo.x || t.pos.x > cfg_.arenaHi.x) {
      t.vel.x = -t.vel.x;
      t.pos.x = std::clamp(t.pos.x, cfg_.arenaLo.x, cfg_.arenaHi.x);
    }
    if (t.pos.y < cfg_.arenaLo.y || t.pos.y > cfg_.arenaHi.y) {
      t.vel.y = -t.vel.y;
      t.pos.y = std::clamp(t.pos.y, cfg_.arenaLo.y, cfg_.arenaHi.y);
    }
  }
  for (std::size_t r = 0; r < robots_.size(); ++r) {
    int j = of_[r];
    if (j < 0) continue;
    const MovingTarget& t = targets_[static_cast<std::size_t>(j)];
    Pursuer& p = robots_[r];
    Vec2 aim = t.pos;
    if (t.phase == TargetPhase::Free) {
      double ti = interception_time(p.pos, p.speed, t.pos, t.vel);
      if (std::isfinite(ti)) aim = t.pos + t.vel * std::min(ti, dt);
    }
    Vec2 d = aim - p.pos;
    double len = d.norm(), stepLen = p.speed * dt;
    p.pos = len <= stepLen ? aim : p.pos + d * (stepLen / len);
  }
}

void CoalitionEngine::captures() {
  bool changed = false;
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    MovingTarget& tg = targets_[t];
    if (tg.phase == TargetPhase::Free) {
      int near = 0, members = 0;
      for (std::size_t r = 0; r < robots_.size(); ++r)
        if (of_[r] == static_cast<int>(t)) {
          ++members;
          if (distance(robots_[r].pos, tg.pos) <= cfg_.captureRadius) ++near;
        }
      if (near >= tg.n) {
        tg.phase = TargetPhase::Handling;
        tg.doneAt = clock_ + model::duration_for_count(tg.base, tg.n, members, tg.satCap);
        log_.push_back({clock_, "capture", "", "", tg.id, 0, static_cast<double>(members)});
        changed = true;
      }
    } else if (tg.phase == TargetPhase::Handling && clock_ >= tg.doneAt - 1e-9) {
      tg.phase = TargetPhase::Done;
      log_.push_back({clock_, "done", "", "", tg.id, 0, 0});
      changed = true;
    }
  }
  if (changed) {
    reassign_idle();
    start_epoch();
  }
}

void CoalitionEngine::step(double dt) {
  const double end = clock_ + dt;
  while (!queue_.empty() && queue_.top().at <= end) {
    Message m = queue_.top();
    queue_.pop();
    clock_ = std::max(clock_, m.at);
    deliver(m);
  }
  check_convergence();
  clock_ = end;
  move(dt);
  captures();
  if (!negotiating_ && clock_ - lastEpoch_ >= cfg_.renegotiatePeriod - 1e-9) start_epoch();
}

}  // namespace fleet::local
