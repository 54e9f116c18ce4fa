#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fleet/logic/formula.hpp"

namespace fleet::logic {

using StateId = int;
/// Sorted, duplicate-free set of automaton states.
using ReachableSet = std::vector<StateId>;

/// Letter constraint on a transition. A guard with `require` set admits only
/// that symbol; otherwise it admits every symbol outside `forbid`.
struct Guard {
  std::optional<int> require;
  std::vector<int> forbid;

  bool admits(int symbol) const;
};

struct Transition {
  StateId from;
  Guard guard;
  StateId to;
};

/// Per-state hop distance to the accepting set.
struct DistanceTable {
  std::vector<int> dist;

  int operator[](StateId q) const { return dist.at(static_cast<std::size_t>(q)); }
  /// Minimum over a set; -1 for an empty set.
  int min_over(const ReachableSet& r) const;
};

/// Finite-word automaton over task symbols.
///
/// Built by progression of the formula: a state is a conjunction of pending
/// obligations. All states whose obligations can be met by the empty suffix
/// are merged into one absorbing accepting state. States that can never
/// reach acceptance are removed, so an unsatisfiable formula yields an
/// automaton with no states at all (see is_empty()).
class TaskAutomaton {
 public:
  TaskAutomaton() = default;

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::optional<int> symbol_index(std::string_view name) const;

  std::size_t state_count() const noexcept { return labels_.size(); }
  const std::string& state_label(StateId q) const { return labels_.at(static_cast<std::size_t>(q)); }
  const ReachableSet& initial() const noexcept { return initial_; }
  const ReachableSet& accepting() const noexcept { return accepting_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }

  bool is_empty() const noexcept { return labels_.empty(); }
  bool is_accepting(StateId q) const;
  bool intersects_accepting(const ReachableSet& r) const;

  /// Successors of `r` under alphabet symbol index `symbol`.
  ReachableSet advance(const ReachableSet& r, int symbol) const;
  /// Successors under a symbol name; throws UnknownSymbol outside the alphabet.
  ReachableSet advance(const ReachableSet& r, std::string_view symbol) const;
  /// Word acceptance. Symbols outside the alphabet are treated as letters
  /// that match no atom.
  bool accepts(std::span<const std::string> word) const;

  const DistanceTable& distances() const noexcept { return distances_; }

 private:
  friend TaskAutomaton build_automaton(const Formula&, std::span<const std::string>);

  const std::vector<StateId>& successors(StateId q, int column) const;

  std::vector<std::string> alphabet_;
  std::map<std::string, int, std::less<>> index_;
  std::vector<std::string> labels_;
  ReachableSet initial_;
  ReachableSet accepting_;
  std::vector<Transition> transitions_;
  // succ_[q * (|alphabet| + 1) + s]; the last column is for foreign symbols.
  std::vector<std::vector<StateId>> succ_;
  DistanceTable distances_;
};

/// Compile a formula. The alphabet is the formula's atoms plus `extra`.
TaskAutomaton build_automaton(const Formula& f, std::span<const std::string> extra = {});

ReachableSet advance(const TaskAutomaton& a, const ReachableSet& r, std::string_view symbol);

/// Reverse breadth-first hop counts to the accepting set, guards ignored.
DistanceTable accepting_distance(const TaskAutomaton& a);

/// True when completing s1 then s2 reaches the same states as s2 then s1,
/// from every state of the automaton.
bool symbols_commute(const TaskAutomaton& a, int s1, int s2);

/// Memoized query: can `r` reach acceptance using each symbol of `mask`
/// (bit i = alphabet index i) at most once, in some order? Thread-safe.
class CompletionOracle {
 public:
  explicit CompletionOracle(const TaskAutomaton* a) : a_(a) {}

  bool completable(const ReachableSet& r, std::uint64_t mask) const;

 private:
  bool search(const ReachableSet& r, std::uint64_t mask) const;

  const TaskAutomaton* a_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<ReachableSet, std::uint64_t>, bool> memo_;
};

}  // namespace fleet::logic
