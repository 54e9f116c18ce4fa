#include "fleet/logic/automaton.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "fleet/errors.hpp"

namespace fleet::logic {

bool Guard::admits(int symbol) const {
  if (require) return *require == symbol;
  return !std::binary_search(forbid.begin(), forbid.end(), symbol);
}

int DistanceTable::min_over(const ReachableSet& r) const {
  int best = -1;
  for (StateId q : r) {
    int d = dist.at(static_cast<std::size_t>(q));
    if (d >= 0 && (best < 0 || d < best)) best = d;
  }
  return best;
}

namespace {

using Conj = std::vector<int>;  // sorted formula ids

struct Term {
  int require = -1;
  std::vector<int> forbid;
  Conj next;

  bool operator<(const Term& o) const {
    return std::tie(require, forbid, next) < std::tie(o.require, o.forbid, o.next);
  }
  bool operator==(const Term& o) const = default;
};

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// t1 admits every letter t2 admits and carries no extra obligations.
bool subsumes(const Term& t1, const Term& t2) {
  if (!subset(t1.next, t2.next)) return false;
  if (t2.require >= 0) {
    if (t1.require >= 0) return t1.require == t2.require;
    return !std::binary_search(t1.forbid.begin(), t1.forbid.end(), t2.require);
  }
  return t1.require < 0 && subset(t1.forbid, t2.forbid);
}

std::vector<Term> minimize(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  std::vector<Term> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    // mutual subsumption implies equality, and duplicates are gone
    bool dropped = false;
    for (std::size_t j = 0; j < terms.size() && !dropped; ++j)
      dropped = i != j && subsumes(terms[j], terms[i]);
    if (!dropped) out.push_back(terms[i]);
  }
  return out;
}

class Builder {
 public:
  explicit Builder(const std::map<std::string, int, std::less<>>& index) : index_(index) {}

  int intern(const Formula& f) {
    switch (f.op()) {
      case Op::True: return make(Op::True, -1, -1, -1);
      case Op::Atom: return make(Op::Atom, index_.at(f.symbol()), -1, -1);
      case Op::NotAtom: return make(Op::NotAtom, index_.at(f.symbol()), -1, -1);
      case Op::And: {
        int a = intern(f.lhs()), b = intern(f.rhs());
        if (is_true(a)) return b;
        if (is_true(b)) return a;
        return make(Op::And, -1, std::min(a, b), std::max(a, b));
      }
      case Op::Or: {
        int a = intern(f.lhs()), b = intern(f.rhs());
        if (is_true(a) || is_true(b)) return make(Op::True, -1, -1, -1);
        return make(Op::Or, -1, std::min(a, b), std::max(a, b));
      }
      case Op::Next: return make(Op::Next, -1, intern(f.lhs()), -1);
      case Op::Until: {
        int a = intern(f.lhs()), b = intern(f.rhs());
        if (is_true(b)) return b;
        return make(Op::Until, -1, a, b);
      }
      case Op::Eventually: {
        int a = intern(f.lhs());
        if (is_true(a)) return a;
        return make(Op::Eventually, -1, a, -1);
      }
    }
    return -1;
  }

  void add_conjunct(Conj& c, int id) const {
    const N& n = nodes_[static_cast<std::size_t>(id)];
    if (n.op == Op::True) return;
    if (n.op == Op::And) {
      add_conjunct(c, n.a);
      add_conjunct(c, n.b);
      return;
    }
    auto it = std::lower_bound(c.begin(), c.end(), id);
    if (it == c.end() || *it != id) c.insert(it, id);
  }

  bool nullable(int id) const {
    const N& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::True: return true;
      case Op::Atom:
      case Op::NotAtom:
      case Op::Next: return false;
      case Op::And: return nullable(n.a) && nullable(n.b);
      case Op::Or: return nullable(n.a) || nullable(n.b);
      case Op::Until: return nullable(n.b);
      case Op::Eventually: return nullable(n.a);
    }
    return false;
  }

  bool nullable(const Conj& c) const {
    return std::all_of(c.begin(), c.end(), [&](int id) { return nullable(id); });
  }

  const std::vector<Term>& expand(int id) {
    auto it = xp_.find(id);
    if (it != xp_.end()) return it->second;
    const N n = nodes_[static_cast<std::size_t>(id)];
    std::vector<Term> out;
    switch (n.op) {
      case Op::True: out.push_back(Term{}); break;
      case Op::Atom: out.push_back(Term{n.sym, {}, {}}); break;
      case Op::NotAtom: out.push_back(Term{-1, {n.sym}, {}}); break;
      case Op::And: out = product(expand(n.a), expand(n.b)); break;
      case Op::Or: {
        out = expand(n.a);
        const auto& rhs = expand(n.b);
        out.insert(out.end(), rhs.begin(), rhs.end());
        break;
      }
      case Op::Next: {
        Term t;
        add_conjunct(t.next, n.a);
        out.push_back(t);
        break;
      }
      case Op::Until: {
        out = expand(n.b);
        Term stay;
        add_conjunct(stay.next, id);
        auto held = product(expand(n.a), {stay});
        out.insert(out.end(), held.begin(), held.end());
        break;
      }
      case Op::Eventually: {
        out = expand(n.a);
        Term stay;
        add_conjunct(stay.next, id);
        out.push_back(stay);
        break;
      }
    }
    return xp_[id] = minimize(std::move(out));
  }

  std::vector<Term> expand(const Conj& c) {
    std::vector<Term> acc{Term{}};
    for (int id : c) acc = product(acc, expand(id));
    return acc;
  }

  std::string label(const Conj& c) const {
    if (c.empty()) return "true";
    std::string s;
    for (int id : c) {
      if (!s.empty()) s += " & ";
      s += text(id);
    }
    return s;
  }

  void set_names(std::vector<std::string> names) { names_ = std::move(names); }

 private:
  struct N {
    Op op;
    int sym;
    int a;
    int b;
  };

  bool is_true(int id) const { return nodes_[static_cast<std::size_t>(id)].op == Op::True; }

  int make(Op op, int sym, int a, int b) {
    auto key = std::make_tuple(static_cast<int>(op), sym, a, b);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({op, sym, a, b});
    ids_.emplace(key, id);
    return id;
  }

  std::vector<Term> product(const std::vector<Term>& xs, const std::vector<Term>& ys) const {
    std::vector<Term> out;
    for (const Term& x : xs) {
      for (const Term& y : ys) {
        if (x.require >= 0 && y.require >= 0 && x.require != y.require) continue;
        Term t;
        t.require = x.require >= 0 ? x.require : y.require;
        if (t.require >= 0) {
          if (std::binary_search(x.forbid.begin(), x.forbid.end(), t.require) ||
              std::binary_search(y.forbid.begin(), y.forbid.end(), t.require))
            continue;
        } else {
          t.forbid = set_union(x.forbid, y.forbid);
        }
        t.next = x.next;
        for (int id : y.next) add_conjunct(t.next, id);
        out.push_back(std::move(t));
      }
    }
    return minimize(std::move(out));
  }

  std::string text(int id) const {
    const N& n = nodes_[static_cast<std::size_t>(id)];
    auto sym = [&] { return names_.at(static_cast<std::size_t>(n.sym)); };
    switch (n.op) {
      case Op::True: return "true";
      case Op::Atom: return sym();
      case Op::NotAtom: return "!" + sym();
      case Op::And: return "(" + text(n.a) + " & " + text(n.b) + ")";
      case Op::Or: return "(" + text(n.a) + " | " + text(n.b) + ")";
      case Op::Next: return "X " + text(n.a);
      case Op::Until: return "(" + text(n.a) + " U " + text(n.b) + ")";
      case Op::Eventually: return "F " + text(n.a);
    }
    return {};
  }

  const std::map<std::string, int, std::less<>>& index_;
  std::vector<N> nodes_;
  std::map<std::tuple<int, int, int, int>, int> ids_;
  std::map<int, std::vector<Term>> xp_;
  std::vector<std::string> names_;
};

}  // namespace

std::optional<int> TaskAutomaton::symbol_index(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool TaskAutomaton::is_accepting(StateId q) const {
  return std::binary_search(accepting_.begin(), accepting_.end(), q);
}

bool TaskAutomaton::intersects_accepting(const ReachableSet& r) const {
  return std::any_of(r.begin(), r.end(), [&](StateId q) { return is_accepting(q); });
}

const std::vector<StateId>& TaskAutomaton::successors(StateId q, int column) const {
  const std::size_t width = alphabet_.size() + 1;
  return succ_.at(static_cast<std::size_t>(q) * width + static_cast<std::size_t>(column));
}

ReachableSet TaskAutomaton::advance(const ReachableSet& r, int symbol) const {
  if (symbol < 0 || static_cast<std::size_t>(symbol) >= alphabet_.size())
    throw UnknownSymbol("symbol index " + std::to_string(symbol));
  ReachableSet out;
  for (StateId q : r) {
    const auto& s = successors(q, symbol);
    out.insert(out.end(), s.begin(), s.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ReachableSet TaskAutomaton::advance(const ReachableSet& r, std::string_view symbol) const {
  auto idx = symbol_index(symbol);
  if (!idx) throw UnknownSymbol(std::string(symbol));
  return advance(r, *idx);
}

bool TaskAutomaton::accepts(std::span<const std::string> word) const {
  ReachableSet cur = initial_;
  const int foreign = static_cast<int>(alphabet_.size());
  for (const std::string& w : word) {
    if (cur.empty()) return false;
    auto idx = symbol_index(w);
    if (idx) {
      cur = advance(cur, *idx);
    } else {
      ReachableSet next;
      for (StateId q : cur) {
        const auto& s = successors(q, foreign);
        next.insert(next.end(), s.begin(), s.end());
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      cur = std::move(next);
    }
  }
  return intersects_accepting(cur);
}

TaskAutomaton build_automaton(const Formula& f, std::span<const std::string> extra) {
  TaskAutomaton A;
  std::set<std::string> symbols = f.atoms();
  symbols.insert(extra.begin(), extra.end());
  A.alphabet_.assign(symbols.begin(), symbols.end());
  for (std::size_t i = 0; i < A.alphabet_.size(); ++i) A.index_.emplace(A.alphabet_[i], static_cast<int>(i));

  Builder b(A.index_);
  b.set_names(A.alphabet_);

  // Raw exploration. Conj{} with a sentinel stands for the accepting sink.
  const Conj kSink{-1};
  std::map<Conj, int> ids;
  std::vector<Conj> states;
  std::vector<std::tuple<int, int, std::vector<int>, int>> raw;  // from, require, forbid, to
  auto id_of = [&](const Conj& c, std::deque<int>& work) {
    Conj key = b.nullable(c) ? kSink : c;
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(states.size());
    ids.emplace(key, id);
    states.push_back(key);
    work.push_back(id);
    return id;
  };

  std::deque<int> work;
  Conj root;
  b.add_conjunct(root, b.intern(f));
  const int init = id_of(root, work);
  while (!work.empty()) {
    int q = work.front();
    work.pop_front();
    if (states[static_cast<std::size_t>(q)] == kSink) {
      raw.emplace_back(q, -1, std::vector<int>{}, q);
      continue;
    }
    const Conj c = states[static_cast<std::size_t>(q)];
    for (const Term& t : b.expand(c)) {
      int to = id_of(t.next, work);
      raw.emplace_back(q, t.require, t.forbid, to);
    }
  }

  // Keep states that can reach the sink.
  const int n = static_cast<int>(states.size());
  std::vector<char> live(static_cast<std::size_t>(n), 0);
  auto sink_it = ids.find(kSink);
  if (sink_it != ids.end()) {
    std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
    for (const auto& [from, req, forbid, to] : raw) rev[static_cast<std::size_t>(to)].push_back(from);
    std::deque<int> q{sink_it->second};
    live[static_cast<std::size_t>(sink_it->second)] = 1;
    while (!q.empty()) {
      int s = q.front();
      q.pop_front();
      for (int p : rev[static_cast<std::size_t>(s)])
        if (!live[static_cast<std::size_t>(p)]) {
          live[static_cast<std::size_t>(p)] = 1;
          q.push_back(p);
        }
    }
  }
  if (!live[static_cast<std::size_t>(init)]) return A;  // unsatisfiable: empty automaton

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s) {
    if (!live[static_cast<std::size_t>(s)]) continue;
    remap[static_cast<std::size_t>(s)] = static_cast<int>(A.labels_.size());
    const Conj& c = states[static_cast<std::size_t>(s)];
    A.labels_.push_back(c == kSink ? "accept" : b.label(c));
    if (c == kSink) A.accepting_.push_back(remap[static_cast<std::size_t>(s)]);
  }
  A.initial_ = {remap[static_cast<std::size_t>(init)]};

  std::set<std::tuple<int, int, std::vector<int>, int>> seen;
  for (const auto& [from, req, forbid, to] : raw) {
    int f2 = remap[static_cast<std::size_t>(from)], t2 = remap[static_cast<std::size_t>(to)];
    if (f2 < 0 || t2 < 0) continue;
    if (!seen.emplace(f2, req, forbid, t2).second) continue;
    Guard g;
    if (req >= 0) g.require = req;
    g.forbid = forbid;
    A.transitions_.push_back({f2, std::move(g), t2});
  }

  const std::size_t width = A.alphabet_.size() + 1;
  A.succ_.assign(A.labels_.size() * width, {});
  for (const Transition& t : A.transitions_) {
    for (std::size_t s = 0; s < width; ++s) {
      bool ok = s + 1 == width ? !t.guard.require : t.guard.admits(static_cast<int>(s));
      if (ok) A.succ_[static_cast<std::size_t>(t.from) * width + s].push_back(t.to);
    }
  }
  for (auto& v : A.succ_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  A.distances_ = accepting_distance(A);
  return A;
}

ReachableSet advance(const TaskAutomaton& a, const ReachableSet& r, std::string_view symbol) {
  return a.advance(r, symbol);
}

DistanceTable accepting_distance(const TaskAutomaton& a) {
  const std::size_t n = a.state_count();
  DistanceTable d;
  d.dist.assign(n, -1);
  std::vector<std::vector<StateId>> rev(n);
  for (const Transition& t : a.transitions()) rev[static_cast<std::size_t>(t.to)].push_back(t.from);
  std::deque<StateId> q;
  for (StateId s : a.accepting()) {
    d.dist[static_cast<std::size_t>(s)] = 0;
    q.push_back(s);
  }
  while (!q.empty()) {
    StateId s = q.front();
    q.pop_front();
    for (StateId p : rev[static_cast<std::size_t>(s)]) {
      if (d.dist[static_cast<std::size_t>(p)] >= 0) continue;
      d.dist[static_cast<std::size_t>(p)] = d.dist[static_cast<std::size_t>(s)] + 1;
      q.push_back(p);
    }
  }
  return d;
}

bool symbols_commute(const TaskAutomaton& a, int s1, int s2) {
  if (s1 == s2) return true;
  for (StateId q = 0; q < static_cast<StateId>(a.state_count()); ++q) {
    ReachableSet one{q};
    if (a.advance(a.advance(one, s1), s2) != a.advance(a.advance(one, s2), s1)) return false;
  }
  return true;
}

bool CompletionOracle::completable(const ReachableSet& r, std::uint64_t mask) const {
  std::lock_guard<std::mutex> lock(mu_);
  return search(r, mask);
}

bool CompletionOracle::search(const ReachableSet& r, std::uint64_t mask) const {
  if (r.empty()) return false;
  if (a_->intersects_accepting(r)) return true;
  auto key = std::make_pair(r, mask);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  bool ok = false;
  for (int s = 0; s < static_cast<int>(a_->alphabet().size()) && !ok; ++s) {
    if (!(mask >> s & 1U)) continue;
    ReachableSet next = a_->advance(r, s);
    if (!next.empty()) ok = search(next, mask & ~(std::uint64_t{1} << s));
  }
  memo_.emplace(std::move(key), ok);
  return ok;
}

}  // namespace fleet::logic
