#include "fleet/logic/formula.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace fleet::logic {

Formula Formula::truth() { return Formula(std::make_shared<const Node>(Node{Op::True, {}, {}, {}})); }

Formula Formula::atom(std::string symbol) {
  return Formula(std::make_shared<const Node>(Node{Op::Atom, std::move(symbol), {}, {}}));
}

Formula Formula::not_atom(std::string symbol) {
  return Formula(std::make_shared<const Node>(Node{Op::NotAtom, std::move(symbol), {}, {}}));
}

Formula Formula::conj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Op::And, {}, lhs.node_, rhs.node_}));
}

Formula Formula::disj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Op::Or, {}, lhs.node_, rhs.node_}));
}

Formula Formula::next(Formula child) {
  return Formula(std::make_shared<const Node>(Node{Op::Next, {}, child.node_, {}}));
}

Formula Formula::until(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Op::Until, {}, lhs.node_, rhs.node_}));
}

Formula Formula::eventually(Formula child) {
  return Formula(std::make_shared<const Node>(Node{Op::Eventually, {}, child.node_, {}}));
}

Formula Formula::lhs() const { return Formula(node_->a); }
Formula Formula::rhs() const { return Formula(node_->b); }

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  std::function<void(const Node*)> walk = [&](const Node* n) {
    if (!n) return;
    if (n->op == Op::Atom || n->op == Op::NotAtom) out.insert(n->symbol);
    walk(n->a.get());
    walk(n->b.get());
  };
  walk(node_.get());
  return out;
}

std::size_t Formula::depth() const {
  std::function<std::size_t(const Node*)> d = [&](const Node* n) -> std::size_t {
    if (!n) return 0;
    switch (n->op) {
      case Op::True:
      case Op::Atom:
      case Op::NotAtom:
        return 0;
      default:
        return 1 + std::max(d(n->a.get()), d(n->b.get()));
    }
  };
  return d(node_.get());
}

std::string Formula::to_string() const {
  switch (op()) {
    case Op::True: return "true";
    case Op::Atom: return symbol();
    case Op::NotAtom: return "!" + symbol();
    case Op::And: return "(" + lhs().to_string() + " & " + rhs().to_string() + ")";
    case Op::Or: return "(" + lhs().to_string() + " | " + rhs().to_string() + ")";
    case Op::Next: return "X " + lhs().to_string();
    case Op::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
    case Op::Eventually: return "F " + lhs().to_string();
  }
  return {};
}

bool operator==(const Formula& a, const Formula& b) {
  std::function<bool(const Formula::Node*, const Formula::Node*)> eq =
      [&](const Formula::Node* x, const Formula::Node* y) -> bool {
    if (x == y) return true;
    if (!x || !y) return false;
    return x->op == y->op && x->symbol == y->symbol && eq(x->a.get(), y->a.get()) &&
           eq(x->b.get(), y->b.get());
  };
  return eq(a.node_.get(), b.node_.get());
}

namespace {

// Memoised evaluation over (subformula, position).
class Evaluator {
 public:
  explicit Evaluator(std::span<const std::string> word) : word_(word) {}

  bool sat(const Formula& f, std::size_t i) {
    const std::size_t n = word_.size();
    switch (f.op()) {
      case Op::True: return true;
      case Op::Atom: return i < n && word_[i] == f.symbol();
      case Op::NotAtom: return i < n && word_[i] != f.symbol();
      case Op::And: return sat(f.lhs(), i) && sat(f.rhs(), i);
      case Op::Or: return sat(f.lhs(), i) || sat(f.rhs(), i);
      case Op::Next: return i < n && sat(f.lhs(), i + 1);
      case Op::Eventually:
        for (std::size_t j = i; j <= n; ++j)
          if (sat(f.lhs(), j)) return true;
        return false;
      case Op::Until:
        for (std::size_t j = i; j <= n; ++j) {
          if (sat(f.rhs(), j)) return true;
          if (!sat(f.lhs(), j)) return false;
        }
        return false;
    }
    return false;
  }

 private:
  std::span<const std::string> word_;
};

}  // namespace

bool semantic_eval(const Formula& f, std::span<const std::string> word) {
  Evaluator ev(word);
  return ev.sat(f, 0);
}

}  // namespace fleet::logic
