#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fleet::logic {

enum class Op { True, Atom, NotAtom, And, Or, Next, Until, Eventually };

/// Immutable sc-LTL formula over task symbols, in positive normal form.
///
/// Negation is only representable directly on atoms (`NotAtom`), so every
/// value of this type is syntactically co-safe. Copies share structure.
class Formula {
 public:
  static Formula truth();
  static Formula atom(std::string symbol);
  static Formula not_atom(std::string symbol);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula next(Formula child);
  static Formula until(Formula lhs, Formula rhs);
  static Formula eventually(Formula child);

  Op op() const noexcept { return node_->op; }
  /// Atom name for Atom / NotAtom nodes, empty otherwise.
  const std::string& symbol() const noexcept { return node_->symbol; }
  /// First operand (the only operand of Next / Eventually).
  Formula lhs() const;
  /// Second operand of And / Or / Until.
  Formula rhs() const;

  std::set<std::string> atoms() const;
  std::size_t depth() const;
  std::string to_string() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op;
    std::string symbol;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Finite-word satisfaction, one task symbol per letter.
///
/// Positions range over 0..n where n = |word|. `True` holds everywhere,
/// including n; atoms, negated atoms and Next need a letter at the current
/// position. Until / Eventually may be discharged at n. The relation is
/// monotone: a satisfied word stays satisfied under any extension.
bool semantic_eval(const Formula& f, std::span<const std::string> word);

}  // namespace fleet::logic
