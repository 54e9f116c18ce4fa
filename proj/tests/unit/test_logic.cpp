#include <gtest/gtest.h>

#include <random>

#include "../support/formula_gen.hpp"
#include "fleet/errors.hpp"
#include "fleet/logic/automaton.hpp"
#include "fleet/logic/parser.hpp"

using namespace fleet;
using namespace fleet::logic;
using Word = std::vector<std::string>;

namespace {

const char* kTemplate = "F(del & F surv) & (!cap U surv)";

bool eval(const Formula& f, const Word& w) { return semantic_eval(f, w); }

}  // namespace

TEST(Parser, EventuallyChain) {
  Formula f = parse_formula("F(w1 & F w2)");
  EXPECT_EQ(f, Formula::eventually(Formula::conj(Formula::atom("w1"), Formula::eventually(Formula::atom("w2")))));
}

TEST(Parser, ExperimentTemplate) {
  Formula f = parse_formula(kTemplate);
  Formula expect = Formula::conj(
      Formula::eventually(Formula::conj(Formula::atom("del"), Formula::eventually(Formula::atom("surv")))),
      Formula::until(Formula::not_atom("cap"), Formula::atom("surv")));
  EXPECT_EQ(f, expect);
}

TEST(Parser, AlwaysIsRejected) { EXPECT_THROW(parse_formula("G w1"), NotCoSafe); }

TEST(Parser, NegationOnlyOnAtoms) {
  EXPECT_THROW(parse_formula("!(a & b)"), NotCoSafe);
  EXPECT_THROW(parse_formula("!F a"), NotCoSafe);
  EXPECT_EQ(parse_formula("!!a"), Formula::atom("a"));
  EXPECT_EQ(parse_formula("!(a)"), Formula::not_atom("a"));
}

TEST(Parser, Precedence) {
  // ! > X,F > U > & > |
  EXPECT_EQ(parse_formula("a | b & c"),
            Formula::disj(Formula::atom("a"), Formula::conj(Formula::atom("b"), Formula::atom("c"))));
  EXPECT_EQ(parse_formula("a & b U c"),
            Formula::conj(Formula::atom("a"), Formula::until(Formula::atom("b"), Formula::atom("c"))));
  EXPECT_EQ(parse_formula("F a U b"),
            Formula::until(Formula::eventually(Formula::atom("a")), Formula::atom("b")));
  EXPECT_EQ(parse_formula("a U b U c"),
            Formula::until(Formula::until(Formula::atom("a"), Formula::atom("b")), Formula::atom("c")));
  EXPECT_EQ(parse_formula("X !a"), Formula::next(Formula::not_atom("a")));
  EXPECT_EQ(parse_formula("true U a"), Formula::until(Formula::truth(), Formula::atom("a")));
}

TEST(Parser, SyntaxErrorsCarryPosition) {
  try {
    parse_formula("F (a & )");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 7u);
  }
  try {
    parse_formula("a b");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 2u);
    EXPECT_EQ(e.expected(), "end of input");
  }
  EXPECT_THROW(parse_formula(""), SyntaxError);
  EXPECT_THROW(parse_formula("(a"), SyntaxError);
  EXPECT_THROW(parse_formula("a # b"), SyntaxError);
}

TEST(Parser, RoundTripThroughText) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Formula f = gen::random_formula(rng, {"a", "b", "c"}, 3);
    EXPECT_EQ(parse_formula(f.to_string()), f) << f.to_string();
  }
}

TEST(Semantics, Examples) {
  EXPECT_TRUE(eval(parse_formula("F a"), {"b", "a"}));
  EXPECT_FALSE(eval(parse_formula("a U b"), {}));
  EXPECT_FALSE(eval(parse_formula("!c U b"), {"a", "c", "b"}));
  EXPECT_TRUE(eval(parse_formula("!c U b"), {"a", "b"}));
  EXPECT_TRUE(eval(parse_formula("true"), {}));
  EXPECT_FALSE(eval(parse_formula("X true"), {}));
  EXPECT_TRUE(eval(parse_formula("X true"), {"a"}));
}

TEST(Semantics, MonotoneUnderExtension) {
  std::mt19937_64 rng(11);
  auto words = gen::all_words({"a", "b", "c"}, 4);
  for (int i = 0; i < 300; ++i) {
    Formula f = gen::random_formula(rng, {"a", "b", "c"}, 3);
    for (const auto& w : words) {
      if (!eval(f, w)) continue;
      for (const char* s : {"a", "b", "c"}) {
        Word x = w;
        x.push_back(s);
        ASSERT_TRUE(eval(f, x)) << f.to_string();
      }
    }
  }
}

TEST(Automaton, EventuallyOneSymbol) {
  TaskAutomaton A = build_automaton(parse_formula("F a"));
  EXPECT_EQ(A.state_count(), 2u);
  EXPECT_TRUE(A.accepts(Word{"a"}));
  EXPECT_TRUE(A.accepts(Word{"b", "a"}));
  EXPECT_FALSE(A.accepts(Word{}));
  EXPECT_FALSE(A.accepts(Word{"b", "b"}));
  auto acc = A.advance(A.initial(), "a");
  EXPECT_TRUE(A.intersects_accepting(acc));
  EXPECT_EQ(A.advance(acc, "a"), acc);
  EXPECT_EQ(A.distances()[A.initial()[0]], 1);
  EXPECT_EQ(A.distances()[A.accepting()[0]], 0);
}

TEST(Automaton, GuardedUntil) {
  const std::vector<std::string> extra{"a"};
  TaskAutomaton A = build_automaton(parse_formula("!c U b"), extra);
  EXPECT_TRUE(A.accepts(Word{"b"}));
  EXPECT_TRUE(A.accepts(Word{"a", "b"}));
  EXPECT_FALSE(A.accepts(Word{"c", "b"}));
  EXPECT_TRUE(A.advance(A.initial(), "c").empty());
  for (const auto& w : gen::all_words({"a", "b", "c"}, 4))
    EXPECT_EQ(A.accepts(w), eval(parse_formula("!c U b"), w));
}

TEST(Automaton, ExperimentTemplate) {
  Formula f = parse_formula(kTemplate);
  TaskAutomaton A = build_automaton(f);
  EXPECT_TRUE(A.accepts(Word{"del", "surv"}));
  EXPECT_FALSE(A.accepts(Word{"cap", "surv", "del"}));
  // distance of the initial state equals the shortest accepted word
  std::size_t shortest = 99;
  for (const auto& w : gen::all_words({"del", "surv", "cap"}, 4))
    if (eval(f, w)) shortest = std::min(shortest, w.size());
  EXPECT_EQ(static_cast<std::size_t>(A.distances()[A.initial()[0]]), shortest);
}

TEST(Automaton, TwoStepDistance) {
  TaskAutomaton A = build_automaton(parse_formula("F(a & F b)"));
  EXPECT_EQ(A.distances()[A.initial()[0]], 2);
}

TEST(Automaton, UnknownSymbolOnAdvance) {
  TaskAutomaton A = build_automaton(parse_formula("F a"));
  EXPECT_THROW(A.advance(A.initial(), "zz"), UnknownSymbol);
}

TEST(Automaton, UnsatisfiableIsEmpty) {
  TaskAutomaton A = build_automaton(parse_formula("a & b"));
  EXPECT_TRUE(A.is_empty());
  EXPECT_FALSE(A.accepts(Word{"a"}));
}

TEST(Automaton, GuardsNeverRequireAndForbidSameSymbol) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    TaskAutomaton A = build_automaton(gen::random_formula(rng, {"a", "b", "c"}, 3));
    for (const auto& t : A.transitions())
      if (t.guard.require) {
        EXPECT_FALSE(std::count(t.guard.forbid.begin(), t.guard.forbid.end(), *t.guard.require));
      }
  }
}

// All formulas of depth <= 2 over two symbols, every word of length <= 4
// over three symbols (the third is foreign to the automaton).
TEST(Automaton, MatchesSemanticsExhaustiveSmall) {
  auto formulas = gen::all_formulas({"a", "b"}, 2);
  auto words = gen::all_words({"a", "b", "c"}, 4);
  std::size_t cases = 0;
  for (const auto& f : formulas) {
    TaskAutomaton A = build_automaton(f);
    for (const auto& w : words) {
      ASSERT_EQ(A.accepts(w), eval(f, w)) << f.to_string();
      ++cases;
    }
  }
  EXPECT_GT(cases, 1000000u);
}

class AutomatonProperties : public ::testing::TestWithParam<int> {};

TEST_P(AutomatonProperties, StructuralInvariants) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const std::vector<std::string> syms{"a", "b", "c"};
  auto words = gen::all_words(syms, 5);
  for (int i = 0; i < 40; ++i) {
    Formula f = gen::random_formula(rng, syms, 3);
    TaskAutomaton A = build_automaton(f, syms);
    if (A.is_empty()) {
      for (const auto& w : words) ASSERT_FALSE(eval(f, w));
      continue;
    }
    const auto& D = A.distances();
    // every state reaches acceptance, accepting iff distance 0
    for (StateId q = 0; q < static_cast<StateId>(A.state_count()); ++q) {
      ASSERT_GE(D[q], 0);
      ASSERT_EQ(D[q] == 0, A.is_accepting(q));
    }
    // triangle inequality along edges
    for (const auto& t : A.transitions()) ASSERT_LE(D[t.from], D[t.to] + 1);
    // union monotonicity
    for (StateId p = 0; p < static_cast<StateId>(A.state_count()); ++p)
      for (StateId q = p; q < static_cast<StateId>(A.state_count()); ++q)
        for (int s = 0; s < 3; ++s) {
          ReachableSet both = p == q ? ReachableSet{p} : ReachableSet{p, q};
          ReachableSet u = A.advance(ReachableSet{p}, s);
          ReachableSet v = A.advance(ReachableSet{q}, s);
          ReachableSet uv;
          std::set_union(u.begin(), u.end(), v.begin(), v.end(), std::back_inserter(uv));
          ASSERT_EQ(A.advance(both, s), uv);
        }
    for (const auto& w : words) {
      ASSERT_EQ(A.accepts(w), eval(f, w)) << f.to_string();
      // absorption and distance decrease along accepted runs
      ReachableSet cur = A.initial();
      bool hit = A.intersects_accepting(cur);
      int prev = D.min_over(cur);
      for (const auto& s : w) {
        cur = A.advance(cur, s);
        if (cur.empty()) break;
        int d = D.min_over(cur);
        ASSERT_GE(d, prev - 1);
        prev = d;
        if (hit) {
          ASSERT_TRUE(A.intersects_accepting(cur));
        }
        hit = hit || A.intersects_accepting(cur);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AutomatonProperties, ::testing::Range(1, 6));

TEST(Automaton, CommutingSymbols) {
  TaskAutomaton A = build_automaton(parse_formula("F a & F b & F(c & F a)"));
  int a = *A.symbol_index("a"), b = *A.symbol_index("b"), c = *A.symbol_index("c");
  EXPECT_TRUE(symbols_commute(A, a, b));
  EXPECT_FALSE(symbols_commute(A, a, c));
  TaskAutomaton B = build_automaton(parse_formula("F a & F b"));
  EXPECT_TRUE(symbols_commute(B, 0, 1));
}

TEST(Automaton, CompletionOracle) {
  TaskAutomaton A = build_automaton(parse_formula("F(a & F b)"));
  CompletionOracle oracle(&A);
  int a = *A.symbol_index("a"), b = *A.symbol_index("b");
  const std::uint64_t both = (1u << a) | (1u << b);
  EXPECT_TRUE(oracle.completable(A.initial(), both));
  EXPECT_FALSE(oracle.completable(A.initial(), 1u << a));
  // b consumed first leaves a alone, which cannot finish the mission
  EXPECT_FALSE(oracle.completable(A.advance(A.initial(), b), 1u << a));
  EXPECT_TRUE(oracle.completable(A.advance(A.initial(), a), 1u << b));
}
