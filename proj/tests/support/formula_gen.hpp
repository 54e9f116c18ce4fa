#pragma once

#include <random>
#include <string>
#include <vector>

#include "fleet/logic/formula.hpp"

namespace fleet::gen {

using logic::Formula;

/// Every formula of depth <= `depth` over `symbols`.
inline std::vector<Formula> all_formulas(const std::vector<std::string>& symbols, int depth) {
  std::vector<Formula> level{Formula::truth()};
  for (const auto& s : symbols) {
    level.push_back(Formula::atom(s));
    level.push_back(Formula::not_atom(s));
  }
  for (int d = 1; d <= depth; ++d) {
    std::vector<Formula> next = level;
    for (const auto& f : level) {
      next.push_back(Formula::next(f));
      next.push_back(Formula::eventually(f));
    }
    for (const auto& f : level)
      for (const auto& g : level) {
        next.push_back(Formula::conj(f, g));
        next.push_back(Formula::disj(f, g));
        next.push_back(Formula::until(f, g));
      }
    level = std::move(next);
  }
  return level;
}

/// Random formula of depth at most `depth`.
inline Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& symbols, int depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  auto leaf = [&]() {
    int r = std::uniform_int_distribution<int>(0, static_cast<int>(2 * symbols.size()))(rng);
    if (r == 0) return Formula::truth();
    const auto& s = symbols[static_cast<std::size_t>((r - 1) / 2)];
    return r % 2 ? Formula::atom(s) : Formula::not_atom(s);
  };
  if (depth == 0 || pick(rng) < 15) return leaf();
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: return Formula::next(random_formula(rng, symbols, depth - 1));
    case 1: return Formula::eventually(random_formula(rng, symbols, depth - 1));
    case 2: return Formula::conj(random_formula(rng, symbols, depth - 1), random_formula(rng, symbols, depth - 1));
    case 3: return Formula::disj(random_formula(rng, symbols, depth - 1), random_formula(rng, symbols, depth - 1));
    default: return Formula::until(random_formula(rng, symbols, depth - 1), random_formula(rng, symbols, depth - 1));
  }
}

/// Every word of length <= `max_len` over `symbols`.
inline std::vector<std::vector<std::string>> all_words(const std::vector<std::string>& symbols, int max_len) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& w : frontier)
      for (const auto& s : symbols) {
        auto x = w;
        x.push_back(s);
        next.push_back(x);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace fleet::gen
