#pragma once

#include <random>
#include <string>
#include <vector>

#include "fleet/local/coalition.hpp"

namespace fleet::gen {

struct DcfInstance {
  std::vector<local::Pursuer> robots;
  std::vector<local::MovingTarget> targets;
  local::DcfConfig cfg;
};

// 5 pursuers, 5 drifting targets in a 20 m arena; target 0 needs two robots
inline DcfInstance random_dcf(std::uint64_t seed, double delayLo, double delayHi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(0, 20), v(-0.6, 0.6), sp(1.0, 2.0);
  DcfInstance d;
  for (int i = 0; i < 5; ++i) d.robots.push_back({"r" + std::to_string(i), {xy(rng), xy(rng)}, sp(rng)});
  for (int j = 0; j < 5; ++j)
    d.targets.push_back({"t" + std::to_string(j), {xy(rng), xy(rng)}, {v(rng), v(rng)}, j == 0 ? 2 : 1, 2.0, 1.0});
  d.cfg.delayLoMs = delayLo;
  d.cfg.delayHiMs = delayHi;
  d.cfg.seed = seed;
  d.cfg.arenaLo = {0, 0};
  d.cfg.arenaHi = {20, 20};
  return d;
}

}  // namespace fleet::gen
