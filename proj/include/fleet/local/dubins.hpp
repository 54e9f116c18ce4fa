#pragma once

#include <array>
#include <string>
#include <vector>

#include "fleet/model/geometry.hpp"

namespace fleet::local {

enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };

const char* to_string(DubinsWord w);

/// Shortest bounded-curvature path between two poses: three segments, each a
/// left arc, a straight line or a right arc.
struct MotionPrimitive {
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> segments{};  // metres
  double totalLength = 0;
  double radius = 1;
  Pose start;

  /// Pose after travelling `s` metres along the path (clamped).
  Pose at(double s) const;
  /// Poses every `step` metres, endpoints included.
  std::vector<Pose> sample(double step) const;
};

/// Shortest of the six words. radius > 0.
MotionPrimitive dubins_path(const Pose& a, const Pose& b, double radius);

/// Length of one specific word, or a negative value when it has no solution.
double dubins_word_length(const Pose& a, const Pose& b, double radius, DubinsWord w);

/// Curvature through three consecutive points (inverse circumradius).
double menger_curvature(Vec2 a, Vec2 b, Vec2 c);

}  // namespace fleet::local
