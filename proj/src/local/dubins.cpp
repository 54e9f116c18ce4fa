#include "fleet/local/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace fleet::local {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double mod2pi(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0) r += kTwoPi;
  // keep tiny negative rounding at zero rather than wrapping to 2pi
  if (kTwoPi - r < 1e-12) r = 0;
  return r;
}

// Segment types per word: +1 left, 0 straight, -1 right.
constexpr std::array<std::array<int, 3>, 6> kTypes{{
    {{1, 0, 1}},    // LSL
    {{-1, 0, -1}},  // RSR
    {{1, 0, -1}},   // LSR
    {{-1, 0, 1}},   // RSL
    {{-1, 1, -1}},  // RLR
    {{1, -1, 1}},   // LRL
}};

struct Normalized {
  double alpha, beta, d;
};

// Normalized (unit radius) segment parameters for one word.
std::optional<std::array<double, 3>> solve(const Normalized& n, DubinsWord w) {
  const double a = n.alpha, b = n.beta, d = n.d;
  const double sa = std::sin(a), sb = std::sin(b), ca = std::cos(a), cb = std::cos(b);
  const double cab = std::cos(a - b);
  switch (w) {
    case DubinsWord::LSL: {
      double p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb);
      if (p2 < 0) return std::nullopt;
      double th = std::atan2(cb - ca, d + sa - sb);
      return std::array<double, 3>{mod2pi(-a + th), std::sqrt(p2), mod2pi(b - th)};
    }
    case DubinsWord::RSR: {
      double p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa);
      if (p2 < 0) return std::nullopt;
      double th = std::atan2(ca - cb, d - sa + sb);
      return std::array<double, 3>{mod2pi(a - th), std::sqrt(p2), mod2pi(-b + th)};
    }
    case DubinsWord::LSR: {
      double p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb);
      if (p2 < 0) return std::nullopt;
      double p = std::sqrt(p2);
      double th = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      return std::array<double, 3>{mod2pi(-a + th), p, mod2pi(-mod2pi(b) + th)};
    }
    case DubinsWord::RSL: {
      double p2 = -2 + d * d + 2 * cab - 2 * d * (sa + sb);
      if (p2 < 0) return std::nullopt;
      double p = std::sqrt(p2);
      double th = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      return std::array<double, 3>{mod2pi(a - th), p, mod2pi(b - th)};
    }
    case DubinsWord::RLR: {
      double tmp = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8;
      if (std::abs(tmp) > 1) return std::nullopt;
      double p = mod2pi(kTwoPi - std::acos(tmp));
      double t = mod2pi(a - std::atan2(ca - cb, d - sa + sb) + p / 2);
      return std::array<double, 3>{t, p, mod2pi(a - b - t + p)};
    }
    case DubinsWord::LRL: {
      double tmp = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8;
      if (std::abs(tmp) > 1) return std::nullopt;
      double p = mod2pi(kTwoPi - std::acos(tmp));
      double t = mod2pi(-a - std::atan2(ca - cb, d + sa - sb) + p / 2);
      return std::array<double, 3>{t, p, mod2pi(mod2pi(b) - a - t + p)};
    }
  }
  return std::nullopt;
}

Normalized normalize(const Pose& a, const Pose& b, double r) {
  double dx = b.x - a.x, dy = b.y - a.y;
  double D = std::hypot(dx, dy);
  double th = D > 0 ? mod2pi(std::atan2(dy, dx)) : 0.0;
  return {mod2pi(a.theta - th), mod2pi(b.theta - th), D / r};
}

Pose advance_segment(Pose p, int type, double len, double r) {
  if (type == 0) {
    p.x += len * std::cos(p.theta);
    p.y += len * std::sin(p.theta);
    return p;
  }
  double phi = len / r;
  if (type > 0) {
    double t2 = p.theta + phi;
    p.x += r * (std::sin(t2) - std::sin(p.theta));
    p.y -= r * (std::cos(t2) - std::cos(p.theta));
    p.theta = t2;
  } else {
    double t2 = p.theta - phi;
    p.x -= r * (std::sin(t2) - std::sin(p.theta));
    p.y += r * (std::cos(t2) - std::cos(p.theta));
    p.theta = t2;
  }
  p.theta = mod2pi(p.theta);
  return p;
}

}  // namespace

const char* to_string(DubinsWord w) {
  switch (w) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::RLR: return "RLR";
    case DubinsWord::LRL: return "LRL";
  }
  return "?";
}

double dubins_word_length(const Pose& a, const Pose& b, double radius, DubinsWord w) {
  auto seg = solve(normalize(a, b, radius), w);
  if (!seg) return -1;
  return ((*seg)[0] + (*seg)[1] + (*seg)[2]) * radius;
}

MotionPrimitive dubins_path(const Pose& a, const Pose& b, double radius) {
  const Normalized n = normalize(a, b, radius);
  MotionPrimitive best;
  best.radius = radius;
  best.start = {a.x, a.y, mod2pi(a.theta)};
  best.totalLength = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    auto w = static_cast<DubinsWord>(i);
    auto seg = solve(n, w);
    if (!seg) continue;
    double len = ((*seg)[0] + (*seg)[1] + (*seg)[2]) * radius;
    if (len < best.totalLength) {
      best.word = w;
      best.totalLength = len;
      for (int k = 0; k < 3; ++k) best.segments[static_cast<std::size_t>(k)] = (*seg)[static_cast<std::size_t>(k)] * radius;
    }
  }
  return best;
}

Pose MotionPrimitive::at(double s) const {
  s = std::clamp(s, 0.0, totalLength);
  const auto& types = kTypes[static_cast<std::size_t>(word)];
  Pose p = start;
  for (std::size_t k = 0; k < 3; ++k) {
    double len = std::min(s, segments[k]);
    p = advance_segment(p, types[k], len, radius);
    s -= len;
    if (s <= 0) break;
  }
  return p;
}

std::vector<Pose> MotionPrimitive::sample(double step) const {
  std::vector<Pose> out;
  if (step <= 0) step = totalLength / 100;
  for (double s = 0; s < totalLength; s += step) out.push_back(at(s));
  out.push_back(at(totalLength));
  return out;
}

double menger_curvature(Vec2 a, Vec2 b, Vec2 c) {
  double ab = distance(a, b), bc = distance(b, c), ca = distance(c, a);
  double denom = ab * bc * ca;
  if (denom < 1e-15) return 0;
  return 2 * std::abs((b - a).cross(c - a)) / denom;
}

}  // namespace fleet::local
