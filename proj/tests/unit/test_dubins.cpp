#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fleet/local/dubins.hpp"

using namespace fleet;
using namespace fleet::local;

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double t) {
  t = std::fmod(t, 2 * kPi);
  return t < 0 ? t + 2 * kPi : t;
}

Vec2 left_normal(double h) { return {-std::sin(h), std::cos(h)}; }
Vec2 dir(double h) { return {std::cos(h), std::sin(h)}; }

// Pose after an arc of angle t (side +1 left, -1 right) from pose p.
Pose arc(Pose p, int side, double t, double r) {
  Vec2 c = p.point() + left_normal(p.theta) * (side * r);
  double h = p.theta + side * t;
  Vec2 q = c - left_normal(h) * (side * r);
  return {q.x, q.y, h};
}

template <class F>
std::vector<double> roots(F f) {
  std::vector<double> out;
  const int n = 20000;
  double prev_t = 0, prev = f(0);
  for (int i = 1; i <= n; ++i) {
    double t = 2 * kPi * i / n, v = f(t);
    if (std::isfinite(prev) && std::isfinite(v) && ((prev <= 0) != (v <= 0))) {
      double lo = prev_t, hi = t, flo = prev;
      for (int k = 0; k < 80; ++k) {
        double mid = (lo + hi) / 2, fm = f(mid);
        if ((fm <= 0) == (flo <= 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back((lo + hi) / 2);
    }
    prev_t = t;
    prev = v;
  }
  return out;
}

// Independent shooting oracle: scan the first turning angle and solve the
// tangency residual for each of the six families.
double oracle_length(Pose a, Pose b, double r) {
  double best = INFINITY;
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      Vec2 c2 = b.point() + left_normal(b.theta) * (s2 * r);
      auto f = [&](double t) {
        Pose p = arc(a, s1, t, r);
        return dir(p.theta).cross(c2 - p.point()) - s2 * r;
      };
      for (double t : roots(f)) {
        Pose p = arc(a, s1, t, r);
        double straight = dir(p.theta).dot(c2 - p.point());
        if (straight < -1e-9) continue;
        double q = wrap(s2 * (b.theta - p.theta));
        if (2 * kPi - q < 1e-9) q = 0;
        best = std::min(best, r * t + std::max(0.0, straight) + r * q);
      }
    }
    // three-arc family with outer side s1
    Vec2 c3 = b.point() + left_normal(b.theta) * (s1 * r);
    auto g = [&](double t) {
      Pose p = arc(a, s1, t, r);
      Vec2 m = p.point() + left_normal(p.theta) * (-s1 * r);
      return distance(m, c3) - 2 * r;
    };
    for (double t : roots(g)) {
      Pose p = arc(a, s1, t, r);
      Vec2 m = p.point() + left_normal(p.theta) * (-s1 * r);
      Vec2 tp = (m + c3) * 0.5;
      double a0 = std::atan2(p.y - m.y, p.x - m.x), a1 = std::atan2(tp.y - m.y, tp.x - m.x);
      double sweep = s1 > 0 ? wrap(a0 - a1) : wrap(a1 - a0);  // middle arc turns the other way
      double h = p.theta - s1 * sweep;
      double q = wrap(s1 * (b.theta - h));
      if (2 * kPi - q < 1e-9) q = 0;
      best = std::min(best, r * (t + sweep + q));
    }
  }
  return best;
}

double angle_gap(double a, double b) {
  double d = wrap(a - b);
  return std::min(d, 2 * kPi - d);
}

}  // namespace

TEST(Dubins, CollinearIsStraight) {
  auto m = dubins_path({0, 0, 0}, {4, 0, 0}, 1);
  EXPECT_NEAR(m.totalLength, 4, 1e-12);
}

TEST(Dubins, ReversalMatchesShootingOracle) {
  auto m = dubins_path({0, 0, 0}, {0, 0, kPi}, 1);
  EXPECT_NEAR(m.totalLength, oracle_length({0, 0, 0}, {0, 0, kPi}, 1), 1e-6);
  Pose e = m.at(m.totalLength);
  EXPECT_NEAR(e.x, 0, 1e-9);
  EXPECT_NEAR(e.y, 0, 1e-9);
  EXPECT_NEAR(angle_gap(e.theta, kPi), 0, 1e-9);
}

TEST(Dubins, RandomPairsAgainstOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(-6, 6), th(0, 2 * kPi), rad(0.3, 2);
  for (int i = 0; i < 150; ++i) {
    Pose a{xy(rng), xy(rng), th(rng)}, b{xy(rng), xy(rng), th(rng)};
    double r = rad(rng);
    auto m = dubins_path(a, b, r);
    double o = oracle_length(a, b, r);
    ASSERT_NEAR(m.totalLength, o, 1e-6 * std::max(1.0, o)) << i;
  }
}

TEST(Dubins, EndpointsAndBounds) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> xy(-10, 10), th(0, 2 * kPi), rad(0.2, 3);
  for (int i = 0; i < 1000; ++i) {
    Pose a{xy(rng), xy(rng), th(rng)}, b{xy(rng), xy(rng), th(rng)};
    double r = rad(rng);
    auto m = dubins_path(a, b, r);
    ASSERT_GE(m.totalLength + 1e-9, distance(a.point(), b.point()));
    ASSERT_NEAR(m.totalLength, m.segments[0] + m.segments[1] + m.segments[2], 1e-9);
    Pose e = m.at(m.totalLength);
    ASSERT_NEAR(e.x, b.x, 1e-7);
    ASSERT_NEAR(e.y, b.y, 1e-7);
    ASSERT_NEAR(angle_gap(e.theta, b.theta), 0, 1e-7);
    // no word is shorter than the chosen one
    for (int w = 0; w < 6; ++w) {
      double len = dubins_word_length(a, b, r, static_cast<DubinsWord>(w));
      if (len >= 0) {
        ASSERT_LE(m.totalLength, len + 1e-12);
      }
    }
    auto pts = m.sample(r / 10);
    for (std::size_t k = 2; k < pts.size(); ++k)
      ASSERT_LE(menger_curvature(pts[k - 2].point(), pts[k - 1].point(), pts[k].point()), 1 / r + 1e-6);
  }
}
