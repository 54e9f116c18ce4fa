#include "fleet/model/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace fleet {

double normalize_angle(double theta) {
  const double two_pi = 2 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  if (t >= two_pi) t -= two_pi;
  return t;
}

Polygon::Polygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {}

double Polygon::area() const {
  double a = 0;
  for (std::size_t i = 0; i < v_.size(); ++i) a += v_[i].cross(v_[(i + 1) % v_.size()]);
  return std::abs(a) / 2;
}

Vec2 Polygon::centroid() const {
  if (v_.empty()) return {};
  double a = 0, cx = 0, cy = 0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 p = v_[i], q = v_[(i + 1) % v_.size()];
    double c = p.cross(q);
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a) < 1e-12) {
    Vec2 s;
    for (Vec2 p : v_) s = s + p;
    return s * (1.0 / static_cast<double>(v_.size()));
  }
  return {cx / (3 * a), cy / (3 * a)};
}

bool Polygon::contains(Vec2 p, double eps) const {
  if (v_.size() < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 a = v_[i], b = v_[(i + 1) % v_.size()];
    double c = (b - a).cross(p - a);
    if (std::abs(c) <= eps * std::max(1.0, (b - a).norm())) continue;
    int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

double Polygon::min_x() const {
  double m = v_.empty() ? 0 : v_[0].x;
  for (Vec2 p : v_) m = std::min(m, p.x);
  return m;
}
double Polygon::max_x() const {
  double m = v_.empty() ? 0 : v_[0].x;
  for (Vec2 p : v_) m = std::max(m, p.x);
  return m;
}
double Polygon::min_y() const {
  double m = v_.empty() ? 0 : v_[0].y;
  for (Vec2 p : v_) m = std::min(m, p.y);
  return m;
}
double Polygon::max_y() const {
  double m = v_.empty() ? 0 : v_[0].y;
  for (Vec2 p : v_) m = std::max(m, p.y);
  return m;
}

bool Polygon::is_convex() const {
  if (v_.size() < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 a = v_[i], b = v_[(i + 1) % v_.size()], c = v_[(i + 2) % v_.size()];
    double z = (b - a).cross(c - b);
    if (std::abs(z) < 1e-12) continue;
    int s = z > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return sign != 0;
}

namespace {

// Sutherland-Hodgman against the half-plane keep(p) (x >= bound or x <= bound).
std::vector<Vec2> clip_half(const std::vector<Vec2>& in, double bound, bool keep_above) {
  std::vector<Vec2> out;
  auto inside = [&](Vec2 p) { return keep_above ? p.x >= bound : p.x <= bound; };
  for (std::size_t i = 0; i < in.size(); ++i) {
    Vec2 a = in[i], b = in[(i + 1) % in.size()];
    bool ia = inside(a), ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      double t = (bound - a.x) / (b.x - a.x);
      out.push_back({bound, a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

}  // namespace

Polygon Polygon::clip_x(double lo, double hi) const {
  return Polygon(clip_half(clip_half(v_, lo, true), hi, false));
}

bool Polygon::span_at(double x, double& ymin, double& ymax) const {
  bool found = false;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    Vec2 a = v_[i], b = v_[(i + 1) % v_.size()];
    double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    if (x < lo - 1e-12 || x > hi + 1e-12) continue;
    auto take = [&](double y) {
      if (!found) {
        ymin = ymax = y;
        found = true;
      } else {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    };
    if (std::abs(b.x - a.x) < 1e-12) {
      take(a.y);
      take(b.y);
    } else {
      take(a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y));
    }
  }
  return found;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 < 1e-18) return distance(p, a);
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace fleet
