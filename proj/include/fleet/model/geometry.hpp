#pragma once

#include <cmath>
#include <vector>

namespace fleet {

struct Vec2 {
  double x = 0;
  double y = 0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Pose {
  double x = 0;
  double y = 0;
  double theta = 0;  // [0, 2pi)

  Vec2 point() const { return {x, y}; }
};

double normalize_angle(double theta);

/// Convex polygon, vertices in either winding order.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const noexcept { return v_; }
  bool empty() const noexcept { return v_.size() < 3; }
  double area() const;
  Vec2 centroid() const;
  bool contains(Vec2 p, double eps = 1e-9) const;
  double min_x() const;
  double max_x() const;
  double min_y() const;
  double max_y() const;
  bool is_convex() const;

  /// Part of the polygon with lo <= x <= hi.
  Polygon clip_x(double lo, double hi) const;
  /// Vertical extent [ymin, ymax] of the polygon at abscissa x; false if none.
  bool span_at(double x, double& ymin, double& ymax) const;

 private:
  std::vector<Vec2> v_;
};

/// Shortest distance from p to segment ab.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

}  // namespace fleet
