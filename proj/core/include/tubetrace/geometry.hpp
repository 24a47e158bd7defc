#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace tubetrace {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Distance from p to the closed segment [a, b].
inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + t * ab);
}

/// Integer pixel coordinate; origin top-left, x rightward, y downward.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(Pixel a, Pixel b) = default;
  friend auto operator<=>(Pixel a, Pixel b) {
    // row-major order
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline Point2 to_point(Pixel p) {
  return {static_cast<double>(p.x), static_cast<double>(p.y)};
}

struct Extent {
  int width = 0;
  int height = 0;

  bool contains(Point2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1.0 && p.y <= height - 1.0;
  }
  bool contains(Pixel p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  double diagonal() const { return std::hypot(double(width), double(height)); }
};

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

/// Signed smallest difference a - b, in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

/// Ordered polyline of continuous points with its Euclidean arc length.
class PlanarPath {
 public:
  PlanarPath() = default;
  explicit PlanarPath(std::vector<Point2> points) : points_(std::move(points)) {
    recompute_length();
  }

  const std::vector<Point2>& points() const { return points_; }
  double length() const { return length_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  void reverse();
  /// Appends points, skipping the first one if it duplicates the current tail.
  void append(const std::vector<Point2>& pts);
  void append(const PlanarPath& other) { append(other.points_); }

  /// Largest gap between consecutive points.
  double max_gap() const;
  /// Returns a copy resampled at (at most) unit arc-length spacing, keeping both ends.
  PlanarPath resampled(double spacing = 1.0) const;

 private:
  void recompute_length();

  std::vector<Point2> points_;
  double length_ = 0.0;
};

}  // namespace tubetrace
