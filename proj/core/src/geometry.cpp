#include "tubetrace/geometry.hpp"

#include <algorithm>

namespace tubetrace {

void PlanarPath::recompute_length() {
  length_ = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i)
    length_ += distance(points_[i - 1], points_[i]);
}

void PlanarPath::reverse() { std::reverse(points_.begin(), points_.end()); }

void PlanarPath::append(const std::vector<Point2>& pts) {
  for (const auto& p : pts) {
    if (!points_.empty()) {
      if (points_.back() == p) continue;
      length_ += distance(points_.back(), p);
    }
    points_.push_back(p);
  }
}

double PlanarPath::max_gap() const {
  double g = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i)
    g = std::max(g, distance(points_[i - 1], points_[i]));
  return g;
}

PlanarPath PlanarPath::resampled(double spacing) const {
  if (points_.size() < 2) return *this;
  std::vector<Point2> out{points_.front()};
  double carry = 0.0;  // arc length travelled since the last emitted sample
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const Point2 a = points_[i - 1];
    const Point2 b = points_[i];
    const double seg = distance(a, b);
    if (seg == 0.0) continue;
    double s = spacing - carry;
    while (s <= seg + 1e-12) {
      const double t = std::min(s / seg, 1.0);
      out.push_back(a + t * (b - a));
      s += spacing;
    }
    carry = seg - (s - spacing);
  }
  if (distance(out.back(), points_.back()) > 1e-9) out.push_back(points_.back());
  return PlanarPath(std::move(out));
}

}  // namespace tubetrace
