#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tubetrace/geometry.hpp"
#include "tubetrace/imaging.hpp"

namespace tubetrace {

/// A planar position augmented with an orientation in [0, 2pi).
struct LiftedPoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  LiftedPoint() = default;
  LiftedPoint(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}
  Point2 planar() const { return {x, y}; }
};

/// Inclusive integer rectangle of pixel positions.
struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Discretised orientation-lifted domain: pixel lattice times n_theta periodic bins.
class LiftedGrid {
 public:
  LiftedGrid(int width, int height, int n_theta, std::optional<Box> bounding_box = {});
  /// Grid over an explicit rectangle (coordinates may be negative).
  LiftedGrid(Box box, int n_theta);

  int n_theta() const { return n_theta_; }
  double dtheta() const { return kTwoPi / n_theta_; }
  const Box& box() const { return box_; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(box_.width()) * box_.height() * n_theta_;
  }

  bool contains(int x, int y) const { return box_.contains(x, y); }
  std::size_t index(int x, int y, int bin) const {
    return (static_cast<std::size_t>(y - box_.y0) * box_.width() + (x - box_.x0)) * n_theta_ +
           bin;
  }
  struct Node {
    int x, y, bin;
  };
  Node node(std::size_t index) const;

  int bin_of(double theta) const;
  double theta_of(int bin) const { return bin * dtheta(); }
  /// Nearest lattice node of a continuous lifted point.
  Node snap(const LiftedPoint& p) const;
  bool contains(const LiftedPoint& p) const;

 private:
  Box box_;
  int n_theta_;
};

/// One admissible lattice move from an orientation bin.
struct MotionPrimitive {
  int dx = 0;
  int dy = 0;
  int dtheta = 0;  // change in orientation bins
  double cost = 0.0;
};

struct ElasticaParams {
  int n_theta = 32;
  int reach = 2;
  int dtheta_max = 2;
  int box_margin = 20;
};

/// Discrete elastica energy of a straight move of length |displacement| that turns by
/// `dtheta` radians: ds * (1 + (xi * dtheta / ds)^2).
double elastica_cost(Point2 displacement, double dtheta, double xi);

/// Bending-plus-length energy of the smallest-bending smooth curve leaving `displacement`'s
/// origin with heading `theta_from` and reaching its tip with heading `theta_to`
/// (quadratic heading profile, small-angle form):
///   ds + xi^2 * 4 (a^2 + a b + b^2) / ds,  a, b = end headings relative to the chord.
/// Coincides with elastica_cost when the chord bisects the two headings.
double elastica_move_cost(Point2 displacement, double theta_from, double theta_to, double xi);

/// Admissible moves for every orientation bin, indexed [bin][k].
std::vector<std::vector<MotionPrimitive>> build_primitives(int n_theta, int reach, double xi,
                                                           int dtheta_max = 2);

/// Geodesic distances from one lifted source over a LiftedGrid.
class LiftedDistanceMap {
 public:
  static constexpr std::int64_t kNoPredecessor = -1;

  LiftedDistanceMap(LiftedGrid grid, LiftedPoint source, double xi,
                    std::vector<std::vector<MotionPrimitive>> primitives);

  const LiftedGrid& grid() const { return grid_; }
  const LiftedPoint& source() const { return source_; }
  double xi() const { return xi_; }
  const std::vector<std::vector<MotionPrimitive>>& primitives() const { return primitives_; }

  bool reached(std::size_t node) const { return reached_[node] != 0; }
  /// Distance of a reached node; only meaningful when reached(node).
  double value(std::size_t node) const { return values_[node]; }
  std::int64_t predecessor(std::size_t node) const { return predecessor_[node]; }
  /// Distance at the lattice node nearest to `p`, or nullopt when unreached/outside.
  std::optional<double> value_at(const LiftedPoint& p) const;
  /// Order in which nodes were settled (values are non-decreasing along it).
  const std::vector<std::size_t>& settle_order() const { return settle_order_; }

  /// Runs label setting; stops early once `stop_at` is settled, if given.
  void solve(std::optional<std::size_t> stop_at = {});

 private:
  LiftedGrid grid_;
  LiftedPoint source_;
  double xi_;
  std::vector<std::vector<MotionPrimitive>> primitives_;
  std::vector<double> values_;
  std::vector<std::uint8_t> reached_;
  std::vector<std::int64_t> predecessor_;
  std::vector<std::size_t> settle_order_;
};

/// Complete distance map from `source` (throws InvalidArgument when outside the grid).
LiftedDistanceMap distance_map(const LiftedGrid& grid, const LiftedPoint& source, double xi,
                               const ElasticaParams& params = {});

/// Planar projection of the optimal lifted path, from target back to the source.
PlanarPath backtrack(const LiftedDistanceMap& map, const LiftedPoint& target);

struct GeodesicResult {
  /// nullopt when the target is unreachable inside the bounding box.
  std::optional<double> cost;
  /// Runs from a to b; empty when unreachable.
  PlanarPath path;
};

/// Elastica geodesic between two lifted points over the bounding box of both, dilated by
/// params.box_margin and optionally clipped to `clip`.
GeodesicResult lifted_distance(const LiftedPoint& a, const LiftedPoint& b, double xi,
                               const ElasticaParams& params = {},
                               std::optional<Extent> clip = {});

/// Isotropic planar minimal path with potential exp(-contrast * field) + 0.01.
PlanarPath isotropic_trace(const ScalarField& field, Point2 start, Point2 end, double contrast);

/// Debug view of one orientation slice, normalised to [0, 1] (unreached = 1).
RasterImage distance_slice(const LiftedDistanceMap& map, int bin);

}  // namespace tubetrace
