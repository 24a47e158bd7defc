#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "tubetrace/geometry.hpp"

namespace tubetrace {

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        values_(static_cast<std::size_t>(width) * height, fill) {}
  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Extent extent() const { return {width_, height_}; }
  std::size_t size() const { return values_.size(); }

  T& at(int x, int y) { return values_[index(x, y)]; }
  const T& at(int x, int y) const { return values_[index(x, y)]; }
  T& at(Pixel p) { return at(p.x, p.y); }
  const T& at(Pixel p) const { return at(p.x, p.y); }

  /// Value with indices clamped to the border.
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return at(x, y);
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

/// Grayscale intensities in [0, 1].
using RasterImage = Grid<double>;
/// Non-negative per-pixel tubularity scores.
using ScalarField = Grid<double>;
/// std::vector<bool> is avoided so that values() can hand out a span.
using BinaryMask = Grid<std::uint8_t>;

/// A disjoint centerline fragment traced from a skeleton.
struct Segment {
  int id = 0;
  std::vector<Pixel> points;
  /// Unit tangents pointing away from the segment interior at each end.
  Point2 tangent_a;
  Point2 tangent_b;

  Pixel endpoint_a() const { return points.front(); }
  Pixel endpoint_b() const { return points.back(); }
  Pixel endpoint(int which) const { return which == 0 ? endpoint_a() : endpoint_b(); }
  Point2 tangent(int which) const { return which == 0 ? tangent_a : tangent_b; }
};

struct ImagingParams {
  std::vector<double> scales{1.0, 2.0, 3.0};
  double threshold = 0.15;
  int min_length = 3;
  bool bright_on_dark = true;
};

/// Loads an 8-bit PGM (P5, or ASCII P2) or, when built with libpng, a PNG.
RasterImage load_image(const std::filesystem::path& path);
/// Decodes an in-memory image file (format sniffed from its magic bytes).
RasterImage decode_image(std::span<const std::uint8_t> bytes);
/// Encodes an 8-bit binary PGM; values are clamped to [0, 1] and rounded.
std::vector<std::uint8_t> encode_pgm(const RasterImage& img);
void save_pgm(const RasterImage& img, const std::filesystem::path& path);

/// Multi-scale Hessian ridge score (Frangi-style), rescaled to [0, 1].
ScalarField tubularity(const RasterImage& img, std::span<const double> scales,
                       bool bright_on_dark = true);

BinaryMask binarize(const ScalarField& field, double threshold);

/// Two-subcycle thinning followed by removal of leftover 2x2 blocks.
BinaryMask skeletonize(const BinaryMask& mask);

/// Deletes branch pixels and traces each remaining component into a Segment.
std::vector<Segment> extract_segments(const BinaryMask& skeleton, int min_length);

/// Full chain: tubularity -> binarize -> skeletonize -> extract_segments.
std::vector<Segment> segments_from_image(const RasterImage& img,
                                         const ImagingParams& params);

/// Least-squares direction of the last `window` points at one end, pointing outward.
Point2 fit_end_tangent(std::span<const Pixel> points, bool at_front, int window = 5);

namespace detail {
/// Ring of 8 neighbours, clockwise from north.
inline constexpr int kRingDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr int kRingDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

/// Skeleton adjacency used for tracing: 4-neighbours always, diagonal neighbours
/// only when neither shared 4-neighbour is set (m-adjacency).
bool m_adjacent(const BinaryMask& mask, Pixel a, Pixel b);
std::vector<Pixel> m_neighbors(const BinaryMask& mask, Pixel p);
}  // namespace detail

}  // namespace tubetrace
