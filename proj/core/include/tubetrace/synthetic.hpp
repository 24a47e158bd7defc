#pragma once

#include <cstdint>
#include <vector>

#include "tubetrace/geometry.hpp"
#include "tubetrace/graph.hpp"
#include "tubetrace/imaging.hpp"

namespace tubetrace::synthetic {

/// Pixel chain through a continuous polyline: 8-connected, no repeats, no corner pixels.
std::vector<Pixel> rasterize(const std::vector<Point2>& curve);

/// Segment with fitted end tangents.
Segment make_segment(int id, std::vector<Pixel> points);

struct ImageCase {
  RasterImage image;
  Point2 start;
  Point2 end;
  PlanarPath ground_truth;
};

/// 256x256 bright sinusoidal tube with three gaps and one straight distractor branch.
/// Seeds sit at the tube ends; the ground truth is the full centerline at unit spacing.
ImageCase sine_tube(std::uint64_t seed = 0);

struct SegmentLayout {
  Extent extent;
  std::vector<Segment> segments;
  Point2 start;
  Point2 end;
  PlanarPath ground_truth;
  /// Ids of the segments along the true curve, in order.
  std::vector<NodeId> chain;
};

/// 160x160 layout: a curve broken into short pieces plus random straight distractors,
/// `m` segments in all.
SegmentLayout dense_layout(std::uint64_t seed, int m = 50);

/// Curve pieces with small gaps except one wide gap, plus a few distant distractors.
/// `wide_gap` is the Euclidean size of the wide gap in pixels.
SegmentLayout sparse_layout(std::uint64_t seed, double wide_gap = 16.0);

/// Renders a layout as bright tubes on a dark background.
RasterImage render_layout(const SegmentLayout& layout, double sigma = 1.2);

}  // namespace tubetrace::synthetic
