#include "tubetrace/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubetrace/agent.hpp"
#include "tubetrace/errors.hpp"

namespace tubetrace::synthetic {

namespace {

bool adjacent8(Pixel a, Pixel b) {
  return a != b && std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
}

/// Densely sampled curve with cumulative arc length, evaluated by arc length.
class ArcCurve {
 public:
  explicit ArcCurve(std::vector<Point2> pts) : pts_(std::move(pts)), s_(pts_.size(), 0.0) {
    for (std::size_t k = 1; k < pts_.size(); ++k) s_[k] = s_[k - 1] + distance(pts_[k - 1], pts_[k]);
  }
  double length() const { return s_.back(); }
  Point2 at(double s) const {
    s = std::clamp(s, 0.0, length());
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    if (it == s_.end()) return pts_.back();
    const std::size_t k = static_cast<std::size_t>(it - s_.begin());
    const double t = (s - s_[k - 1]) / (s_[k] - s_[k - 1]);
    return pts_[k - 1] + t * (pts_[k] - pts_[k - 1]);
  }
  Point2 tangent(double s) const {
    const Point2 d = at(s + 0.5) - at(s - 0.5);
    return (1.0 / norm(d)) * d;
  }
  std::vector<Point2> piece(double s0, double s1, double step = 0.25) const {
    std::vector<Point2> out;
    for (double s = s0; s < s1; s += step) out.push_back(at(s));
    out.push_back(at(s1));
    return out;
  }

 private:
  std::vector<Point2> pts_;
  std::vector<double> s_;
};

ArcCurve sine_curve(double x0, double x1, double y0, double amplitude, double periods,
                    double phase) {
  std::vector<Point2> pts;
  for (double x = x0; x <= x1 + 1e-9; x += 0.05)
    pts.push_back({x, y0 + amplitude * std::sin(kTwoPi * periods * (x - x0) / (x1 - x0) + phase)});
  return ArcCurve(std::move(pts));
}

PlanarPath unit_samples(const ArcCurve& c) {
  std::vector<Point2> out;
  for (double s = 0.0; s < c.length(); s += 1.0) out.push_back(c.at(s));
  out.push_back(c.at(c.length()));
  return PlanarPath(std::move(out));
}

double gaussian(Rng& rng) {
  const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Occupancy grid used to keep random segments apart.
class Occupancy {
 public:
  explicit Occupancy(Extent e) : grid_(e.width, e.height, 0) {}
  void mark(const std::vector<Pixel>& px) {
    for (Pixel p : px) grid_.at(p) = 1;
  }
  /// Minimum distance from any of `px` to a marked pixel, searched up to `radius`.
  bool clear_of(const std::vector<Pixel>& px, double radius) const {
    const int r = static_cast<int>(std::ceil(radius));
    for (Pixel p : px) {
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const Pixel q{p.x + dx, p.y + dy};
          if (!grid_.extent().contains(q) || !grid_.at(q)) continue;
          if (std::hypot(double(dx), double(dy)) < radius) return false;
        }
    }
    return true;
  }

 private:
  BinaryMask grid_;
};

void finalize_ids(SegmentLayout& layout, Rng& rng) {
  const std::size_t n = layout.segments.size();
  std::vector<int> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = static_cast<int>(k);
  for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
  std::vector<Segment> sorted(n);
  for (std::size_t k = 0; k < n; ++k) {
    Segment s = std::move(layout.segments[k]);
    s.id = perm[k];
    sorted[perm[k]] = std::move(s);
  }
  for (NodeId& c : layout.chain) c = perm[c];
  layout.segments = std::move(sorted);
}

/// Places straight distractors until `total` segments exist or attempts run out.
void add_distractors(SegmentLayout& layout, Occupancy& occ, Rng& rng, std::size_t total,
                     double clearance, const Occupancy* keep_away, double keep_radius) {
  const Extent e = layout.extent;
  for (int attempt = 0; attempt < 20000 && layout.segments.size() < total; ++attempt) {
    const double len = 6.0 + 12.0 * rng.uniform();
    const double ang = kTwoPi * rng.uniform();
    const Point2 c{10.0 + (e.width - 20.0) * rng.uniform(), 10.0 + (e.height - 20.0) * rng.uniform()};
    const Point2 d{std::cos(ang) * len / 2, std::sin(ang) * len / 2};
    const auto px = rasterize({c - d, c + d});
    if (px.size() < 4) continue;
    if (!std::all_of(px.begin(), px.end(), [&](Pixel p) { return e.contains(p); })) continue;
    if (!occ.clear_of(px, clearance)) continue;
    if (keep_away && !keep_away->clear_of(px, keep_radius)) continue;
    occ.mark(px);
    layout.segments.push_back(make_segment(static_cast<int>(layout.segments.size()), px));
  }
  if (layout.segments.size() < total) throw Error("synthetic layout: could not place distractors");
}

}  // namespace

std::vector<Pixel> rasterize(const std::vector<Point2>& curve) {
  std::vector<Pixel> out;
  auto push = [&out](Pixel p) {
    if (!out.empty() && out.back() == p) return;
    if (out.size() >= 2 && adjacent8(out[out.size() - 2], p)) out.pop_back();
    if (std::find(out.begin(), out.end(), p) != out.end()) return;
    out.push_back(p);
  };
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (k == 0) {
      push({static_cast<int>(std::lround(curve[0].x)), static_cast<int>(std::lround(curve[0].y))});
      continue;
    }
    const Point2 a = curve[k - 1], b = curve[k];
    const int steps = std::max(1, static_cast<int>(std::ceil(distance(a, b) / 0.1)));
    for (int i = 1; i <= steps; ++i) {
      const Point2 p = a + (double(i) / steps) * (b - a);
      push({static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))});
    }
  }
  return out;
}

Segment make_segment(int id, std::vector<Pixel> points) {
  if (points.size() < 2) throw InvalidArgument("make_segment: fewer than 2 points");
  Segment s;
  s.id = id;
  s.points = std::move(points);
  s.tangent_a = fit_end_tangent(s.points, true);
  s.tangent_b = fit_end_tangent(s.points, false);
  return s;
}

ImageCase sine_tube(std::uint64_t seed) {
  constexpr int kSize = 256;
  const ArcCurve tube = sine_curve(20.0, 236.0, 128.0, 35.0, 1.0, 0.0);
  const double total = tube.length();
  const double gap_len = 7.0;
  const double gaps[] = {0.25 * total, 0.5 * total, 0.75 * total};
  auto in_gap = [&](double s) {
    return std::any_of(std::begin(gaps), std::end(gaps),
                       [&](double g) { return s > g - gap_len / 2 && s < g + gap_len / 2; });
  };

  std::vector<Point2> samples;
  for (double s = 0.0; s <= total; s += 0.25)
    if (!in_gap(s)) samples.push_back(tube.at(s));
  const double s_branch = 0.38 * total;
  const Point2 origin = tube.at(s_branch);
  const Point2 t = tube.tangent(s_branch);
  const double rot = 70.0 * std::numbers::pi / 180.0;
  const Point2 dir{t.x * std::cos(rot) - t.y * std::sin(rot), t.x * std::sin(rot) + t.y * std::cos(rot)};
  for (double s = 0.0; s <= 35.0; s += 0.25) samples.push_back(origin + s * dir);

  const double sigma = 1.2;
  Grid<double> dist2(kSize, kSize, 1e9);
  for (Point2 p : samples) {
    const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
    for (int dy = -5; dy <= 5; ++dy)
      for (int dx = -5; dx <= 5; ++dx) {
        const Pixel q{cx + dx, cy + dy};
        if (!dist2.extent().contains(q)) continue;
        const double d2 = std::pow(q.x - p.x, 2) + std::pow(q.y - p.y, 2);
        dist2.at(q) = std::min(dist2.at(q), d2);
      }
  }
  Rng rng(seed ^ 0x5eed5eedULL);
  ImageCase out;
  out.image = RasterImage(kSize, kSize, 0.0);
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double v = 0.1 + 0.8 * std::exp(-dist2.at(Pixel{x, y}) / (2 * sigma * sigma)) +
                       0.02 * gaussian(rng);
      out.image.at(Pixel{x, y}) = std::clamp(v, 0.0, 1.0);
    }
  out.start = tube.at(0.0);
  out.end = tube.at(total);
  out.ground_truth = unit_samples(tube);
  return out;
}

SegmentLayout dense_layout(std::uint64_t seed, int m) {
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 11);
  SegmentLayout layout;
  layout.extent = {160, 160};
  Occupancy occ(layout.extent);
  const ArcCurve curve = sine_curve(12.0, 148.0, 80.0, 10.0 + 15.0 * rng.uniform(), 1.0,
                                    kTwoPi * rng.uniform());
  const double total = curve.length();
  for (double s = 0.0; s < total;) {
    double end = std::min(s + 16.0 + 14.0 * rng.uniform(), total);
    if (total - end < 8.0) end = total;
    const auto px = rasterize(curve.piece(s, end));
    occ.mark(px);
    layout.chain.push_back(static_cast<NodeId>(layout.segments.size()));
    layout.segments.push_back(make_segment(static_cast<int>(layout.segments.size()), px));
    s = end + 4.0 + 3.0 * rng.uniform();
  }
  add_distractors(layout, occ, rng, static_cast<std::size_t>(m), 3.0, nullptr, 0.0);
  finalize_ids(layout, rng);
  layout.start = to_point(layout.segments[layout.chain.front()].points.front());
  layout.end = to_point(layout.segments[layout.chain.back()].points.back());
  layout.ground_truth = unit_samples(curve);
  return layout;
}

SegmentLayout sparse_layout(std::uint64_t seed, double wide_gap) {
  Rng rng(seed * 0xbf58476d1ce4e5b9ULL + 7);
  SegmentLayout layout;
  layout.extent = {256, 256};
  Occupancy occ(layout.extent);
  Occupancy chain_occ(layout.extent);
  const ArcCurve curve = sine_curve(24.0, 232.0, 128.0, 10.0 + 10.0 * rng.uniform(), 0.5,
                                    kTwoPi * rng.uniform());
  const double total = curve.length();
  const double wide_at = (0.35 + 0.3 * rng.uniform()) * total;
  bool wide_done = false;
  for (double s = 0.0; s < total;) {
    double end = std::min(s + 20.0 + 15.0 * rng.uniform(), total);
    if (total - end < 10.0) end = total;
    double gap = 3.0 + rng.uniform();
    if (!wide_done && end >= wide_at && end < total) {
      gap = wide_gap;
      wide_done = true;
    }
    const auto px = rasterize(curve.piece(s, end));
    occ.mark(px);
    chain_occ.mark(px);
    layout.chain.push_back(static_cast<NodeId>(layout.segments.size()));
    layout.segments.push_back(make_segment(static_cast<int>(layout.segments.size()), px));
    s = end + gap;
  }
  add_distractors(layout, occ, rng, layout.segments.size() + 8, 3.0, &chain_occ, 14.0);
  finalize_ids(layout, rng);
  layout.start = to_point(layout.segments[layout.chain.front()].points.front());
  layout.end = to_point(layout.segments[layout.chain.back()].points.back());
  layout.ground_truth = unit_samples(curve);
  return layout;
}

RasterImage render_layout(const SegmentLayout& layout, double sigma) {
  RasterImage img(layout.extent.width, layout.extent.height, 0.1);
  const int r = static_cast<int>(std::ceil(3 * sigma));
  for (const Segment& s : layout.segments)
    for (Pixel p : s.points)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const Pixel q{p.x + dx, p.y + dy};
          if (!img.extent().contains(q)) continue;
          const double v = 0.1 + 0.8 * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
          img.at(q) = std::max(img.at(q), v);
        }
  return img;
}

}  // namespace tubetrace::synthetic
