#include "tubetrace/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tubetrace/errors.hpp"

namespace tubetrace {
namespace {

constexpr double kFrangiBeta = 0.5;

struct Kernels {
  int radius = 0;
  std::vector<double> g, dg, ddg;
};

Kernels gaussian_kernels(double sigma) {
  Kernels k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const double s2 = sigma * sigma;
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double g = std::exp(-0.5 * i * i / s2);
    k.g.push_back(g);
    sum += g;
  }
  for (int n = 0; n < static_cast<int>(k.g.size()); ++n) {
    const double x = n - k.radius;
    k.g[n] /= sum;
    k.dg.push_back(-x / s2 * k.g[n]);
    k.ddg.push_back((x * x - s2) / (s2 * s2) * k.g[n]);
  }
  // Remove the DC leak of the truncated second derivative so flat regions give 0.
  const double mean = std::accumulate(k.ddg.begin(), k.ddg.end(), 0.0) / k.ddg.size();
  for (auto& v : k.ddg) v -= mean;
  return k;
}

// out(x, y) = sum_i kx[i] * in(x + i - r, y), or along y when `along_x` is false.
Grid<double> convolve(const Grid<double>& in, const std::vector<double>& kernel, int radius,
                      bool along_x) {
  Grid<double> out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const double v = along_x ? in.clamped(x + i, y) : in.clamped(x, y + i);
        acc += kernel[i + radius] * v;
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

ScalarField ridge_score(const RasterImage& img, double sigma, bool bright_on_dark) {
  const Kernels k = gaussian_kernels(sigma);
  const auto gx = convolve(img, k.g, k.radius, true);
  const auto dx = convolve(img, k.dg, k.radius, true);
  const auto hxx = convolve(convolve(img, k.ddg, k.radius, true), k.g, k.radius, false);
  const auto hyy = convolve(gx, k.ddg, k.radius, false);
  const auto hxy = convolve(dx, k.dg, k.radius, false);

  const double s2 = sigma * sigma;  // scale normalisation
  Grid<double> l1(img.width(), img.height());
  Grid<double> l2(img.width(), img.height());
  double max_norm = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double a = s2 * hxx.at(x, y);
      const double b = s2 * hxy.at(x, y);
      const double c = s2 * hyy.at(x, y);
      const double m = 0.5 * (a + c);
      const double d = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      double e1 = m + d;
      double e2 = m - d;
      if (std::abs(e1) > std::abs(e2)) std::swap(e1, e2);  // |e1| <= |e2|
      l1.at(x, y) = e1;
      l2.at(x, y) = e2;
      max_norm = std::max(max_norm, std::hypot(e1, e2));
    }
  }

  ScalarField out(img.width(), img.height(), 0.0);
  if (max_norm <= 1e-12) return out;
  const double c = 0.5 * max_norm;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double e1 = l1.at(x, y);
      const double e2 = l2.at(x, y);
      if (e2 == 0.0) continue;
      if (bright_on_dark ? e2 > 0.0 : e2 < 0.0) continue;
      const double rb = e1 / e2;
      const double s = std::hypot(e1, e2);
      out.at(x, y) = std::exp(-rb * rb / (2.0 * kFrangiBeta * kFrangiBeta)) *
                     (1.0 - std::exp(-s * s / (2.0 * c * c)));
    }
  }
  return out;
}

int ring_count(const BinaryMask& m, int x, int y, std::array<bool, 8>& ring) {
  int n = 0;
  for (int i = 0; i < 8; ++i) {
    const int nx = x + detail::kRingDx[i];
    const int ny = y + detail::kRingDy[i];
    ring[i] = m.extent().contains(Pixel{nx, ny}) && m.at(nx, ny);
    n += ring[i];
  }
  return n;
}

// 8-connectivity of the foreground and 4-connectivity of the background are both
// unchanged by deleting the pixel.
bool is_simple(const std::array<bool, 8>& ring) {
  std::array<int, 8> parent{};
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int i = 0; i < 8; ++i) {
    const int j = (i + 1) % 8;
    if (ring[i] && ring[j]) unite(i, j);
    if (i % 2 == 0 && ring[i] && ring[(i + 2) % 8]) unite(i, (i + 2) % 8);
  }
  int fg = 0;
  for (int i = 0; i < 8; ++i) fg += ring[i] && find(i) == i;
  if (fg != 1) return false;

  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < 8; ++i) {
    const int j = (i + 1) % 8;
    if (!ring[i] && !ring[j]) unite(i, j);
  }
  std::array<bool, 8> touches{};
  for (int i = 0; i < 8; i += 2)
    if (!ring[i]) touches[find(i)] = true;
  return std::count(touches.begin(), touches.end(), true) == 1;
}

bool zhang_suen_pass(BinaryMask& m, int subcycle) {
  std::vector<Pixel> doomed;
  std::array<bool, 8> r{};
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      const int b = ring_count(m, x, y, r);
      if (b < 2 || b > 6) continue;
      int a = 0;
      for (int i = 0; i < 8; ++i) a += !r[i] && r[(i + 1) % 8];
      if (a != 1) continue;
      // r[0]=N r[2]=E r[4]=S r[6]=W
      if (subcycle == 0) {
        if (r[0] && r[2] && r[4]) continue;
        if (r[2] && r[4] && r[6]) continue;
      } else {
        if (r[0] && r[2] && r[6]) continue;
        if (r[0] && r[4] && r[6]) continue;
      }
      doomed.push_back({x, y});
    }
  }
  for (auto p : doomed) m.at(p) = 0;
  return !doomed.empty();
}

// Sequential removal of simple non-end pixels: strips staircase corners and any 2x2
// blocks left by the parallel passes, giving an 8-minimal curve.
bool prune_redundant(BinaryMask& m) {
  bool changed = false;
  std::array<bool, 8> r{};
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      if (ring_count(m, x, y, r) < 2) continue;
      if (!is_simple(r)) continue;
      m.at(x, y) = 0;
      changed = true;
    }
  }
  return changed;
}

}  // namespace

ScalarField tubularity(const RasterImage& img, std::span<const double> scales,
                       bool bright_on_dark) {
  if (scales.empty()) throw InvalidArgument("tubularity: empty scale list");
  for (double s : scales)
    if (!(s >= 0.5)) throw InvalidArgument("tubularity: scales must be >= 0.5 px");
  ScalarField best(img.width(), img.height(), 0.0);
  for (double sigma : scales) {
    const auto score = ridge_score(img, sigma, bright_on_dark);
    for (std::size_t i = 0; i < best.size(); ++i)
      best.values()[i] = std::max(best.values()[i], score.values()[i]);
  }
  const double peak = *std::max_element(best.values().begin(), best.values().end());
  if (peak > 0.0)
    for (auto& v : best.values()) v /= peak;
  return best;
}

BinaryMask binarize(const ScalarField& field, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidArgument("binarize: threshold must lie in (0, 1)");
  BinaryMask mask(field.width(), field.height(), 0);
  for (std::size_t i = 0; i < field.size(); ++i)
    mask.values()[i] = field.values()[i] >= threshold ? 1 : 0;
  return mask;
}

BinaryMask skeletonize(const BinaryMask& mask) {
  BinaryMask m = mask;
  for (auto& v : m.values()) v = v ? 1 : 0;
  bool changed = true;
  while (changed) {
    changed = zhang_suen_pass(m, 0);
    changed = zhang_suen_pass(m, 1) || changed;
  }
  while (prune_redundant(m)) {
  }
  return m;
}

namespace detail {

bool m_adjacent(const BinaryMask& mask, Pixel a, Pixel b) {
  const int dx = b.x - a.x;
  const int dy = b.y - a.y;
  if (std::abs(dx) > 1 || std::abs(dy) > 1 || (dx == 0 && dy == 0)) return false;
  if (!mask.at(a) || !mask.at(b)) return false;
  if (dx == 0 || dy == 0) return true;
  return !mask.at(a.x + dx, a.y) && !mask.at(a.x, a.y + dy);
}

std::vector<Pixel> m_neighbors(const BinaryMask& mask, Pixel p) {
  std::vector<Pixel> out;
  for (int i = 0; i < 8; ++i) {
    const Pixel q{p.x + kRingDx[i], p.y + kRingDy[i]};
    if (mask.extent().contains(q) && m_adjacent(mask, p, q)) out.push_back(q);
  }
  return out;
}

}  // namespace detail

Point2 fit_end_tangent(std::span<const Pixel> points, bool at_front, int window) {
  const int n = static_cast<int>(points.size());
  const int k = std::min(window, n);
  std::vector<Point2> pts;
  for (int i = 0; i < k; ++i) pts.push_back(to_point(points[at_front ? i : n - 1 - i]));
  Point2 c{};
  for (auto p : pts) c = c + p;
  c = (1.0 / k) * c;
  double sxx = 0, syy = 0, sxy = 0;
  for (auto p : pts) {
    const Point2 d = p - c;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  // principal axis of the 2x2 scatter matrix
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Point2 dir{std::cos(angle), std::sin(angle)};
  Point2 outward = pts.front() - c;
  if (norm(outward) < 1e-12 && k >= 2) outward = pts.front() - pts[1];
  if (dot(dir, outward) < 0.0) dir = -1.0 * dir;
  return dir;
}

std::vector<Segment> extract_segments(const BinaryMask& skeleton, int min_length) {
  const int w = skeleton.width();
  const int h = skeleton.height();
  BinaryMask keep = skeleton;
  for (auto& v : keep.values()) v = v ? 1 : 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (skeleton.at(x, y) && detail::m_neighbors(skeleton, {x, y}).size() >= 3)
        keep.at(x, y) = 0;

  // Adjacency is judged on the full skeleton so arms meeting at a deleted
  // junction stay separate.
  auto neighbors = [&](Pixel p) {
    std::vector<Pixel> out;
    for (auto q : detail::m_neighbors(skeleton, p))
      if (keep.at(q)) out.push_back(q);
    return out;
  };

  BinaryMask visited(w, h, 0);
  std::vector<Segment> segments;
  const std::size_t min_points = static_cast<std::size_t>(std::max(min_length, 2));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!keep.at(x, y) || visited.at(x, y)) continue;
      // Collect the component, then pick the start pixel.
      std::vector<Pixel> component{{x, y}};
      visited.at(x, y) = 1;
      for (std::size_t i = 0; i < component.size(); ++i)
        for (auto q : neighbors(component[i]))
          if (!visited.at(q)) {
            visited.at(q) = 1;
            component.push_back(q);
          }
      Pixel start = *std::min_element(component.begin(), component.end());
      Pixel first_end{-1, -1};
      for (auto p : component)
        if (neighbors(p).size() <= 1 && (first_end.x < 0 || p < first_end)) first_end = p;
      if (first_end.x >= 0) start = first_end;  // otherwise a cycle, opened at its top-left

      std::vector<Pixel> chain{start};
      BinaryMask on_chain(w, h, 0);
      on_chain.at(start) = 1;
      for (;;) {
        Pixel next{-1, -1};
        for (auto q : neighbors(chain.back()))
          if (!on_chain.at(q)) {
            next = q;
            break;
          }
        if (next.x < 0) break;
        on_chain.at(next) = 1;
        chain.push_back(next);
      }
      if (chain.size() < min_points) continue;
      Segment s;
      s.id = static_cast<int>(segments.size());
      s.tangent_a = fit_end_tangent(chain, true);
      s.tangent_b = fit_end_tangent(chain, false);
      s.points = std::move(chain);
      segments.push_back(std::move(s));
    }
  }
  return segments;
}

std::vector<Segment> segments_from_image(const RasterImage& img, const ImagingParams& params) {
  const auto field = tubularity(img, params.scales, params.bright_on_dark);
  return extract_segments(skeletonize(binarize(field, params.threshold)), params.min_length);
}

}  // namespace tubetrace
