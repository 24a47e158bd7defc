#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <vector>

#include "tubetrace/agent.hpp"
#include "tubetrace/geometry.hpp"
#include "tubetrace/imaging.hpp"

namespace testing {

using namespace tubetrace;

inline BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.at(x, y) = rows[y][x] == '#';
  return m;
}

inline std::size_t count_true(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count(m.values().begin(), m.values().end(), 1));
}

/// Number of 8-connected components of the foreground.
inline int components8(const BinaryMask& m) {
  BinaryMask seen(m.width(), m.height(), 0);
  int n = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y) || seen.at(x, y)) continue;
      ++n;
      std::queue<Pixel> q;
      q.push({x, y});
      seen.at(x, y) = 1;
      while (!q.empty()) {
        const Pixel p = q.front();
        q.pop();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const Pixel r{p.x + dx, p.y + dy};
            if (!m.extent().contains(r) || !m.at(r) || seen.at(r)) continue;
            seen.at(r) = 1;
            q.push(r);
          }
      }
    }
  return n;
}

/// True if some 2x2 block is entirely foreground.
inline bool has_full_2x2(const BinaryMask& m) {
  for (int y = 0; y + 1 < m.height(); ++y)
    for (int x = 0; x + 1 < m.width(); ++x)
      if (m.at(x, y) && m.at(x + 1, y) && m.at(x, y + 1) && m.at(x + 1, y + 1)) return true;
  return false;
}

/// Random blobby mask: union of random discs and thick strokes.
inline BinaryMask random_mask(std::uint64_t seed, int w = 48, int h = 40) {
  Rng rng(seed);
  BinaryMask m(w, h, 0);
  const int shapes = 2 + static_cast<int>(rng.index(5));
  for (int s = 0; s < shapes; ++s) {
    const double x0 = rng.uniform() * w, y0 = rng.uniform() * h;
    const double x1 = rng.uniform() * w, y1 = rng.uniform() * h;
    const double r = 0.8 + 2.5 * rng.uniform();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d = point_segment_distance({double(x), double(y)}, {x0, y0}, {x1, y1});
        if (d <= r) m.at(x, y) = 1;
      }
  }
  return m;
}

/// Brute-force single-source shortest path weights over an explicit edge list.
inline std::vector<double> dijkstra_oracle(int n,
                                           const std::vector<std::tuple<int, int, double>>& edges,
                                           int source) {
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  d[source] = 0.0;
  for (int it = 0; it < n; ++it) {
    int u = -1;
    for (int k = 0; k < n; ++k)
      if (!done[k] && (u < 0 || d[k] < d[u])) u = k;
    if (u < 0 || !std::isfinite(d[u])) break;
    done[u] = 1;
    for (const auto& [a, b, w] : edges) {
      if (a == u && d[u] + w < d[b]) d[b] = d[u] + w;
      if (b == u && d[u] + w < d[a]) d[a] = d[u] + w;
    }
  }
  return d;
}

/// Random connected graph: a random spanning tree plus extra edges, weights in [1, 10].
struct RandomGraph {
  int n = 0;
  std::vector<std::tuple<int, int, double>> edges;
};

inline RandomGraph random_graph(std::uint64_t seed, int max_nodes = 20, double extra_p = 0.2) {
  Rng r(seed * 7919 + 1);
  RandomGraph g;
  g.n = 5 + static_cast<int>(r.index(static_cast<std::size_t>(max_nodes - 4)));
  std::set<std::pair<int, int>> used;
  for (int v = 1; v < g.n; ++v) {
    const int u = static_cast<int>(r.index(static_cast<std::size_t>(v)));
    g.edges.emplace_back(u, v, 1.0 + 9.0 * r.uniform());
    used.insert({u, v});
  }
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v)
      if (r.uniform() < extra_p && !used.count({u, v})) {
        g.edges.emplace_back(u, v, 1.0 + 9.0 * r.uniform());
        used.insert({u, v});
      }
  return g;
}

/// Mean distance from unit-resampled pred to the gt polyline, by a plain double loop.
inline double centerline_error_oracle(const std::vector<Point2>& pred,
                                      const std::vector<Point2>& gt) {
  // resample pred at unit arc length, keeping both ends
  std::vector<Point2> samples{pred.front()};
  double carry = 0.0;
  for (std::size_t k = 1; k < pred.size(); ++k) {
    const Point2 a = pred[k - 1], b = pred[k];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    double s = 1.0 - carry;
    while (s <= len + 1e-12) {
      samples.push_back(a + (s / len) * (b - a));
      s += 1.0;
    }
    carry = len - (s - 1.0);
  }
  if (distance(samples.back(), pred.back()) > 1e-9) samples.push_back(pred.back());
  double total = 0.0;
  for (const Point2 p : samples) {
    double best = distance(p, gt.front());
    for (std::size_t k = 0; k + 1 < gt.size(); ++k) {
      const Point2 a = gt[k], b = gt[k + 1];
      const Point2 ab = b - a;
      const double t = std::clamp(dot(p - a, ab) / std::max(dot(ab, ab), 1e-300), 0.0, 1.0);
      best = std::min(best, distance(p, a + t * ab));
    }
    total += best;
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace testing
