#include "tubetrace/elastica.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include "tubetrace/errors.hpp"

namespace tubetrace {

LiftedGrid::LiftedGrid(int width, int height, int n_theta, std::optional<Box> bounding_box)
    : LiftedGrid(bounding_box.value_or(Box{0, 0, width - 1, height - 1}), n_theta) {
  if (width <= 0 || height <= 0) throw InvalidArgument("LiftedGrid: empty domain");
  if (bounding_box) {
    box_.x0 = std::max(box_.x0, 0);
    box_.y0 = std::max(box_.y0, 0);
    box_.x1 = std::min(box_.x1, width - 1);
    box_.y1 = std::min(box_.y1, height - 1);
    if (box_.x1 < box_.x0 || box_.y1 < box_.y0)
      throw InvalidArgument("LiftedGrid: bounding box misses the image");
  }
}

LiftedGrid::LiftedGrid(Box box, int n_theta) : box_(box), n_theta_(n_theta) {
  if (n_theta < 8 || n_theta % 2 != 0)
    throw InvalidArgument("LiftedGrid: n_theta must be even and >= 8");
  if (box.x1 < box.x0 || box.y1 < box.y0) throw InvalidArgument("LiftedGrid: empty box");
}

LiftedGrid::Node LiftedGrid::node(std::size_t index) const {
  const int bin = static_cast<int>(index % n_theta_);
  const std::size_t cell = index / n_theta_;
  const int x = static_cast<int>(cell % box_.width()) + box_.x0;
  const int y = static_cast<int>(cell / box_.width()) + box_.y0;
  return {x, y, bin};
}

int LiftedGrid::bin_of(double theta) const {
  const int b = static_cast<int>(std::lround(wrap_angle(theta) / dtheta()));
  return b % n_theta_;
}

LiftedGrid::Node LiftedGrid::snap(const LiftedPoint& p) const {
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)),
          bin_of(p.theta)};
}

bool LiftedGrid::contains(const LiftedPoint& p) const {
  const auto n = snap(p);
  return contains(n.x, n.y);
}

double elastica_cost(Point2 displacement, double dtheta, double xi) {
  const double ds = norm(displacement);
  if (ds == 0.0) throw InvalidArgument("elastica_cost: zero displacement");
  const double bend = xi * dtheta / ds;
  return ds * (1.0 + bend * bend);
}

double elastica_move_cost(Point2 displacement, double theta_from, double theta_to, double xi) {
  const double ds = norm(displacement);
  if (ds == 0.0) throw InvalidArgument("elastica_cost: zero displacement");
  const double chord = std::atan2(displacement.y, displacement.x);
  const double a = angle_difference(theta_from, chord);
  const double b = angle_difference(theta_to, chord);
  return ds + xi * xi * 4.0 * (a * a + a * b + b * b) / ds;
}

std::vector<std::vector<MotionPrimitive>> build_primitives(int n_theta, int reach, double xi,
                                                           int dtheta_max) {
  if (reach < 1 || reach > 4) throw InvalidArgument("build_primitives: reach must be in 1..4");
  if (n_theta < 8 || n_theta % 2 != 0)
    throw InvalidArgument("build_primitives: n_theta must be even and >= 8");
  const double step = kTwoPi / n_theta;
  std::vector<std::vector<MotionPrimitive>> table(n_theta);
  for (int bin = 0; bin < n_theta; ++bin) {
    for (int dt = -dtheta_max; dt <= dtheta_max; ++dt) {
      const double mid = bin * step + step * dt / 2.0;
      const double tolerance = step * (std::abs(dt) + 1) / 2.0 + 1e-9;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double dir = std::atan2(double(dy), double(dx));
          if (std::abs(angle_difference(dir, mid)) > tolerance) continue;
          table[bin].push_back({dx, dy, dt,
                                elastica_move_cost({double(dx), double(dy)}, bin * step,
                                                   (bin + dt) * step, xi)});
        }
      }
    }
  }
  return table;
}

LiftedDistanceMap::LiftedDistanceMap(LiftedGrid grid, LiftedPoint source, double xi,
                                     std::vector<std::vector<MotionPrimitive>> primitives)
    : grid_(std::move(grid)), source_(source), xi_(xi), primitives_(std::move(primitives)) {
  if (!grid_.contains(source_)) throw InvalidArgument("distance_map: source outside domain");
  const std::size_t n = grid_.node_count();
  values_.assign(n, 0.0);
  reached_.assign(n, 0);
  predecessor_.assign(n, kNoPredecessor);
}

void LiftedDistanceMap::solve(std::optional<std::size_t> stop_at) {
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<std::uint8_t> settled(values_.size(), 0);
  const auto s = grid_.snap(source_);
  const std::size_t src = grid_.index(s.x, s.y, s.bin);
  values_[src] = 0.0;
  reached_[src] = 1;
  open.push({0.0, src});
  const int n_theta = grid_.n_theta();
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (settled[u] || d > values_[u]) continue;
    settled[u] = 1;
    settle_order_.push_back(u);
    if (stop_at && *stop_at == u) break;
    const auto node = grid_.node(u);
    for (const auto& m : primitives_[node.bin]) {
      const int x = node.x + m.dx;
      const int y = node.y + m.dy;
      if (!grid_.contains(x, y)) continue;
      const int bin = ((node.bin + m.dtheta) % n_theta + n_theta) % n_theta;
      const std::size_t v = grid_.index(x, y, bin);
      if (settled[v]) continue;
      const double nd = d + m.cost;
      if (!reached_[v] || nd < values_[v]) {
        values_[v] = nd;
        reached_[v] = 1;
        predecessor_[v] = static_cast<std::int64_t>(u);
        open.push({nd, v});
      }
    }
  }
}

std::optional<double> LiftedDistanceMap::value_at(const LiftedPoint& p) const {
  if (!grid_.contains(p)) return std::nullopt;
  const auto n = grid_.snap(p);
  const std::size_t i = grid_.index(n.x, n.y, n.bin);
  if (!reached_[i]) return std::nullopt;
  return values_[i];
}

LiftedDistanceMap distance_map(const LiftedGrid& grid, const LiftedPoint& source, double xi,
                               const ElasticaParams& params) {
  LiftedDistanceMap map(grid, source, xi,
                        build_primitives(grid.n_theta(), params.reach, xi, params.dtheta_max));
  map.solve();
  return map;
}

PlanarPath backtrack(const LiftedDistanceMap& map, const LiftedPoint& target) {
  const auto& grid = map.grid();
  if (!grid.contains(target)) throw UnreachableError();
  const auto t = grid.snap(target);
  std::size_t node = grid.index(t.x, t.y, t.bin);
  if (!map.reached(node)) throw UnreachableError();
  std::vector<Point2> pts;
  for (;;) {
    const auto n = grid.node(node);
    pts.push_back({double(n.x), double(n.y)});
    const auto pred = map.predecessor(node);
    if (pred == LiftedDistanceMap::kNoPredecessor) break;
    node = static_cast<std::size_t>(pred);
  }
  return PlanarPath(std::move(pts));
}

GeodesicResult lifted_distance(const LiftedPoint& a, const LiftedPoint& b, double xi,
                               const ElasticaParams& params, std::optional<Extent> clip) {
  const int ax = static_cast<int>(std::lround(a.x)), ay = static_cast<int>(std::lround(a.y));
  const int bx = static_cast<int>(std::lround(b.x)), by = static_cast<int>(std::lround(b.y));
  Box box{std::min(ax, bx) - params.box_margin, std::min(ay, by) - params.box_margin,
          std::max(ax, bx) + params.box_margin, std::max(ay, by) + params.box_margin};
  if (clip) {
    box.x0 = std::max(box.x0, 0);
    box.y0 = std::max(box.y0, 0);
    box.x1 = std::min(box.x1, clip->width - 1);
    box.y1 = std::min(box.y1, clip->height - 1);
  }
  const LiftedGrid grid(box, params.n_theta);
  if (!grid.contains(a)) throw InvalidArgument("lifted_distance: source outside domain");
  const auto sa = grid.snap(a);
  const auto sb = grid.snap(b);
  if (sa.x == sb.x && sa.y == sb.y && sa.bin == sb.bin)
    return {0.0, PlanarPath({a.planar()})};
  if (!grid.contains(b)) return {std::nullopt, {}};

  LiftedDistanceMap map(grid, a, xi,
                        build_primitives(params.n_theta, params.reach, xi, params.dtheta_max));
  const std::size_t target = grid.index(sb.x, sb.y, sb.bin);
  map.solve(target);
  if (!map.reached(target)) return {std::nullopt, {}};
  PlanarPath path = backtrack(map, b);
  path.reverse();
  return {map.value(target), std::move(path)};
}

PlanarPath isotropic_trace(const ScalarField& field, Point2 start, Point2 end, double contrast) {
  const Extent ext = field.extent();
  if (!ext.contains(start) || !ext.contains(end))
    throw InvalidArgument("isotropic_trace: points outside image");
  const Pixel s{static_cast<int>(std::lround(start.x)), static_cast<int>(std::lround(start.y))};
  const Pixel t{static_cast<int>(std::lround(end.x)), static_cast<int>(std::lround(end.y))};
  if (s == t) return PlanarPath({to_point(s)});

  const int w = ext.width;
  auto idx = [w](Pixel p) { return static_cast<std::size_t>(p.y) * w + p.x; };
  auto potential = [&](Pixel p) { return std::exp(-contrast * field.at(p)) + 0.01; };
  const std::size_t n = field.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> pred(n, -1);
  std::vector<std::uint8_t> done(n, 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[idx(s)] = 0.0;
  open.push({0.0, idx(s)});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == idx(t)) break;
    const Pixel p{static_cast<int>(u % w), static_cast<int>(u / w)};
    const double pu = potential(p);
    for (int i = 0; i < 8; ++i) {
      const Pixel q{p.x + detail::kRingDx[i], p.y + detail::kRingDy[i]};
      if (!ext.contains(q)) continue;
      const std::size_t v = idx(q);
      if (done[v]) continue;
      const double step = (i % 2 == 0) ? 1.0 : std::numbers::sqrt2;
      const double nd = d + step * 0.5 * (pu + potential(q));
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = static_cast<std::int64_t>(u);
        open.push({nd, v});
      }
    }
  }
  if (!done[idx(t)]) throw UnreachableError();
  std::vector<Point2> pts;
  for (std::int64_t u = static_cast<std::int64_t>(idx(t)); u >= 0; u = pred[u])
    pts.push_back({double(u % w), double(u / w)});
  std::reverse(pts.begin(), pts.end());
  return PlanarPath(std::move(pts));
}

RasterImage distance_slice(const LiftedDistanceMap& map, int bin) {
  const auto& g = map.grid();
  const Box& b = g.box();
  RasterImage img(b.width(), b.height(), 1.0);
  double vmax = 0.0;
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x)
      if (const auto i = g.index(x, y, bin); map.reached(i)) vmax = std::max(vmax, map.value(i));
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x)
      if (const auto i = g.index(x, y, bin); map.reached(i))
        img.at(x - b.x0, y - b.y0) = vmax > 0.0 ? map.value(i) / vmax : 0.0;
  return img;
}

}  // namespace tubetrace
