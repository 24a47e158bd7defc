#include "tubetrace/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "tubetrace/errors.hpp"

namespace tubetrace {

EndpointPair nearest_endpoint_pair(const Segment& ti, const Segment& tj) {
  EndpointPair best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int ei = 0; ei < 2; ++ei) {
    for (int ej = 0; ej < 2; ++ej) {
      const double d = distance(to_point(ti.endpoint(ei)), to_point(tj.endpoint(ej)));
      if (d < best_d) {
        best_d = d;
        best.end_i = ei;
        best.end_j = ej;
      }
    }
  }
  best.p_i = ti.endpoint(best.end_i);
  best.p_j = tj.endpoint(best.end_j);
  const Point2 out_i = ti.tangent(best.end_i);
  const Point2 in_j = -1.0 * tj.tangent(best.end_j);
  best.theta_i = wrap_angle(std::atan2(out_i.y, out_i.x));
  best.theta_j = wrap_angle(std::atan2(in_j.y, in_j.x));
  return best;
}

std::vector<Point2> extend_segment(const Segment& t, double ell, Extent bounds) {
  if (ell < 0.0) throw InvalidArgument("extend_segment: negative extension length");
  const int steps = static_cast<int>(std::ceil(ell));
  std::vector<Point2> out;
  const Point2 a = to_point(t.endpoint_a());
  const Point2 b = to_point(t.endpoint_b());
  // a-side, far to near; stop at the first sample outside the image
  std::vector<Point2> front;
  for (int k = 1; k <= steps; ++k) {
    const Point2 p = a + double(k) * t.tangent_a;
    if (!bounds.contains(p)) break;
    front.push_back(p);
  }
  out.assign(front.rbegin(), front.rend());
  for (auto p : t.points) out.push_back(to_point(p));
  for (int k = 1; k <= steps; ++k) {
    const Point2 p = b + double(k) * t.tangent_b;
    if (!bounds.contains(p)) break;
    out.push_back(p);
  }
  return out;
}

std::optional<EdgeRecord> GeodesicCache::find(NodeId i, NodeId j) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(i < j ? std::pair{i, j} : std::pair{j, i});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void GeodesicCache::store(NodeId i, NodeId j, const EdgeRecord& rec) {
  std::lock_guard lock(mutex_);
  entries_[i < j ? std::pair{i, j} : std::pair{j, i}] = rec;
}

std::size_t GeodesicCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void GeodesicCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

SegmentGraph::SegmentGraph(std::vector<Segment> segments, Extent extent, GraphParams params)
    : segments_(std::move(segments)), extent_(extent), params_(params),
      w_max_(10.0 * extent.diagonal()), adjacency_(segments_.size()) {
  for (std::size_t k = 0; k < segments_.size(); ++k)
    if (segments_[k].id != static_cast<int>(k))
      throw InvalidArgument("SegmentGraph: segment ids must equal their index");
}

SegmentGraph SegmentGraph::abstract(std::size_t n) {
  SegmentGraph g;
  g.adjacency_.resize(n);
  g.w_max_ = std::numeric_limits<double>::max() / 4;
  return g;
}

void SegmentGraph::check_node(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= adjacency_.size())
    throw InvalidArgument("SegmentGraph: unknown node " + std::to_string(v));
}

bool SegmentGraph::adjacent(NodeId i, NodeId j) const {
  check_node(i);
  return adjacency_[i].count(j) != 0;
}

bool SegmentGraph::add_adjacency(NodeId i, NodeId j) {
  check_node(i);
  check_node(j);
  if (i == j) throw InvalidArgument("SegmentGraph: self loop");
  const bool fresh = adjacency_[i].insert(j).second;
  adjacency_[j].insert(i);
  return fresh;
}

std::size_t SegmentGraph::adjacency_count() const {
  std::size_t n = 0;
  for (const auto& s : adjacency_) n += s.size();
  return n / 2;
}

bool SegmentGraph::is_weighted(NodeId i, NodeId j) const {
  return edges_.count(key(i, j)) != 0;
}

const EdgeRecord* SegmentGraph::edge(NodeId i, NodeId j) const {
  const auto it = edges_.find(key(i, j));
  return it == edges_.end() ? nullptr : &it->second;
}

void SegmentGraph::set_weight(NodeId i, NodeId j, double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("set_weight: bad weight");
  add_adjacency(i, j);
  edges_[key(i, j)] = EdgeRecord{w, false, {}};
}

EdgeRecord SegmentGraph::compute_edge(NodeId lo, NodeId hi) const {
  const EndpointPair pair = nearest_endpoint_pair(segments_[lo], segments_[hi]);
  const LiftedPoint a(pair.p_i.x, pair.p_i.y, pair.theta_i);
  const LiftedPoint b(pair.p_j.x, pair.p_j.y, pair.theta_j);
  const GeodesicResult r = lifted_distance(a, b, params_.xi, params_.elastica, extent_);
  if (!r.cost) return EdgeRecord{w_max_, true, {}};
  return EdgeRecord{*r.cost, false, r.path};
}

double SegmentGraph::edge_weight(NodeId i, NodeId j) {
  check_node(i);
  check_node(j);
  if (i == j) throw InvalidArgument("edge_weight: i == j");
  const auto k = key(i, j);
  if (const auto it = edges_.find(k); it != edges_.end()) return it->second.weight;
  if (!has_geometry()) throw InvalidArgument("edge_weight: abstract graph edge has no weight");
  EdgeRecord rec;
  if (auto hit = cache_ ? cache_->find(k.first, k.second) : std::nullopt) {
    rec = std::move(*hit);
  } else {
    rec = compute_edge(k.first, k.second);
    if (cache_) cache_->store(k.first, k.second, rec);
  }
  ++geodesic_calls_;
  add_adjacency(i, j);
  return edges_.emplace(k, std::move(rec)).first->second.weight;
}

namespace {

constexpr std::size_t kBruteForceLimit = 2000;

struct Bounds {
  double x0, y0, x1, y1;
};

Bounds bounds_of(std::span<const Point2> pts) {
  Bounds b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (auto p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

std::set<NodeId> brute_force_patch(const SegmentGraph& g, NodeId i,
                                   std::span<const Point2> patch) {
  const double r = g.params().r_patch;
  const double r2 = r * r;
  Bounds pb = bounds_of(patch);
  pb = {pb.x0 - r, pb.y0 - r, pb.x1 + r, pb.y1 + r};
  std::set<NodeId> out;
  for (const auto& s : g.segments()) {
    if (s.id == i) continue;
    bool hit = false;
    for (auto q : s.points) {
      if (q.x < pb.x0 || q.x > pb.x1 || q.y < pb.y0 || q.y > pb.y1) continue;
      for (auto e : patch) {
        const double dx = q.x - e.x, dy = q.y - e.y;
        if (dx * dx + dy * dy <= r2) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) out.insert(s.id);
  }
  return out;
}

std::set<NodeId> bucketed_patch(const SegmentGraph& g, NodeId i,
                                std::span<const Point2> patch) {
  const double r = g.params().r_patch;
  const double cell = std::max(r, 1.0);
  auto cell_of = [cell](double v) { return static_cast<long>(std::floor(v / cell)); };
  auto cell_key = [](long cx, long cy) { return (cx << 32) ^ (cy & 0xffffffffL); };
  std::unordered_map<long, std::vector<std::pair<NodeId, Pixel>>> grid;
  for (const auto& s : g.segments()) {
    if (s.id == i) continue;
    for (auto q : s.points) grid[cell_key(cell_of(q.x), cell_of(q.y))].push_back({s.id, q});
  }
  std::set<NodeId> out;
  for (auto e : patch) {
    const long cx = cell_of(e.x), cy = cell_of(e.y);
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        const auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (const auto& [id, q] : it->second)
          if (distance(to_point(q), e) <= r) out.insert(id);
      }
  }
  return out;
}

}  // namespace

std::set<NodeId> discover_neighbors(const SegmentGraph& g, NodeId i, double ell) {
  if (i < 0 || static_cast<std::size_t>(i) >= g.node_count())
    throw InvalidArgument("discover_neighbors: unknown node");
  if (!g.has_geometry()) return {};
  const auto patch = extend_segment(g.segments()[i], ell, g.extent());
  return g.segments().size() <= kBruteForceLimit ? brute_force_patch(g, i, patch)
                                                 : bucketed_patch(g, i, patch);
}

SegmentGraph build_initial_graph(std::vector<Segment> segments, Extent extent, double ell0,
                                 GraphParams params) {
  if (segments.empty()) throw InvalidArgument("build_initial_graph: no segments");
  if (!(ell0 > 0.0)) throw InvalidArgument("build_initial_graph: ell0 must be positive");
  SegmentGraph g(std::move(segments), extent, params);
  for (NodeId i = 0; i < static_cast<NodeId>(g.node_count()); ++i)
    for (NodeId j : discover_neighbors(g, i, ell0)) g.add_adjacency(i, j);
  return g;
}

std::size_t nearest_point_index(const Segment& s, Point2 p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const double d = distance(to_point(s.points[k]), p);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

NodeId map_point_to_segment(Point2 p, std::span<const Segment> segments) {
  if (segments.empty()) throw InvalidArgument("map_point_to_segment: no segments");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    const double d = distance(to_point(s.points[nearest_point_index(s, p)]), p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(k);
    }
  }
  return best;
}

}  // namespace tubetrace
