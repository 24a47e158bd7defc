#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "tubetrace/elastica.hpp"
#include "tubetrace/imaging.hpp"

namespace tubetrace {

using NodeId = int;

struct GraphParams {
  double r_patch = 3.0;
  double xi = 1.0;
  ElasticaParams elastica;
};

/// Nearest endpoints of two segments, lifted with the edge orientation convention:
/// theta_i follows T_i's outward tangent, theta_j points into T_j.
struct EndpointPair {
  Pixel p_i;
  Pixel p_j;
  int end_i = 0;  // 0 = endpoint_a, 1 = endpoint_b
  int end_j = 0;
  double theta_i = 0.0;
  double theta_j = 0.0;
  double gap() const { return distance(to_point(p_i), to_point(p_j)); }
};

EndpointPair nearest_endpoint_pair(const Segment& ti, const Segment& tj);

/// Segment points followed by ceil(ell) unit steps beyond each end along its tangent,
/// ordered from the far end of the a-side extension to the far end of the b-side one.
/// Extension points leaving `bounds` are dropped.
std::vector<Point2> extend_segment(const Segment& t, double ell, Extent bounds);

struct EdgeRecord {
  double weight = 0.0;
  bool unreachable = false;  // weight is the W_max penalty
  /// Geodesic connector from the lower-id node's endpoint to the higher-id one's.
  PlanarPath connector;
};

/// Memo of geodesic results shared across graphs built over the same segments and metric.
/// Thread-safe.
class GeodesicCache {
 public:
  std::optional<EdgeRecord> find(NodeId i, NodeId j) const;
  void store(NodeId i, NodeId j, const EdgeRecord& rec);
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<NodeId, NodeId>, EdgeRecord> entries_;
};

/// Segment-proposal graph: known adjacencies plus lazily weighted edges.
class SegmentGraph {
 public:
  SegmentGraph(std::vector<Segment> segments, Extent extent, GraphParams params = {});
  /// Abstract graph over `n` nodes with no geometry; weights must be preset.
  static SegmentGraph abstract(std::size_t n);

  std::size_t node_count() const { return adjacency_.size(); }
  const std::vector<Segment>& segments() const { return segments_; }
  bool has_geometry() const { return !segments_.empty(); }
  const Extent& extent() const { return extent_; }
  const GraphParams& params() const { return params_; }
  double w_max() const { return w_max_; }

  const std::set<NodeId>& neighbors(NodeId v) const { return adjacency_.at(v); }
  bool adjacent(NodeId i, NodeId j) const;
  /// Records an unweighted adjacency; returns true if it was new.
  bool add_adjacency(NodeId i, NodeId j);
  std::size_t adjacency_count() const;

  bool is_weighted(NodeId i, NodeId j) const;
  const EdgeRecord* edge(NodeId i, NodeId j) const;
  const std::map<std::pair<NodeId, NodeId>, EdgeRecord>& edges() const { return edges_; }
  /// Presets a weight (abstract graphs, tests); does not count as a geodesic call.
  void set_weight(NodeId i, NodeId j, double w);

  /// Memoised edge weight; the first request for a pair costs exactly one geodesic call.
  double edge_weight(NodeId i, NodeId j);
  std::size_t geodesic_call_count() const { return geodesic_calls_; }

  void set_cache(std::shared_ptr<GeodesicCache> cache) { cache_ = std::move(cache); }

 private:
  SegmentGraph() = default;
  static std::pair<NodeId, NodeId> key(NodeId i, NodeId j) {
    return i < j ? std::pair{i, j} : std::pair{j, i};
  }
  void check_node(NodeId v) const;
  EdgeRecord compute_edge(NodeId lo, NodeId hi) const;

  std::vector<Segment> segments_;
  Extent extent_;
  GraphParams params_;
  double w_max_ = 0.0;
  std::vector<std::set<NodeId>> adjacency_;
  std::map<std::pair<NodeId, NodeId>, EdgeRecord> edges_;
  std::size_t geodesic_calls_ = 0;
  std::shared_ptr<GeodesicCache> cache_;
};

/// Candidate neighbours of node i: segments touching the tubular patch of radius r_patch
/// around T_i extended by ell. Purely geometric.
std::set<NodeId> discover_neighbors(const SegmentGraph& g, NodeId i, double ell);

/// Graph over all segments whose adjacencies come from discover_neighbors at ell0.
/// No weights are computed.
SegmentGraph build_initial_graph(std::vector<Segment> segments, Extent extent, double ell0,
                                 GraphParams params = {});

/// Nearest segment (by point distance) to p; ties go to the lowest id.
NodeId map_point_to_segment(Point2 p, std::span<const Segment> segments);
/// Index of the point of `s` nearest to p (first on ties).
std::size_t nearest_point_index(const Segment& s, Point2 p);

}  // namespace tubetrace
