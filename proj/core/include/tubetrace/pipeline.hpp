#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubetrace/agent.hpp"
#include "tubetrace/graph.hpp"
#include "tubetrace/imaging.hpp"

namespace tubetrace {

enum class Method { DsgRl, IsoFm, StaticDijkstra };

std::string to_string(Method m);
/// Accepts "dsg-rl", "iso-fm" and "static-dijkstra".
Method parse_method(const std::string& name);

struct TraceConfig {
  ImagingParams imaging;
  GraphParams graph;
  AgentParams agent;
  Method method = Method::DsgRl;
  /// Extension used by the static baseline; defaults to ell0 + 3 / lambda, the 95th
  /// percentile of the agent's extension draws.
  std::optional<double> ell_dense;
  /// Contrast of the isotropic baseline potential exp(-contrast * tubularity).
  double iso_contrast = 8.0;

  double dense_extension() const;
};

struct TraceStats {
  std::size_t geodesic_calls = 0;
  int episodes = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds
  double snap_start = 0.0;
  double snap_end = 0.0;
};

struct TraceResult {
  PlanarPath path;
  std::optional<std::vector<NodeId>> node_sequence;
  TraceStats stats;
  Method method = Method::DsgRl;
  std::vector<EpisodeRecord> episodes;

  bool ok() const { return !path.empty(); }
};

/// Index range of a segment to keep at the ends of a reconstruction.
struct EndTrims {
  std::size_t first_entry = 0;  // point index in the first segment where the path starts
  std::size_t last_exit = 0;    // point index in the last segment where the path ends
};

/// Concatenation of the segments of `seq` and the elastica connectors between them.
/// Throws Error("reconstruction gap") when a connector is unreachable.
PlanarPath reconstruct(const std::vector<NodeId>& seq, SegmentGraph& g,
                       std::optional<EndTrims> trims = {});

/// Full trace from an image.
TraceResult trace(const RasterImage& img, Point2 p_s, Point2 p_t, const TraceConfig& cfg,
                  std::shared_ptr<GeodesicCache> cache = {});

/// Segment-wise trace over already extracted segments (dsg-rl or static-dijkstra).
/// If `graph_out` is given it receives the final graph.
TraceResult trace_segments(const std::vector<Segment>& segments, Extent extent, Point2 p_s,
                           Point2 p_t, const TraceConfig& cfg,
                           std::shared_ptr<GeodesicCache> cache = {},
                           SegmentGraph* graph_out = nullptr);

TraceResult static_dijkstra_trace(const std::vector<Segment>& segments, Extent extent,
                                  Point2 p_s, Point2 p_t, const TraceConfig& cfg,
                                  std::shared_ptr<GeodesicCache> cache = {},
                                  SegmentGraph* graph_out = nullptr);

TraceResult iso_fm_trace(const RasterImage& img, Point2 p_s, Point2 p_t, const TraceConfig& cfg);

/// Shortest node sequence over weighted, reachable edges; nullopt when disconnected.
std::optional<std::vector<NodeId>> dijkstra_path(const SegmentGraph& g, NodeId source,
                                                 NodeId target);
double path_weight(const SegmentGraph& g, const std::vector<NodeId>& seq);

/// Mean distance from the unit-resampled prediction to the nearest point of the ground-truth
/// polyline.
double mean_centerline_error(const PlanarPath& pred, const PlanarPath& gt);

struct BenchCase {
  std::string name;
  RasterImage image;
  /// When set, the case skips the imaging stage.
  std::optional<std::vector<Segment>> segments;
  Point2 start;
  Point2 end;
  PlanarPath ground_truth;
};

struct MethodReport {
  std::string method;
  double mean_calls = 0.0;
  double cost_saved_pct = 0.0;
  double mean_error = 0.0;  // over successful cases; NaN if none
  double success_rate = 0.0;
  std::vector<std::size_t> calls;
  std::vector<std::optional<double>> errors;
};

struct BenchCaseOutcome {
  std::string name;
  std::string method;
  bool success = false;
  std::size_t geodesic_calls = 0;
  std::optional<double> error;
  std::string failure;
};

struct BenchReport {
  std::vector<MethodReport> methods;  // dsg-rl first, then static-dijkstra
  std::vector<BenchCaseOutcome> cases;
};

BenchReport bench(const std::vector<BenchCase>& cases, const TraceConfig& cfg);

}  // namespace tubetrace
