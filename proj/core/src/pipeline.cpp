#include "tubetrace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "tubetrace/errors.hpp"
#include "log.hpp"

namespace tubetrace {

std::string to_string(Method m) {
  switch (m) {
    case Method::DsgRl:
      return "dsg-rl";
    case Method::IsoFm:
      return "iso-fm";
    case Method::StaticDijkstra:
      return "static-dijkstra";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "dsg-rl") return Method::DsgRl;
  if (name == "iso-fm") return Method::IsoFm;
  if (name == "static-dijkstra") return Method::StaticDijkstra;
  throw InvalidArgument("unknown method '" + name + "'");
}

double TraceConfig::dense_extension() const {
  return ell_dense.value_or(agent.ell0 + 3.0 / agent.lambda);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Unit-spaced straight run from a to b, excluding a.
std::vector<Point2> straight_run(Point2 a, Point2 b) {
  const double d = distance(a, b);
  const int n = static_cast<int>(std::ceil(d));
  std::vector<Point2> out;
  for (int k = 1; k <= n; ++k) out.push_back(a + (double(k) / n) * (b - a));
  return out;
}

std::vector<Point2> sub_polyline(const Segment& s, std::size_t from, std::size_t to) {
  std::vector<Point2> out;
  if (from <= to) {
    for (std::size_t k = from; k <= to; ++k) out.push_back(to_point(s.points[k]));
  } else {
    for (std::size_t k = from + 1; k-- > to;) out.push_back(to_point(s.points[k]));
  }
  return out;
}

std::size_t endpoint_index(const Segment& s, int which) {
  return which == 0 ? 0 : s.points.size() - 1;
}

/// Wraps a core path with straight snaps from p_s and to p_t.
PlanarPath with_snaps(Point2 p_s, const PlanarPath& core, Point2 p_t) {
  PlanarPath out({p_s});
  out.append(straight_run(p_s, core.points().front()));
  out.append(core);
  out.append(straight_run(core.points().back(), p_t));
  return out;
}

TraceResult failure(Method method, TraceStats stats) {
  TraceResult r;
  r.method = method;
  r.stats = stats;
  r.stats.converged = false;
  return r;
}

}  // namespace

PlanarPath reconstruct(const std::vector<NodeId>& seq, SegmentGraph& g,
                       std::optional<EndTrims> trims) {
  if (seq.empty()) throw InvalidArgument("reconstruct: empty sequence");
  if (!g.has_geometry()) throw InvalidArgument("reconstruct: graph has no geometry");
  const auto& segs = g.segments();
  const std::size_t n = seq.size();
  if (n == 1) {
    const Segment& s = segs[seq[0]];
    if (trims) return PlanarPath(sub_polyline(s, trims->first_entry, trims->last_exit));
    return PlanarPath(sub_polyline(s, 0, s.points.size() - 1));
  }

  std::vector<std::size_t> entry(n), exit(n);
  std::vector<PlanarPath> connectors(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const NodeId u = seq[k], v = seq[k + 1];
    const NodeId lo = std::min(u, v), hi = std::max(u, v);
    const EndpointPair pair = nearest_endpoint_pair(segs[lo], segs[hi]);
    const int end_u = u == lo ? pair.end_i : pair.end_j;
    const int end_v = u == lo ? pair.end_j : pair.end_i;
    exit[k] = endpoint_index(segs[u], end_u);
    entry[k + 1] = endpoint_index(segs[v], end_v);

    g.edge_weight(u, v);
    const EdgeRecord* rec = g.edge(u, v);
    if (rec->unreachable) throw Error("reconstruction gap");
    PlanarPath connector = rec->connector;
    if (connector.empty()) {
      const LiftedPoint a(pair.p_i.x, pair.p_i.y, pair.theta_i);
      const LiftedPoint b(pair.p_j.x, pair.p_j.y, pair.theta_j);
      GeodesicResult r = lifted_distance(a, b, g.params().xi, g.params().elastica, g.extent());
      if (!r.cost) throw Error("reconstruction gap");
      connector = std::move(r.path);
    }
    if (u != lo) connector.reverse();
    connectors[k] = std::move(connector);
  }
  const Segment& first = segs[seq.front()];
  const Segment& last = segs[seq.back()];
  entry[0] = trims ? trims->first_entry
                   : (exit[0] == 0 ? first.points.size() - 1 : std::size_t{0});
  exit[n - 1] = trims ? trims->last_exit
                      : (entry[n - 1] == 0 ? last.points.size() - 1 : std::size_t{0});

  PlanarPath out;
  for (std::size_t k = 0; k < n; ++k) {
    out.append(sub_polyline(segs[seq[k]], entry[k], exit[k]));
    if (k + 1 < n) out.append(connectors[k]);
  }
  return out;
}

std::optional<std::vector<NodeId>> dijkstra_path(const SegmentGraph& g, NodeId source,
                                                 NodeId target) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<NodeId> pred(n, -1);
  std::vector<char> done(n, 0);
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[source] = 0.0;
  open.push({0.0, source});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == target) break;
    for (NodeId v : g.neighbors(u)) {
      const EdgeRecord* e = g.edge(u, v);
      if (!e || e->unreachable || done[v]) continue;
      if (d + e->weight < dist[v]) {
        dist[v] = d + e->weight;
        pred[v] = u;
        open.push({dist[v], v});
      }
    }
  }
  if (!done[target]) return std::nullopt;
  std::vector<NodeId> seq;
  for (NodeId v = target; v != -1; v = pred[v]) seq.push_back(v);
  std::reverse(seq.begin(), seq.end());
  return seq;
}

double path_weight(const SegmentGraph& g, const std::vector<NodeId>& seq) {
  double total = 0.0;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const EdgeRecord* e = g.edge(seq[k - 1], seq[k]);
    if (!e) throw InvalidArgument("path_weight: unweighted edge in sequence");
    total += e->weight;
  }
  return total;
}

namespace {

struct Endpoints {
  NodeId s, t;
  std::size_t s_index, t_index;
  double snap_s, snap_t;
};

Endpoints locate(const std::vector<Segment>& segments, Point2 p_s, Point2 p_t) {
  Endpoints e;
  e.s = map_point_to_segment(p_s, segments);
  e.t = map_point_to_segment(p_t, segments);
  e.s_index = nearest_point_index(segments[e.s], p_s);
  e.t_index = nearest_point_index(segments[e.t], p_t);
  e.snap_s = distance(to_point(segments[e.s].points[e.s_index]), p_s);
  e.snap_t = distance(to_point(segments[e.t].points[e.t_index]), p_t);
  return e;
}

/// Handles the cases that need no graph search; returns nullopt otherwise.
std::optional<TraceResult> trivial_trace(const std::vector<Segment>& segments, Point2 p_s,
                                         Point2 p_t, Method method, const Endpoints& e) {
  TraceResult r;
  r.method = method;
  r.stats.snap_start = e.snap_s;
  r.stats.snap_end = e.snap_t;
  if (p_s == p_t) {
    r.path = PlanarPath({p_s});
    r.node_sequence = std::vector<NodeId>{e.s};
    r.stats.converged = true;
    return r;
  }
  if (e.s != e.t) return std::nullopt;
  const PlanarPath core(sub_polyline(segments[e.s], e.s_index, e.t_index));
  r.path = with_snaps(p_s, core, p_t);
  r.node_sequence = std::vector<NodeId>{e.s};
  r.stats.converged = true;
  return r;
}

void finish_segment_trace(TraceResult& r, SegmentGraph& g, const std::vector<NodeId>& seq,
                          Point2 p_s, Point2 p_t, const Endpoints& e) {
  try {
    const PlanarPath core = reconstruct(seq, g, EndTrims{e.s_index, e.t_index});
    r.path = with_snaps(p_s, core, p_t);
    r.node_sequence = seq;
  } catch (const Error& err) {
    log::debug("trace failed: {}", err.what());
    r.path = PlanarPath();
    r.node_sequence.reset();
    r.stats.converged = false;
  }
}

}  // namespace

TraceResult static_dijkstra_trace(const std::vector<Segment>& segments, Extent extent,
                                  Point2 p_s, Point2 p_t, const TraceConfig& cfg,
                                  std::shared_ptr<GeodesicCache> cache,
                                  SegmentGraph* graph_out) {
  const auto t0 = Clock::now();
  if (segments.empty()) return failure(Method::StaticDijkstra, {});
  if (!extent.contains(p_s) || !extent.contains(p_t))
    throw InvalidArgument("trace: seed point outside the image");
  const Endpoints e = locate(segments, p_s, p_t);
  if (auto r = trivial_trace(segments, p_s, p_t, Method::StaticDijkstra, e)) {
    r->stats.wall_time = seconds_since(t0);
    return *r;
  }
  SegmentGraph g = build_initial_graph(segments, extent, cfg.dense_extension(), cfg.graph);
  if (cache) g.set_cache(cache);
  for (NodeId i = 0; i < static_cast<NodeId>(g.node_count()); ++i)
    for (NodeId j : std::set<NodeId>(g.neighbors(i)))
      if (i < j) g.edge_weight(i, j);

  TraceResult r;
  r.method = Method::StaticDijkstra;
  r.stats.snap_start = e.snap_s;
  r.stats.snap_end = e.snap_t;
  r.stats.geodesic_calls = g.geodesic_call_count();
  if (auto seq = dijkstra_path(g, e.s, e.t)) {
    r.stats.converged = true;
    finish_segment_trace(r, g, *seq, p_s, p_t, e);
  }
  r.stats.geodesic_calls = g.geodesic_call_count();
  r.stats.wall_time = seconds_since(t0);
  if (graph_out) *graph_out = std::move(g);
  return r;
}

TraceResult trace_segments(const std::vector<Segment>& segments, Extent extent, Point2 p_s,
                           Point2 p_t, const TraceConfig& cfg,
                           std::shared_ptr<GeodesicCache> cache, SegmentGraph* graph_out) {
  if (cfg.method == Method::StaticDijkstra)
    return static_dijkstra_trace(segments, extent, p_s, p_t, cfg, std::move(cache), graph_out);
  if (cfg.method != Method::DsgRl)
    throw InvalidArgument("trace_segments: method needs the image");
  const auto t0 = Clock::now();
  if (segments.empty()) return failure(Method::DsgRl, {});
  if (!extent.contains(p_s) || !extent.contains(p_t))
    throw InvalidArgument("trace: seed point outside the image");
  const Endpoints e = locate(segments, p_s, p_t);
  if (auto r = trivial_trace(segments, p_s, p_t, Method::DsgRl, e)) {
    r->stats.wall_time = seconds_since(t0);
    return *r;
  }
  SegmentGraph g = build_initial_graph(segments, extent, cfg.agent.ell0, cfg.graph);
  if (cache) g.set_cache(cache);
  TrainResult tr = train(g, e.s, e.t, cfg.agent);
  log::debug("dsg-rl: {} episodes, {} geodesic calls, converged={}", tr.stats.episodes_run,
             tr.stats.geodesic_calls, tr.stats.converged);

  TraceResult r;
  r.method = Method::DsgRl;
  r.stats.snap_start = e.snap_s;
  r.stats.snap_end = e.snap_t;
  r.stats.episodes = tr.stats.episodes_run;
  r.stats.converged = tr.stats.converged;
  r.episodes = std::move(tr.stats.episodes);
  if (tr.stats.converged) finish_segment_trace(r, g, tr.stats.greedy_path, p_s, p_t, e);
  r.stats.geodesic_calls = g.geodesic_call_count();
  r.stats.wall_time = seconds_since(t0);
  if (graph_out) *graph_out = std::move(g);
  return r;
}

TraceResult iso_fm_trace(const RasterImage& img, Point2 p_s, Point2 p_t, const TraceConfig& cfg) {
  const auto t0 = Clock::now();
  const ScalarField field = tubularity(img, cfg.imaging.scales, cfg.imaging.bright_on_dark);
  TraceResult r;
  r.method = Method::IsoFm;
  r.path = isotropic_trace(field, p_s, p_t, cfg.iso_contrast);
  r.stats.converged = true;
  r.stats.wall_time = seconds_since(t0);
  return r;
}

TraceResult trace(const RasterImage& img, Point2 p_s, Point2 p_t, const TraceConfig& cfg,
                  std::shared_ptr<GeodesicCache> cache) {
  if (!img.extent().contains(p_s) || !img.extent().contains(p_t))
    throw InvalidArgument("trace: seed point outside the image");
  if (cfg.method == Method::IsoFm) return iso_fm_trace(img, p_s, p_t, cfg);
  const auto t0 = Clock::now();
  const std::vector<Segment> segments = segments_from_image(img, cfg.imaging);
  TraceResult r = trace_segments(segments, img.extent(), p_s, p_t, cfg, std::move(cache));
  r.stats.wall_time = seconds_since(t0);
  return r;
}

double mean_centerline_error(const PlanarPath& pred, const PlanarPath& gt) {
  if (pred.empty() || gt.empty()) throw InvalidArgument("mean_centerline_error: empty path");
  const PlanarPath samples = pred.resampled(1.0);
  const auto& g = gt.points();
  double total = 0.0;
  for (const Point2 p : samples.points()) {
    double best = distance(p, g.front());
    for (std::size_t k = 1; k < g.size(); ++k) best = std::min(best, point_segment_distance(p, g[k - 1], g[k]));
    total += best;
  }
  return total / static_cast<double>(samples.size());
}

BenchReport bench(const std::vector<BenchCase>& cases, const TraceConfig& cfg) {
  if (cases.empty()) throw InvalidArgument("bench: no cases");
  BenchReport report;
  const Method methods[] = {Method::DsgRl, Method::StaticDijkstra};
  for (Method m : methods) {
    MethodReport mr;
    mr.method = to_string(m);
    report.methods.push_back(mr);
  }
  for (const BenchCase& c : cases) {
    std::vector<Segment> segments =
        c.segments ? *c.segments : segments_from_image(c.image, cfg.imaging);
    const Extent extent = c.image.extent();
    auto cache = std::make_shared<GeodesicCache>();
    for (std::size_t k = 0; k < 2; ++k) {
      TraceConfig mc = cfg;
      mc.method = methods[k];
      BenchCaseOutcome out;
      out.name = c.name;
      out.method = to_string(methods[k]);
      try {
        const TraceResult r = trace_segments(segments, extent, c.start, c.end, mc, cache);
        out.geodesic_calls = r.stats.geodesic_calls;
        out.success = r.ok();
        if (r.ok() && !c.ground_truth.empty())
          out.error = mean_centerline_error(r.path, c.ground_truth);
        if (!r.ok()) out.failure = "no path";
      } catch (const Error& err) {
        out.failure = err.what();
      }
      MethodReport& mr = report.methods[k];
      mr.calls.push_back(out.geodesic_calls);
      mr.errors.push_back(out.error);
      report.cases.push_back(out);
    }
  }
  for (MethodReport& mr : report.methods) {
    double calls = 0.0, err = 0.0;
    int successes = 0, measured = 0;
    for (std::size_t k = 0; k < mr.calls.size(); ++k) {
      calls += static_cast<double>(mr.calls[k]);
      if (mr.errors[k]) {
        err += *mr.errors[k];
        ++measured;
      }
    }
    for (const auto& c : report.cases)
      if (c.method == mr.method && c.success) ++successes;
    mr.mean_calls = calls / static_cast<double>(mr.calls.size());
    mr.mean_error = measured ? err / measured : std::numeric_limits<double>::quiet_NaN();
    mr.success_rate = static_cast<double>(successes) / static_cast<double>(mr.calls.size());
  }
  const double dsg = report.methods[0].mean_calls, stat = report.methods[1].mean_calls;
  report.methods[0].cost_saved_pct = stat > 0.0 ? (stat - dsg) / stat * 100.0 : 0.0;
  return report;
}

}  // namespace tubetrace
