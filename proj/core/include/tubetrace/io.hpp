#pragma once

#include <string>
#include <vector>

#include "tubetrace/agent.hpp"
#include "tubetrace/graph.hpp"
#include "tubetrace/pipeline.hpp"

namespace tubetrace {

/// {"segments":[{"id":0,"points":[[x,y],...]}]}
std::string segments_to_json(const std::vector<Segment>& segments);
std::vector<Segment> segments_from_json(const std::string& text);

/// {"nodes":[...],"edges":[{"i":..,"j":..,"w":..,"weighted":bool}],"geodesic_calls":n}
/// Known but unweighted adjacencies appear with "w": null.
std::string graph_to_json(const SegmentGraph& g);

/// {"points":[[x,y],...],"node_sequence":[...],"stats":{...}}; stable across runs.
std::string path_result_to_json(const TraceResult& r);
/// Reads the "points" array of a path JSON document.
PlanarPath path_from_json(const std::string& text);
std::string path_to_json(const PlanarPath& path);

/// One JSON object per line: episode, steps, return, epsilon, geodesic_calls, greedy_path.
std::string episode_trace_jsonl(const std::vector<EpisodeRecord>& episodes);

std::string bench_report_to_json(const BenchReport& report);

struct SeedPair {
  Point2 start;
  Point2 end;
};
/// {"start":[x,y],"end":[x,y]}
SeedPair seeds_from_json(const std::string& text);
std::string seeds_to_json(const SeedPair& seeds);

/// Overrides fields of `cfg` from a flat JSON object. Recognised keys: scales, threshold,
/// min_length, bright_on_dark, xi, r_patch, n_theta, ell0, ell_dense, lambda, alpha, beta,
/// epsilon0, epsilon_min, epsilon_decay, episodes, max_steps, convergence_window, goal_bonus,
/// method, seed. Unknown keys are rejected.
void apply_config_json(TraceConfig& cfg, const std::string& text);
std::string config_to_json(const TraceConfig& cfg);

}  // namespace tubetrace
