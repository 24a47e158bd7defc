#include "tubetrace/io.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "tubetrace/errors.hpp"

namespace tubetrace {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_of(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json points_json(const PlanarPath& path) {
  json pts = json::array();
  for (Point2 p : path.points()) pts.push_back(point_json(p));
  return pts;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string segments_to_json(const std::vector<Segment>& segments) {
  json arr = json::array();
  for (const Segment& s : segments) {
    json pts = json::array();
    for (Pixel p : s.points) pts.push_back(json::array({p.x, p.y}));
    arr.push_back({{"id", s.id}, {"points", std::move(pts)}});
  }
  return json{{"segments", std::move(arr)}}.dump();
}

std::vector<Segment> segments_from_json(const std::string& text) {
  const json doc = parse(text);
  if (!doc.contains("segments") || !doc["segments"].is_array())
    throw FormatError("segments JSON: missing \"segments\" array");
  std::vector<Segment> out;
  for (const json& js : doc["segments"]) {
    Segment s;
    s.id = js.at("id").get<int>();
    for (const json& p : js.at("points")) {
      const Point2 q = point_of(p);
      s.points.push_back({static_cast<int>(q.x), static_cast<int>(q.y)});
    }
    if (s.points.size() < 2) throw FormatError("segments JSON: segment with < 2 points");
    s.tangent_a = fit_end_tangent(s.points, true);
    s.tangent_b = fit_end_tangent(s.points, false);
    out.push_back(std::move(s));
  }
  return out;
}

std::string graph_to_json(const SegmentGraph& g) {
  json nodes = json::array();
  for (std::size_t v = 0; v < g.node_count(); ++v) nodes.push_back(v);
  json edges = json::array();
  for (NodeId i = 0; i < static_cast<NodeId>(g.node_count()); ++i) {
    for (NodeId j : g.neighbors(i)) {
      if (j < i) continue;
      const EdgeRecord* e = g.edge(i, j);
      json je{{"i", i}, {"j", j}, {"weighted", e != nullptr}};
      je["w"] = e ? json(e->weight) : json(nullptr);
      if (e && e->unreachable) je["unreachable"] = true;
      edges.push_back(std::move(je));
    }
  }
  return json{{"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"geodesic_calls", g.geodesic_call_count()}}
      .dump();
}

std::string path_result_to_json(const TraceResult& r) {
  json doc;
  doc["points"] = points_json(r.path);
  doc["node_sequence"] = r.node_sequence ? json(*r.node_sequence) : json(nullptr);
  doc["method"] = to_string(r.method);
  doc["stats"] = {{"geodesic_calls", r.stats.geodesic_calls},
                  {"episodes", r.stats.episodes},
                  {"converged", r.stats.converged},
                  {"snap_start", r.stats.snap_start},
                  {"snap_end", r.stats.snap_end}};
  return doc.dump();
}

PlanarPath path_from_json(const std::string& text) {
  const json doc = parse(text);
  const json* pts = nullptr;
  if (doc.is_object() && doc.contains("points")) pts = &doc["points"];
  else if (doc.is_array()) pts = &doc;
  if (!pts || !pts->is_array()) throw FormatError("path JSON: missing \"points\" array");
  std::vector<Point2> out;
  for (const json& p : *pts) out.push_back(point_of(p));
  return PlanarPath(std::move(out));
}

std::string path_to_json(const PlanarPath& path) {
  return json{{"points", points_json(path)}}.dump();
}

std::string episode_trace_jsonl(const std::vector<EpisodeRecord>& episodes) {
  std::ostringstream out;
  for (const EpisodeRecord& e : episodes) {
    out << json{{"episode", e.episode},
                {"steps", e.steps},
                {"return", e.episode_return},
                {"epsilon", e.epsilon},
                {"geodesic_calls", e.geodesic_calls},
                {"greedy_path", e.greedy_path}}
               .dump()
        << '\n';
  }
  return out.str();
}

std::string bench_report_to_json(const BenchReport& report) {
  json methods = json::array();
  for (const MethodReport& m : report.methods) {
    methods.push_back({{"method", m.method},
                       {"mean_calls", m.mean_calls},
                       {"cost_saved_pct", m.cost_saved_pct},
                       {"mean_error", number_or_null(m.mean_error)},
                       {"success_rate", m.success_rate}});
  }
  json cases = json::array();
  for (const BenchCaseOutcome& c : report.cases) {
    json jc{{"case", c.name},
            {"method", c.method},
            {"success", c.success},
            {"geodesic_calls", c.geodesic_calls},
            {"error", c.error ? json(*c.error) : json(nullptr)}};
    if (!c.failure.empty()) jc["failure"] = c.failure;
    cases.push_back(std::move(jc));
  }
  return json{{"methods", std::move(methods)}, {"cases", std::move(cases)}}.dump(2);
}

SeedPair seeds_from_json(const std::string& text) {
  const json doc = parse(text);
  if (!doc.is_object() || !doc.contains("start") || !doc.contains("end"))
    throw FormatError("seeds JSON: expected {\"start\":[x,y],\"end\":[x,y]}");
  return {point_of(doc["start"]), point_of(doc["end"])};
}

std::string seeds_to_json(const SeedPair& seeds) {
  return json{{"start", point_json(seeds.start)}, {"end", point_json(seeds.end)}}.dump();
}

void apply_config_json(TraceConfig& cfg, const std::string& text) {
  const json doc = parse(text);
  if (!doc.is_object()) throw FormatError("config JSON: expected an object");
  try {
    for (const auto& [key, v] : doc.items()) {
      if (v.is_null()) continue;
      if (key == "scales") cfg.imaging.scales = v.get<std::vector<double>>();
      else if (key == "threshold") cfg.imaging.threshold = v.get<double>();
      else if (key == "min_length") cfg.imaging.min_length = v.get<int>();
      else if (key == "bright_on_dark") cfg.imaging.bright_on_dark = v.get<bool>();
      else if (key == "xi") cfg.graph.xi = v.get<double>();
      else if (key == "r_patch") cfg.graph.r_patch = v.get<double>();
      else if (key == "n_theta") cfg.graph.elastica.n_theta = v.get<int>();
      else if (key == "ell0") cfg.agent.ell0 = v.get<double>();
      else if (key == "ell_dense") cfg.ell_dense = v.get<double>();
      else if (key == "lambda") cfg.agent.lambda = v.get<double>();
      else if (key == "alpha") cfg.agent.alpha = v.get<double>();
      else if (key == "beta") cfg.agent.beta = v.get<double>();
      else if (key == "epsilon0") cfg.agent.epsilon0 = v.get<double>();
      else if (key == "epsilon_min") cfg.agent.epsilon_min = v.get<double>();
      else if (key == "epsilon_decay") cfg.agent.epsilon_decay = v.get<double>();
      else if (key == "episodes") cfg.agent.max_episodes = v.get<int>();
      else if (key == "max_steps") cfg.agent.max_steps_per_episode = v.get<int>();
      else if (key == "convergence_window") cfg.agent.convergence_window = v.get<int>();
      else if (key == "goal_bonus") cfg.agent.goal_bonus = v.get<double>();
      else if (key == "method") cfg.method = parse_method(v.get<std::string>());
      else if (key == "seed") cfg.agent.rng_seed = v.get<std::uint64_t>();
      else throw FormatError("config JSON: unknown key '" + key + "'");
    }
  } catch (const json::type_error& e) {
    throw FormatError(std::string("config JSON: ") + e.what());
  }
}

std::string config_to_json(const TraceConfig& cfg) {
  json doc{{"scales", cfg.imaging.scales},
           {"threshold", cfg.imaging.threshold},
           {"min_length", cfg.imaging.min_length},
           {"bright_on_dark", cfg.imaging.bright_on_dark},
           {"xi", cfg.graph.xi},
           {"r_patch", cfg.graph.r_patch},
           {"n_theta", cfg.graph.elastica.n_theta},
           {"ell0", cfg.agent.ell0},
           {"ell_dense", cfg.dense_extension()},
           {"lambda", cfg.agent.lambda},
           {"alpha", cfg.agent.alpha},
           {"beta", cfg.agent.beta},
           {"epsilon0", cfg.agent.epsilon0},
           {"epsilon_min", cfg.agent.epsilon_min},
           {"epsilon_decay", cfg.agent.epsilon_decay},
           {"episodes", cfg.agent.max_episodes},
           {"convergence_window", cfg.agent.convergence_window},
           {"method", to_string(cfg.method)},
           {"seed", cfg.agent.rng_seed}};
  doc["goal_bonus"] = cfg.agent.goal_bonus ? json(*cfg.agent.goal_bonus) : json(nullptr);
  doc["max_steps"] =
      cfg.agent.max_steps_per_episode ? json(*cfg.agent.max_steps_per_episode) : json(nullptr);
  return doc.dump(2);
}

}  // namespace tubetrace
