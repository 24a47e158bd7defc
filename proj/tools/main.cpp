#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "service.hpp"
#include "tubetrace/errors.hpp"
#include "tubetrace/io.hpp"
#include "tubetrace/logging.hpp"
#include "tubetrace/pipeline.hpp"
#include "tubetrace/synthetic.hpp"

namespace fs = std::filesystem;
using namespace tubetrace;

namespace {

/// Failure after arguments were accepted; maps to exit code 2.
class ProcessingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ProcessingError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::optional<fs::path>& p, const std::string& text) {
  if (!p) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(*p, std::ios::binary);
  if (!out) throw ProcessingError("cannot write " + p->string());
  out << text << '\n';
}

Point2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("point", "expected x,y");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("point", "expected x,y");
  }
}

/// Imaging flags shared by several subcommands.
struct ImagingFlags {
  std::optional<double> threshold;
  std::optional<int> min_length;
  std::vector<double> scales;
  bool dark_on_bright = false;

  void add(CLI::App* app) {
    app->add_option("--threshold", threshold, "Tubularity threshold in (0,1)");
    app->add_option("--min-length", min_length, "Minimum segment length in pixels");
    app->add_option("--scales", scales, "Filter scales in pixels")->delimiter(',');
    app->add_flag("--dark-on-bright", dark_on_bright, "Structures are darker than background");
  }
  void apply(ImagingParams& p) const {
    if (threshold) p.threshold = *threshold;
    if (min_length) p.min_length = *min_length;
    if (!scales.empty()) p.scales = scales;
    if (dark_on_bright) p.bright_on_dark = false;
  }
};

/// Trace parameter flags; they override --config.
struct TraceFlags {
  std::optional<fs::path> config;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<double> xi, ell0, lambda, r_patch, epsilon0, goal_bonus, ell_dense;
  std::optional<int> episodes;
  ImagingFlags imaging;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON trace configuration")->check(CLI::ExistingFile);
    app->add_option("--method", method, "dsg-rl, iso-fm or static-dijkstra")
        ->check(CLI::IsMember({"dsg-rl", "iso-fm", "static-dijkstra"}));
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--xi", xi, "Elastica stiffness in pixels");
    app->add_option("--ell0", ell0, "Minimum extension length");
    app->add_option("--lambda", lambda, "Extension sampling rate");
    app->add_option("--r-patch", r_patch, "Neighbour patch radius");
    app->add_option("--epsilon0", epsilon0, "Initial exploration rate");
    app->add_option("--goal-bonus", goal_bonus, "Reward for reaching the target");
    app->add_option("--ell-dense", ell_dense, "Extension of the static baseline graph");
    app->add_option("--episodes", episodes, "Maximum training episodes");
    imaging.add(app);
  }
  TraceConfig build() const {
    TraceConfig cfg;
    if (config) apply_config_json(cfg, read_text(*config));
    if (method) cfg.method = parse_method(*method);
    if (seed) cfg.agent.rng_seed = *seed;
    if (xi) cfg.graph.xi = *xi;
    if (ell0) cfg.agent.ell0 = *ell0;
    if (lambda) cfg.agent.lambda = *lambda;
    if (r_patch) cfg.graph.r_patch = *r_patch;
    if (epsilon0) cfg.agent.epsilon0 = *epsilon0;
    if (goal_bonus) cfg.agent.goal_bonus = *goal_bonus;
    if (ell_dense) cfg.ell_dense = *ell_dense;
    if (episodes) cfg.agent.max_episodes = *episodes;
    imaging.apply(cfg.imaging);
    cfg.agent.validate();
    return cfg;
  }
};

std::vector<BenchCase> load_cases(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ProcessingError("not a directory: " + dir.string());
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".pgm" || entry.path().extension() == ".png")
      images.push_back(entry.path());
  std::sort(images.begin(), images.end());
  std::vector<BenchCase> cases;
  for (const fs::path& img : images) {
    const fs::path stem = img.parent_path() / img.stem();
    const fs::path seeds = stem.string() + ".seeds.json";
    if (!fs::exists(seeds)) continue;
    BenchCase c;
    c.name = img.stem().string();
    c.image = load_image(img);
    const SeedPair sp = seeds_from_json(read_text(seeds));
    c.start = sp.start;
    c.end = sp.end;
    if (const fs::path gt = stem.string() + ".gt.json"; fs::exists(gt))
      c.ground_truth = path_from_json(read_text(gt));
    if (const fs::path segs = stem.string() + ".segments.json"; fs::exists(segs))
      c.segments = segments_from_json(read_text(segs));
    cases.push_back(std::move(c));
  }
  if (cases.empty()) throw ProcessingError("no cases (<stem>.pgm + <stem>.seeds.json) in " + dir.string());
  return cases;
}

void write_case(const fs::path& dir, const std::string& stem, const RasterImage& img, Point2 s,
                Point2 t, const PlanarPath& gt, const std::vector<Segment>* segments) {
  save_pgm(img, dir / (stem + ".pgm"));
  write_text(dir / (stem + ".seeds.json"), seeds_to_json({s, t}));
  write_text(dir / (stem + ".gt.json"), path_to_json(gt));
  if (segments) write_text(dir / (stem + ".segments.json"), segments_to_json(*segments));
}

service::Service* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tubular centerline tracing between two seed points"};
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* seg_cmd = app.add_subcommand("segments", "Extract centerline segments as JSON");
  fs::path seg_image;
  std::optional<fs::path> seg_out;
  ImagingFlags seg_imaging;
  seg_cmd->add_option("--image", seg_image, "Input PGM/PNG")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--out", seg_out, "Output file (default stdout)");
  seg_imaging.add(seg_cmd);

  auto* trace_cmd = app.add_subcommand("trace", "Trace a centerline between two points");
  fs::path trace_image;
  std::string start_s, end_s;
  std::optional<fs::path> trace_out, trace_log;
  TraceFlags trace_flags;
  trace_cmd->add_option("--image", trace_image, "Input PGM/PNG")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--start", start_s, "Start point x,y")->required();
  trace_cmd->add_option("--end", end_s, "End point x,y")->required();
  trace_cmd->add_option("--out", trace_out, "Output path JSON (default stdout)");
  trace_cmd->add_option("--trace-log", trace_log, "Write the per-episode JSON-lines log here");
  trace_flags.add(trace_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Mean centerline error of a path against ground truth");
  fs::path eval_pred, eval_gt;
  eval_cmd->add_option("--pred", eval_pred, "Predicted path JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth path JSON")->required()->check(CLI::ExistingFile);

  auto* bench_cmd = app.add_subcommand("bench", "Compare dsg-rl with the static baseline on a case directory");
  fs::path bench_dir;
  std::optional<fs::path> bench_out;
  TraceFlags bench_flags;
  bench_cmd->add_option("--cases", bench_dir, "Directory of <stem>.pgm, <stem>.seeds.json, <stem>.gt.json")
      ->required();
  bench_cmd->add_option("--out", bench_out, "Output report JSON (default stdout)");
  bench_flags.add(bench_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<fs::path> static_dir;
  serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--static-dir", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);

  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic demo and benchmark cases");
  fs::path synth_dir;
  int synth_count = 10;
  synth_cmd->add_option("--out", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--count", synth_count, "Layouts per suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    configure_logging_from_env();
    if (!log_level.empty()) set_log_level(log_level);

    if (*seg_cmd) {
      ImagingParams p;
      seg_imaging.apply(p);
      write_text(seg_out, segments_to_json(segments_from_image(load_image(seg_image), p)));
      return 0;
    }
    if (*trace_cmd) {
      const Point2 start = parse_point(start_s), end = parse_point(end_s);
      const TraceConfig cfg = trace_flags.build();
      const TraceResult r = trace(load_image(trace_image), start, end, cfg);
      write_text(trace_out, path_result_to_json(r));
      if (trace_log) {
        std::ofstream out(*trace_log, std::ios::binary);
        out << episode_trace_jsonl(r.episodes);
      }
      if (!r.ok()) {
        std::cerr << "tubetrace: no path found between the seed points\n";
        return 2;
      }
      return 0;
    }
    if (*eval_cmd) {
      const double e = mean_centerline_error(path_from_json(read_text(eval_pred)),
                                             path_from_json(read_text(eval_gt)));
      std::printf("%.6f\n", e);
      return 0;
    }
    if (*bench_cmd) {
      const TraceConfig cfg = bench_flags.build();
      write_text(bench_out, bench_report_to_json(bench(load_cases(bench_dir), cfg)));
      return 0;
    }
    if (*serve_cmd) {
      service::ServiceOptions opts;
      opts.static_dir = static_dir;
      service::Service svc(opts);
      const int bound = svc.bind(host, port);
      if (bound < 0) throw ProcessingError("cannot bind " + host + ":" + std::to_string(port));
      g_service = &svc;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "tubetrace: listening on http://" << host << ':' << bound << '\n';
      svc.listen_after_bind();
      g_service = nullptr;
      return 0;
    }
    if (*synth_cmd) {
      fs::create_directories(synth_dir / "demo");
      fs::create_directories(synth_dir / "dense");
      fs::create_directories(synth_dir / "sparse");
      const auto tube = synthetic::sine_tube(0);
      write_case(synth_dir / "demo", "sine_tube", tube.image, tube.start, tube.end,
                 tube.ground_truth, nullptr);
      for (int k = 0; k < synth_count; ++k) {
        const std::string stem = "layout_" + std::to_string(k);
        const auto dense = synthetic::dense_layout(static_cast<std::uint64_t>(k));
        write_case(synth_dir / "dense", stem, synthetic::render_layout(dense), dense.start,
                   dense.end, dense.ground_truth, &dense.segments);
        const auto sparse = synthetic::sparse_layout(static_cast<std::uint64_t>(k));
        write_case(synth_dir / "sparse", stem, synthetic::render_layout(sparse), sparse.start,
                   sparse.end, sparse.ground_truth, &sparse.segments);
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "tubetrace: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tubetrace: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
