#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"
#include "tubetrace/agent.hpp"
#include "tubetrace/errors.hpp"
#include "tubetrace/synthetic.hpp"

using namespace tubetrace;

namespace {

AgentParams fixed_graph_params() {
  AgentParams p;
  p.dynamic_discovery = false;
  return p;
}

/// Diamond: 0 -> {1 (3), 2 (4)}, 1 -> 3 (3), 2 -> 3 (1).
SegmentGraph diamond() {
  SegmentGraph g = SegmentGraph::abstract(4);
  g.set_weight(0, 1, 3);
  g.set_weight(0, 2, 4);
  g.set_weight(1, 3, 3);
  g.set_weight(2, 3, 1);
  return g;
}

Segment hline(int id, int x0, int x1, int y) {
  std::vector<Pixel> pts;
  for (int x = x0; x <= x1; ++x) pts.push_back({x, y});
  return synthetic::make_segment(id, std::move(pts));
}

}  // namespace

TEST_SUITE("agent") {

TEST_CASE("extension sampling: support bound, hand quantile and sample mean") {
  CHECK(extension_quantile(3.0, 0.2, 0.0) == 3.0);
  CHECK(extension_quantile(5.0, 0.5, 0.5) == doctest::Approx(5.0 + std::log(2.0) / 0.5));
  CHECK(extension_quantile(5.0, 0.5, 0.5) == doctest::Approx(6.3863).epsilon(1e-4));

  AgentParams p;
  p.ell0 = 5.0;
  p.lambda = 0.5;
  Rng rng(11);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double ell = sample_extension(p, rng, 1e9);
    CHECK_FALSE(ell < 5.0);
    sum += ell;
  }
  CHECK(sum / n == doctest::Approx(7.0).epsilon(0.05 / 7.0));

  Rng capped(3);
  for (int k = 0; k < 1000; ++k) CHECK(sample_extension(p, capped, 6.0) <= 6.0);
}

TEST_CASE("rng uniforms are in range and reproducible") {
  Rng a(5), b(5);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
  CHECK(a.index(7) < 7);
  CHECK_THROWS_AS(a.index(0), InvalidArgument);
}

TEST_CASE("greedy selection and ties") {
  QTable q;
  Rng rng(0);
  q.set(0, 1, -1.0);
  q.set(0, 2, -3.0);
  CHECK(select_action(q, 0, {1, 2}, 0.0, rng) == 1);
  CHECK(select_action(QTable{}, 0, {4, 2, 9}, 0.0, rng) == 2);
  // an absent entry (0) beats a negative one
  CHECK(select_action(q, 0, {1, 2, 5}, 0.0, rng) == 5);
  CHECK_THROWS_AS(select_action(q, 0, {}, 0.0, rng), InvalidArgument);
}

TEST_CASE("fully random selection is uniform") {
  QTable q;
  q.set(0, 1, 100.0);
  Rng rng(2024);
  const std::set<NodeId> actions{1, 2, 3, 4};
  std::map<NodeId, int> counts;
  const int n = 10000;
  for (int k = 0; k < n; ++k) ++counts[select_action(q, 0, actions, 1.0, rng)];
  const double expected = n / 4.0;
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (NodeId a : actions) {
    CAPTURE(a);
    CHECK(std::abs(counts[a] - expected) < 3.0 * sigma);
  }
}

TEST_CASE("reward signs and lazy weighting") {
  SegmentGraph g = SegmentGraph::abstract(3);
  g.set_weight(0, 1, 10.0);
  g.set_weight(1, 2, 10.0);
  CHECK(reward(g, 0, 1, 2, 1000.0) == -10.0);
  CHECK(reward(g, 1, 2, 2, 1000.0) == 990.0);

  SegmentGraph geo({hline(0, 10, 29, 30), hline(1, 39, 58, 30)}, {80, 60});
  const double r1 = reward(geo, 0, 1, 1, 500.0);
  CHECK(geo.geodesic_call_count() == 1);
  CHECK(reward(geo, 0, 1, 1, 500.0) == r1);
  CHECK(geo.geodesic_call_count() == 1);
}

TEST_CASE("temporal-difference update hand values") {
  AgentParams p;
  p.alpha = 0.1;
  p.beta = 1.0;
  QTable q;
  q.set(1, 2, -3.0);
  q.set(1, 3, -4.0);
  CHECK(q_update(q, 0, 1, -2.0, 1, {2, 3}, false, p) == doctest::Approx(-0.5));
  CHECK(q.get(0, 1) == doctest::Approx(-0.5));

  AgentParams one = p;
  one.alpha = 1.0;
  QTable t;
  CHECK(q_update(t, 0, 1, 990.0, 1, {0, 2}, true, one) == 990.0);

  // alpha = 0 cannot be configured through validate(); the update itself is still a no-op
  AgentParams frozen = p;
  frozen.alpha = 0.0;
  QTable f;
  f.set(0, 1, 4.0);
  CHECK(q_update(f, 0, 1, -50.0, 1, {}, false, frozen) == 4.0);
  for (double r : {-7.0, 3.0, 1e6}) {
    q_update(f, 0, 1, r, 2, {0, 1}, false, frozen);
    CHECK(f.get(0, 1) == 4.0);
  }
  // a dead end contributes no bootstrap
  QTable d;
  CHECK(q_update(d, 0, 1, -2.0, 1, {}, false, one) == -2.0);
}

TEST_CASE("two-node graph converges to bonus minus weight") {
  SegmentGraph g = SegmentGraph::abstract(2);
  g.set_weight(0, 1, 5.0);
  AgentParams p = fixed_graph_params();
  p.goal_bonus = 1000.0;
  p.max_episodes = 500;
  p.convergence_window = 1000;  // run all 500 episodes
  const TrainResult r = train(g, 0, 1, p);
  CHECK(r.stats.episodes_run == 500);
  CHECK(r.stats.converged);
  CHECK(r.stats.greedy_path == std::vector<NodeId>{0, 1});
  CHECK(r.q.get(0, 1) == doctest::Approx(995.0).epsilon(1e-9));
  CHECK(std::abs(r.q.get(0, 1) - 995.0) < 1e-6);
  const auto path = extract_policy_path(r.q, g, 0, 1);
  REQUIRE(path);
  CHECK(*path == std::vector<NodeId>{0, 1});
}

TEST_CASE("diamond prefers the cheaper branch") {
  // value-iteration oracle on the 4-node graph
  const SegmentGraph oracle_graph = diamond();
  std::vector<double> cost_to_go{1e9, 1e9, 1e9, 0.0};
  for (int it = 0; it < 10; ++it)
    for (const auto& [k, rec] : oracle_graph.edges()) {
      auto [u, v] = k;
      cost_to_go[u] = std::min(cost_to_go[u], rec.weight + cost_to_go[v]);
      cost_to_go[v] = std::min(cost_to_go[v], rec.weight + cost_to_go[u]);
    }
  CHECK(cost_to_go[0] == 5.0);
  const NodeId oracle_next = 3.0 + cost_to_go[1] < 4.0 + cost_to_go[2] ? 1 : 2;

  SegmentGraph g = diamond();
  AgentParams p = fixed_graph_params();
  p.alpha = 0.5;
  p.max_episodes = 3000;
  p.convergence_window = 200;
  const TrainResult r = train(g, 0, 3, p);
  CHECK(r.stats.converged);
  CHECK(r.stats.greedy_path == std::vector<NodeId>{0, oracle_next, 3});
  const auto path = extract_policy_path(r.q, g, 0, 3);
  REQUIRE(path);
  CHECK(*path == std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("unreachable target reports failure") {
  SegmentGraph g = SegmentGraph::abstract(4);
  g.set_weight(0, 1, 1.0);
  g.set_weight(1, 2, 1.0);
  AgentParams p = fixed_graph_params();
  p.max_episodes = 50;
  const TrainResult r = train(g, 0, 3, p);
  CHECK_FALSE(r.stats.converged);
  CHECK(r.stats.greedy_path.empty());
  CHECK_FALSE(extract_policy_path(r.q, g, 0, 3));

  // geometric version: the target segment is far from everything
  SegmentGraph geo({hline(0, 5, 20, 5), hline(1, 24, 40, 5), hline(2, 150, 160, 150)},
                   {200, 200});
  AgentParams q;
  q.lambda = 5.0;  // extensions barely exceed ell0
  q.max_episodes = 30;
  const TrainResult rg = train(geo, 0, 2, q);
  CHECK_FALSE(rg.stats.converged);
}

TEST_CASE("untrained table on a cycle trips the revisit guard") {
  SegmentGraph g = SegmentGraph::abstract(4);
  g.set_weight(0, 1, 1.0);
  g.set_weight(1, 2, 1.0);
  g.set_weight(0, 2, 1.0);
  g.set_weight(2, 3, 1.0);
  // 0 -> 1 (lowest id), 1 -> 0 (lowest id) revisits
  CHECK_FALSE(extract_policy_path(QTable{}, g, 0, 3));
}

TEST_CASE("policy extraction ignores unweighted adjacencies") {
  SegmentGraph g = SegmentGraph::abstract(3);
  g.set_weight(0, 2, 1.0);
  g.add_adjacency(0, 1);
  QTable q;
  q.set(0, 1, 50.0);
  const auto path = extract_policy_path(q, g, 0, 2);
  REQUIRE(path);
  CHECK(*path == std::vector<NodeId>{0, 2});
}

TEST_CASE("action space merges known and discovered neighbours") {
  // gap of 9 between segments 0 and 1; 1 and 2 are within the initial reach
  const std::vector<Segment> segs{hline(0, 5, 20, 20), hline(1, 30, 45, 20),
                                  hline(2, 48, 60, 20), hline(3, 150, 170, 150)};
  SegmentGraph g = build_initial_graph(segs, {200, 200}, 1.0);
  REQUIRE(g.neighbors(1) == std::set<NodeId>{2});

  AgentParams tight;
  tight.ell0 = 1.0;
  tight.lambda = 1e9;
  Rng rng(1);
  CHECK(action_space(g, 1, tight, rng) == std::set<NodeId>{2});
  CHECK(action_space(g, 3, tight, rng).empty());

  AgentParams wide;
  wide.ell0 = 8.0;
  wide.lambda = 0.2;
  for (int k = 0; k < 20; ++k) {
    const std::set<NodeId> known = g.neighbors(1);
    const std::set<NodeId> got = action_space(g, 1, wide, rng);
    CHECK(std::includes(got.begin(), got.end(), known.begin(), known.end()));
    CHECK(got == g.neighbors(1));
  }
  CHECK(g.adjacent(0, 1));
  CHECK(g.geodesic_call_count() == 0);
}

TEST_CASE("training on a dense layout: schedule, finiteness, laziness, determinism") {
  const auto layout = synthetic::dense_layout(4);
  const NodeId s = map_point_to_segment(layout.start, layout.segments);
  const NodeId t = map_point_to_segment(layout.end, layout.segments);
  AgentParams p;
  p.rng_seed = 4;
  SegmentGraph g = build_initial_graph(layout.segments, layout.extent, p.ell0);
  const TrainResult r = train(g, s, t, p);

  double last = 1.0;
  for (const EpisodeRecord& e : r.stats.episodes) {
    CHECK(e.epsilon <= last);
    CHECK(e.epsilon >= p.epsilon_min);
    last = e.epsilon;
  }
  for (const auto& [k, v] : r.q.entries()) {
    CHECK(std::isfinite(v));
    CHECK(g.adjacent(k.first, k.second));
  }
  const std::size_t n = g.node_count();
  CHECK(r.stats.geodesic_calls <= g.adjacency_count());
  CHECK(r.stats.geodesic_calls < n * (n - 1) / 2);
  CHECK(r.stats.geodesic_calls >= g.edges().size());

  SegmentGraph g2 = build_initial_graph(layout.segments, layout.extent, p.ell0);
  const TrainResult r2 = train(g2, s, t, p);
  CHECK(r2.q.entries() == r.q.entries());
  CHECK(r2.stats.greedy_path == r.stats.greedy_path);
  CHECK(r2.stats.geodesic_calls == r.stats.geodesic_calls);
}

TEST_CASE("parameter validation") {
  AgentParams p;
  CHECK_NOTHROW(p.validate());
  auto bad = [](auto mutate) {
    AgentParams q;
    mutate(q);
    return q;
  };
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.alpha = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.beta = 1.5; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.lambda = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.ell0 = -1.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.goal_bonus = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](AgentParams& q) { q.max_episodes = 0; }).validate(), InvalidArgument);
  SegmentGraph g = SegmentGraph::abstract(2);
  CHECK_THROWS_AS(train(g, 1, 1, p), InvalidArgument);
  CHECK_THROWS_AS(train(g, 0, 5, p), InvalidArgument);
}

TEST_CASE("goal bonus fallbacks") {
  AgentParams p;
  CHECK(resolved_goal_bonus(p, SegmentGraph::abstract(2)) == 1000.0);
  const SegmentGraph geo({hline(0, 0, 5, 0)}, {30, 40});
  CHECK(resolved_goal_bonus(p, geo) == doctest::Approx(500.0));
  p.goal_bonus = 42.0;
  CHECK(resolved_goal_bonus(p, geo) == 42.0);
}

}  // TEST_SUITE
