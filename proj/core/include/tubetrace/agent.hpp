#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tubetrace/graph.hpp"

namespace tubetrace {

struct AgentParams {
  double alpha = 0.1;
  double beta = 1.0;
  double epsilon0 = 0.9;
  double epsilon_min = 0.05;
  double epsilon_decay = 0.99;
  double lambda = 0.2;
  double ell0 = 3.0;
  /// Defaults to 10 x image diagonal, or 1000 on graphs without geometry.
  std::optional<double> goal_bonus;
  int max_episodes = 500;
  /// Defaults to 4 x node count.
  std::optional<int> max_steps_per_episode;
  int convergence_window = 20;
  std::uint64_t rng_seed = 0;
  /// Off for fixed, fully known graphs.
  bool dynamic_discovery = true;

  void validate() const;
};

/// The agent's random stream: 64-bit Mersenne twister, uniforms with 53-bit resolution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in {0, ..., n-1}.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// State-action values; absent entries read as 0.
class QTable {
 public:
  double get(NodeId v, NodeId a) const;
  void set(NodeId v, NodeId a, double value) { entries_[{v, a}] = value; }
  bool contains(NodeId v, NodeId a) const { return entries_.count({v, a}) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<NodeId, NodeId>, double>& entries() const { return entries_; }

 private:
  std::map<std::pair<NodeId, NodeId>, double> entries_;
};

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  double episode_return = 0.0;
  double epsilon = 0.0;
  std::size_t geodesic_calls = 0;
  std::vector<NodeId> greedy_path;  // empty when the greedy walk fails
};

struct EpisodeStats {
  int episodes_run = 0;
  std::vector<EpisodeRecord> episodes;
  std::size_t geodesic_calls = 0;
  /// The final greedy walk reaches the target.
  bool converged = false;
  /// The greedy path stayed unchanged for the full convergence window.
  bool stable = false;
  std::vector<NodeId> greedy_path;
};

double sample_extension(const AgentParams& params, Rng& rng, double cap);
/// Inverse CDF of the shifted exponential for a given u in [0, 1).
double extension_quantile(double ell0, double lambda, double u);

std::set<NodeId> action_space(SegmentGraph& g, NodeId v, const AgentParams& params, Rng& rng);

NodeId select_action(const QTable& q, NodeId v, const std::set<NodeId>& actions, double epsilon,
                     Rng& rng);

double reward(SegmentGraph& g, NodeId v, NodeId v_next, NodeId target, double goal_bonus);

double q_update(QTable& q, NodeId v, NodeId a, double r, NodeId v_next,
                const std::set<NodeId>& next_actions, bool terminal, const AgentParams& params);

struct TrainResult {
  QTable q;
  EpisodeStats stats;
};

TrainResult train(SegmentGraph& g, NodeId source, NodeId target, const AgentParams& params);

/// Greedy walk over weighted adjacencies; nullopt on a revisit or dead end.
std::optional<std::vector<NodeId>> extract_policy_path(const QTable& q, const SegmentGraph& g,
                                                       NodeId source, NodeId target);

double resolved_goal_bonus(const AgentParams& params, const SegmentGraph& g);

}  // namespace tubetrace
