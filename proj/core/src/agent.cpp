#include "tubetrace/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tubetrace/errors.hpp"

namespace tubetrace {

void AgentParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0, 1]");
  if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw InvalidArgument("epsilon0 must lie in [0, 1]");
  if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0))
    throw InvalidArgument("epsilon_min must lie in [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
    throw InvalidArgument("epsilon_decay must lie in (0, 1]");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (!(ell0 > 0.0)) throw InvalidArgument("ell0 must be positive");
  if (goal_bonus && !(*goal_bonus > 0.0)) throw InvalidArgument("goal_bonus must be positive");
  if (max_episodes < 1) throw InvalidArgument("max_episodes must be at least 1");
  if (max_steps_per_episode && *max_steps_per_episode < 1)
    throw InvalidArgument("max_steps_per_episode must be at least 1");
  if (convergence_window < 1) throw InvalidArgument("convergence_window must be at least 1");
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::index: empty range");
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

double QTable::get(NodeId v, NodeId a) const {
  const auto it = entries_.find({v, a});
  return it == entries_.end() ? 0.0 : it->second;
}

double extension_quantile(double ell0, double lambda, double u) {
  return ell0 - std::log1p(-u) / lambda;
}

double sample_extension(const AgentParams& params, Rng& rng, double cap) {
  return std::min(extension_quantile(params.ell0, params.lambda, rng.uniform()), cap);
}

std::set<NodeId> action_space(SegmentGraph& g, NodeId v, const AgentParams& params, Rng& rng) {
  if (params.dynamic_discovery && g.has_geometry()) {
    const double ell = sample_extension(params, rng, g.extent().diagonal());
    for (NodeId j : discover_neighbors(g, v, ell)) g.add_adjacency(v, j);
  }
  return g.neighbors(v);
}

NodeId select_action(const QTable& q, NodeId v, const std::set<NodeId>& actions, double epsilon,
                     Rng& rng) {
  if (actions.empty()) throw InvalidArgument("select_action: empty action set");
  if (rng.uniform() < epsilon) {
    auto it = actions.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.index(actions.size())));
    return *it;
  }
  NodeId best = *actions.begin();
  double best_q = q.get(v, best);
  for (NodeId a : actions) {
    const double qa = q.get(v, a);
    if (qa > best_q) {
      best_q = qa;
      best = a;
    }
  }
  return best;
}

double reward(SegmentGraph& g, NodeId v, NodeId v_next, NodeId target, double goal_bonus) {
  return -g.edge_weight(v, v_next) + (v_next == target ? goal_bonus : 0.0);
}

double q_update(QTable& q, NodeId v, NodeId a, double r, NodeId v_next,
                const std::set<NodeId>& next_actions, bool terminal, const AgentParams& params) {
  double next_max = 0.0;
  if (!terminal && !next_actions.empty()) {
    next_max = -std::numeric_limits<double>::infinity();
    for (NodeId b : next_actions) next_max = std::max(next_max, q.get(v_next, b));
  }
  const double old = q.get(v, a);
  const double delta = r + params.beta * next_max - old;
  const double updated = old + params.alpha * delta;
  q.set(v, a, updated);
  return updated;
}

double resolved_goal_bonus(const AgentParams& params, const SegmentGraph& g) {
  if (params.goal_bonus) return *params.goal_bonus;
  return g.has_geometry() ? 10.0 * g.extent().diagonal() : 1000.0;
}

TrainResult train(SegmentGraph& g, NodeId source, NodeId target, const AgentParams& params) {
  params.validate();
  if (source == target) throw InvalidArgument("train: source equals target");
  if (source < 0 || target < 0 || static_cast<std::size_t>(std::max(source, target)) >=
                                      g.node_count())
    throw InvalidArgument("train: unknown source or target");

  TrainResult out;
  Rng rng(params.rng_seed);
  const double bonus = resolved_goal_bonus(params, g);
  const int max_steps =
      params.max_steps_per_episode.value_or(4 * static_cast<int>(g.node_count()));

  std::optional<std::vector<NodeId>> previous;
  int unchanged = 0;
  double epsilon = params.epsilon0;
  for (int episode = 0; episode < params.max_episodes; ++episode) {
    EpisodeRecord rec;
    rec.episode = episode;
    rec.epsilon = epsilon;
    NodeId v = source;
    while (rec.steps < max_steps) {
      const std::set<NodeId> actions = action_space(g, v, params, rng);
      if (actions.empty()) break;
      const NodeId a = select_action(out.q, v, actions, epsilon, rng);
      const double r = reward(g, v, a, target, bonus);
      const bool terminal = a == target;
      q_update(out.q, v, a, r, a, g.neighbors(a), terminal, params);
      rec.episode_return += r;
      ++rec.steps;
      v = a;
      if (terminal) break;
    }
    rec.geodesic_calls = g.geodesic_call_count();
    auto greedy = extract_policy_path(out.q, g, source, target);
    if (greedy) rec.greedy_path = *greedy;
    out.stats.episodes.push_back(std::move(rec));
    out.stats.episodes_run = episode + 1;

    if (greedy && previous && *greedy == *previous) {
      ++unchanged;
    } else {
      unchanged = greedy ? 1 : 0;
    }
    previous = std::move(greedy);
    if (unchanged >= params.convergence_window) {
      out.stats.stable = true;
      break;
    }
    epsilon = std::max(params.epsilon_min, epsilon * params.epsilon_decay);
  }
  out.stats.geodesic_calls = g.geodesic_call_count();
  if (previous) {
    out.stats.converged = true;
    out.stats.greedy_path = *previous;
  }
  return out;
}

std::optional<std::vector<NodeId>> extract_policy_path(const QTable& q, const SegmentGraph& g,
                                                       NodeId source, NodeId target) {
  std::vector<NodeId> path{source};
  std::set<NodeId> seen{source};
  NodeId v = source;
  while (v != target) {
    std::optional<NodeId> best;
    double best_q = 0.0;
    for (NodeId a : g.neighbors(v)) {
      if (!g.is_weighted(v, a)) continue;
      const double qa = q.get(v, a);
      if (!best || qa > best_q) {
        best = a;
        best_q = qa;
      }
    }
    if (!best || seen.count(*best)) return std::nullopt;
    v = *best;
    seen.insert(v);
    path.push_back(v);
  }
  return path;
}

}  // namespace tubetrace
