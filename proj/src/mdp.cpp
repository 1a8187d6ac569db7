#include "crsail/mdp.hpp"

#include <cmath>
#include <numeric>

namespace crsail {

double Trajectory::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

Trajectory rollout_from(const Environment& env, const Policy& policy, const State& initial) {
  if (initial.size() != env.state_dim()) {
    throw ConfigError("rollout: initial state has dimension " + std::to_string(initial.size()) +
                      ", environment expects " + std::to_string(env.state_dim()));
  }
  if (!all_finite(initial)) throw NumericalFailure("rollout: non-finite initial state", 0);

  const int horizon = env.horizon();
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);
  traj.states.push_back(initial);

  for (int t = 0; t < horizon; ++t) {
    Action u = policy.act(traj.states.back());
    if (u.size() != env.action_dim()) {
      throw ConfigError("rollout: policy produced action of dimension " +
                        std::to_string(u.size()) + ", environment expects " +
                        std::to_string(env.action_dim()));
    }
    if (!all_finite(u)) throw NumericalFailure("rollout: policy produced a non-finite action", t);
    u = env.clip_action(u);
    EnvStep s = env.step(traj.states.back(), u);
    if (!all_finite(s.next_state) || !std::isfinite(s.reward)) {
      throw NumericalFailure("rollout: environment produced a non-finite state", t);
    }
    traj.actions.push_back(std::move(u));
    traj.rewards.push_back(s.reward);
    traj.states.push_back(std::move(s.next_state));
    if (s.terminal) {
      traj.terminated = true;
      break;
    }
  }
  return traj;
}

Trajectory rollout(const Environment& env, const Policy& policy, std::uint64_t seed) {
  Rng rng(seed);
  return rollout_from(env, policy, env.sample_initial_state(rng));
}

ReturnStats evaluate_policy(const Environment& env, const Policy& policy, int n_episodes,
                            std::uint64_t seed) {
  if (n_episodes < 1) throw ConfigError("evaluate_policy: n_episodes must be >= 1");
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    returns.push_back(
        rollout(env, policy, derive_seed(seed, Stream::kEvaluation, static_cast<std::uint64_t>(e)))
            .total_reward());
  }
  ReturnStats stats;
  stats.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n_episodes;
  double ss = 0.0;
  for (double r : returns) ss += (r - stats.mean) * (r - stats.mean);
  stats.std = std::sqrt(ss / n_episodes);
  return stats;
}

}  // namespace crsail
