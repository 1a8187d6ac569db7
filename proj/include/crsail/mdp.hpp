#pragma once

#include <string>
#include <vector>

#include "crsail/core.hpp"

namespace crsail {

struct EnvStep {
  State next_state;
  double reward = 0.0;
  bool terminal = false;
};

/// Stateless episodic environment. The state is carried by the caller, so a
/// step is a pure function and rollouts can run concurrently on one instance.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Episode horizon T_max.
  virtual int horizon() const = 0;

  virtual State sample_initial_state(Rng& rng) const = 0;
  /// Clips the action to the admissible set, then integrates one step.
  virtual EnvStep step(const State& state, const Action& action) const = 0;
  virtual Action clip_action(const Action& action) const = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const State& state) const = 0;
};

struct Trajectory {
  std::vector<State> states;    // L + 1 entries
  std::vector<Action> actions;  // L entries, as applied (after clipping)
  std::vector<double> rewards;  // L entries
  bool terminated = false;      // true when the last state is terminal

  int length() const { return static_cast<int>(actions.size()); }
  double total_reward() const;
};

/// Draws x_0 from the environment's initial distribution using `seed` and
/// runs the policy until the first terminal state or the horizon.
Trajectory rollout(const Environment& env, const Policy& policy, std::uint64_t seed);
Trajectory rollout_from(const Environment& env, const Policy& policy, const State& initial);

struct ReturnStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over episodes
};

/// Mean and spread of undiscounted returns over `n_episodes` rollouts seeded
/// from derive_seed(seed, kEvaluation, e).
ReturnStats evaluate_policy(const Environment& env, const Policy& policy, int n_episodes,
                            std::uint64_t seed);

}  // namespace crsail
