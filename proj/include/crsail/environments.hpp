#pragma once

#include <memory>
#include <numbers>
#include <string>

#include "crsail/mdp.hpp"

namespace crsail {

enum class EnvKind { kPendulum, kPusher, kDoubleIntegrator };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& text);

// ---------------------------------------------------------------------------
// Inverted pendulum with early termination. State (theta, theta_dot), theta = 0 upright.

struct PendulumParams {
  double gravity = 9.81;
  double length = 1.0;
  double mass = 1.0;
  double damping = 0.1;
  double dt = 0.05;
  double max_torque = 5.0;
  double fail_angle = std::numbers::pi / 2.0;
  int horizon = 200;
  double init_angle = 0.3;     // theta_0 ~ U(-init_angle, init_angle)
  double init_velocity = 0.5;  // theta_dot_0 ~ U(-init_velocity, init_velocity)
  // Expert PD gains and torque limit. Setting expert_torque_limit below
  // max_torque degrades the expert (3.0 gives roughly a 90% success rate).
  double kp = 12.0;
  double kd = 3.0;
  double expert_torque_limit = 5.0;

  void validate() const;
};

class PendulumEnv final : public Environment {
 public:
  explicit PendulumEnv(PendulumParams params = {});

  std::string name() const override { return "pendulum"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int horizon() const override { return params_.horizon; }
  State sample_initial_state(Rng& rng) const override;
  EnvStep step(const State& state, const Action& action) const override;
  Action clip_action(const Action& action) const override;

  const PendulumParams& params() const { return params_; }

 private:
  PendulumParams params_;
};

class PendulumExpert final : public Policy {
 public:
  explicit PendulumExpert(PendulumParams params = {}) : params_(params) {}
  Action act(const State& state) const override;

 private:
  PendulumParams params_;
};

// ---------------------------------------------------------------------------
// Planar kinematic pusher. State (agent xy, object xy, goal xy); action is the
// agent velocity. Fixed horizon, no early termination.

struct PusherParams {
  double dt = 0.1;
  double max_speed = 1.0;
  double contact_radius = 0.15;
  double push_gain = 0.8;
  double goal_range = 1.0;    // goal ~ U([-goal_range, goal_range]^2)
  double object_range = 0.5;  // object ~ U([-object_range, object_range]^2)
  double agent_range = 1.0;   // agent ~ U([-agent_range, agent_range]^2)
  int horizon = 100;
  // Expert: approach the standoff point behind the object, then push through it.
  double standoff = 0.2;
  double approach_gain = 5.0;
  double align_tolerance = 0.05;

  void validate() const;
};

class PusherEnv final : public Environment {
 public:
  explicit PusherEnv(PusherParams params = {});

  std::string name() const override { return "pusher"; }
  int state_dim() const override { return 6; }
  int action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  State sample_initial_state(Rng& rng) const override;
  EnvStep step(const State& state, const Action& action) const override;
  Action clip_action(const Action& action) const override;

  const PusherParams& params() const { return params_; }

 private:
  PusherParams params_;
};

class PusherExpert final : public Policy {
 public:
  explicit PusherExpert(PusherParams params = {}) : params_(params) {}
  Action act(const State& state) const override;

 private:
  PusherParams params_;
};

// ---------------------------------------------------------------------------
// Planar double integrator. State (p xy, v xy); action is the acceleration.

struct DoubleIntegratorParams {
  double dt = 0.1;
  double max_accel = 1.0;
  int horizon = 150;
  double init_position = 1.0;
  double init_velocity = 0.3;
  // LQR weights: Q = state_weight * I, R = control_weight * I.
  double state_weight = 1.0;
  double control_weight = 1.0;

  void validate() const;
};

class DoubleIntegratorEnv final : public Environment {
 public:
  explicit DoubleIntegratorEnv(DoubleIntegratorParams params = {});

  std::string name() const override { return "double_integrator"; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  State sample_initial_state(Rng& rng) const override;
  EnvStep step(const State& state, const Action& action) const override;
  Action clip_action(const Action& action) const override;

  const DoubleIntegratorParams& params() const { return params_; }

 private:
  DoubleIntegratorParams params_;
};

/// Infinite-horizon discrete LQR gain by fixed-point Riccati iteration.
Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                int max_iterations = 10000, double tolerance = 1e-12);

class DoubleIntegratorExpert final : public Policy {
 public:
  explicit DoubleIntegratorExpert(DoubleIntegratorParams params = {});
  Action act(const State& state) const override;
  const Matrix& gain() const { return gain_; }

 private:
  DoubleIntegratorParams params_;
  Matrix gain_;
};

// ---------------------------------------------------------------------------

struct EnvSpec {
  EnvKind kind = EnvKind::kPendulum;
  PendulumParams pendulum;
  PusherParams pusher;
  DoubleIntegratorParams double_integrator;
};

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);
std::unique_ptr<Policy> make_expert(const EnvSpec& spec);

/// Expert label for `state` under the default parameters of `kind`.
Action expert_action(EnvKind kind, const State& state);

}  // namespace crsail
