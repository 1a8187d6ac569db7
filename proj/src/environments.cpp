#include "crsail/environments.hpp"

#include <algorithm>
#include <cmath>

namespace crsail {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kPendulum: return "pendulum";
    case EnvKind::kPusher: return "pusher";
    case EnvKind::kDoubleIntegrator: return "double_integrator";
  }
  return "unknown";
}

EnvKind parse_env_kind(const std::string& text) {
  if (text == "pendulum") return EnvKind::kPendulum;
  if (text == "pusher") return EnvKind::kPusher;
  if (text == "double_integrator") return EnvKind::kDoubleIntegrator;
  throw ConfigError("unknown environment kind '" + text +
                    "' (expected pendulum, pusher or double_integrator)");
}

namespace {

double uniform(Rng& rng, double half_width) {
  return std::uniform_real_distribution<double>(-half_width, half_width)(rng);
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

// Rescales v so that its Euclidean norm does not exceed `cap`.
Vector clip_norm(const Vector& v, double cap) {
  const double n = v.norm();
  if (n <= cap) return v;
  return v * (cap / n);
}

}  // namespace

// --- pendulum ---------------------------------------------------------------

void PendulumParams::validate() const {
  require(dt > 0.0, "pendulum: dt must be > 0");
  require(max_torque > 0.0, "pendulum: max_torque must be > 0");
  require(fail_angle > 0.0 && fail_angle <= std::numbers::pi,
          "pendulum: fail_angle must lie in (0, pi]");
  require(horizon >= 1, "pendulum: horizon must be >= 1");
  require(length > 0.0 && mass > 0.0, "pendulum: length and mass must be > 0");
  require(init_angle >= 0.0 && init_velocity >= 0.0, "pendulum: init ranges must be >= 0");
  require(expert_torque_limit > 0.0, "pendulum: expert_torque_limit must be > 0");
}

PendulumEnv::PendulumEnv(PendulumParams params) : params_(params) { params_.validate(); }

State PendulumEnv::sample_initial_state(Rng& rng) const {
  State x(2);
  x[0] = uniform(rng, params_.init_angle);
  x[1] = uniform(rng, params_.init_velocity);
  return x;
}

Action PendulumEnv::clip_action(const Action& action) const {
  return action.cwiseMax(-params_.max_torque).cwiseMin(params_.max_torque);
}

EnvStep PendulumEnv::step(const State& state, const Action& action) const {
  const auto& p = params_;
  const double u = std::clamp(action[0], -p.max_torque, p.max_torque);
  const double theta = state[0];
  const double omega = state[1];
  // semi-implicit Euler: velocity first, then angle with the new velocity
  const double omega_next = omega + p.dt * ((p.gravity / p.length) * std::sin(theta) +
                                            u / (p.mass * p.length * p.length) -
                                            p.damping * omega);
  const double theta_next = theta + p.dt * omega_next;

  EnvStep out;
  out.next_state = State(2);
  out.next_state << theta_next, omega_next;
  out.terminal = std::abs(theta_next) > p.fail_angle;
  out.reward = out.terminal ? 0.0 : 1.0;
  return out;
}

Action PendulumExpert::act(const State& state) const {
  const double limit = std::min(params_.expert_torque_limit, params_.max_torque);
  Action u(1);
  u[0] = std::clamp(-params_.kp * state[0] - params_.kd * state[1], -limit, limit);
  return u;
}

// --- pusher -----------------------------------------------------------------

void PusherParams::validate() const {
  require(dt > 0.0, "pusher: dt must be > 0");
  require(max_speed > 0.0, "pusher: max_speed must be > 0");
  require(contact_radius > 0.0, "pusher: contact_radius must be > 0");
  require(push_gain > 0.0 && push_gain <= 1.0, "pusher: push_gain must lie in (0, 1]");
  require(horizon >= 1, "pusher: horizon must be >= 1");
  require(standoff > contact_radius, "pusher: standoff must exceed contact_radius");
}

PusherEnv::PusherEnv(PusherParams params) : params_(params) { params_.validate(); }

State PusherEnv::sample_initial_state(Rng& rng) const {
  State x(6);
  x[0] = uniform(rng, params_.agent_range);
  x[1] = uniform(rng, params_.agent_range);
  x[2] = uniform(rng, params_.object_range);
  x[3] = uniform(rng, params_.object_range);
  x[4] = uniform(rng, params_.goal_range);
  x[5] = uniform(rng, params_.goal_range);
  return x;
}

Action PusherEnv::clip_action(const Action& action) const {
  return clip_norm(action, params_.max_speed);
}

EnvStep PusherEnv::step(const State& state, const Action& action) const {
  const Eigen::Vector2d agent = state.segment<2>(0);
  Eigen::Vector2d object = state.segment<2>(2);
  const Eigen::Vector2d goal = state.segment<2>(4);

  const Eigen::Vector2d velocity = clip_norm(action, params_.max_speed);
  const Eigen::Vector2d agent_next = agent + params_.dt * velocity;
  if ((agent_next - object).norm() <= params_.contact_radius) {
    object += params_.push_gain * (agent_next - agent);
  }

  EnvStep out;
  out.next_state = State(6);
  out.next_state << agent_next, object, goal;
  out.reward = -(object - goal).norm();
  out.terminal = false;
  return out;
}

namespace {

// Distance from point c to the segment [a, b].
double segment_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (c - a).norm();
  const double s = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
  return (a + s * ab - c).norm();
}

}  // namespace

Action PusherExpert::act(const State& state) const {
  const auto& p = params_;
  const Eigen::Vector2d agent = state.segment<2>(0);
  const Eigen::Vector2d object = state.segment<2>(2);
  const Eigen::Vector2d goal = state.segment<2>(4);

  Action u = Action::Zero(2);
  const Eigen::Vector2d to_goal = goal - object;
  const double dist = to_goal.norm();
  if (dist < 1e-3) return u;

  const Eigen::Vector2d dir = to_goal / dist;
  const Eigen::Vector2d normal(-dir.y(), dir.x());
  const Eigen::Vector2d rel = agent - object;
  const double along = rel.dot(dir);
  const double across = rel.dot(normal);

  const bool aligned = std::abs(across) < p.align_tolerance && along < p.contact_radius &&
                       along > -p.standoff - p.align_tolerance;
  if (aligned) {
    // Push phase. Each step moves the object by push_gain * dt * speed, so
    // slow down near the goal instead of overshooting.
    const double speed = std::min(p.max_speed, dist / (p.push_gain * p.dt));
    u = speed * dir - p.approach_gain * across * normal;
    return clip_norm(u, p.max_speed);
  }

  // Approach phase: go to the standoff point behind the object, detouring
  // around the side if the direct path would touch the object.
  const Eigen::Vector2d behind = object - p.standoff * dir;
  Eigen::Vector2d target = behind;
  if (segment_distance(agent, behind, object) <= p.contact_radius + 0.02) {
    const double side = across >= 0.0 ? 1.0 : -1.0;
    target = object + side * 2.0 * p.standoff * normal;
  }
  u = p.approach_gain * (target - agent);
  return clip_norm(u, p.max_speed);
}

// --- double integrator ------------------------------------------------------

void DoubleIntegratorParams::validate() const {
  require(dt > 0.0, "double_integrator: dt must be > 0");
  require(max_accel > 0.0, "double_integrator: max_accel must be > 0");
  require(horizon >= 1, "double_integrator: horizon must be >= 1");
  require(state_weight > 0.0 && control_weight > 0.0,
          "double_integrator: LQR weights must be > 0");
}

DoubleIntegratorEnv::DoubleIntegratorEnv(DoubleIntegratorParams params) : params_(params) {
  params_.validate();
}

State DoubleIntegratorEnv::sample_initial_state(Rng& rng) const {
  State x(4);
  x[0] = uniform(rng, params_.init_position);
  x[1] = uniform(rng, params_.init_position);
  x[2] = uniform(rng, params_.init_velocity);
  x[3] = uniform(rng, params_.init_velocity);
  return x;
}

Action DoubleIntegratorEnv::clip_action(const Action& action) const {
  return action.cwiseMax(-params_.max_accel).cwiseMin(params_.max_accel);
}

EnvStep DoubleIntegratorEnv::step(const State& state, const Action& action) const {
  const Action u = clip_action(action);
  EnvStep out;
  out.next_state = State(4);
  out.next_state.head<2>() = state.head<2>() + params_.dt * state.tail<2>();
  out.next_state.tail<2>() = state.tail<2>() + params_.dt * u;
  out.reward = -out.next_state.head<2>().norm();
  out.terminal = false;
  return out;
}

Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                int max_iterations, double tolerance) {
  Matrix p = q;
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix btp = b.transpose() * p;
    const Matrix k = (r + btp * b).ldlt().solve(btp * a);
    const Matrix next = q + a.transpose() * p * (a - b * k);
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = 0.5 * (next + next.transpose());
    if (change < tolerance) break;
  }
  const Matrix btp = b.transpose() * p;
  return (r + btp * b).ldlt().solve(btp * a);
}

DoubleIntegratorExpert::DoubleIntegratorExpert(DoubleIntegratorParams params) : params_(params) {
  params_.validate();
  Matrix a = Matrix::Identity(4, 4);
  a.block<2, 2>(0, 2) = params_.dt * Matrix::Identity(2, 2);
  Matrix b = Matrix::Zero(4, 2);
  b.block<2, 2>(2, 0) = params_.dt * Matrix::Identity(2, 2);
  gain_ = lqr_gain(a, b, params_.state_weight * Matrix::Identity(4, 4),
                   params_.control_weight * Matrix::Identity(2, 2));
}

Action DoubleIntegratorExpert::act(const State& state) const {
  const Action u = -gain_ * state;
  return u.cwiseMax(-params_.max_accel).cwiseMin(params_.max_accel);
}

// --- factories --------------------------------------------------------------

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::kPendulum: return std::make_unique<PendulumEnv>(spec.pendulum);
    case EnvKind::kPusher: return std::make_unique<PusherEnv>(spec.pusher);
    case EnvKind::kDoubleIntegrator:
      return std::make_unique<DoubleIntegratorEnv>(spec.double_integrator);
  }
  throw ConfigError("make_environment: unknown kind");
}

std::unique_ptr<Policy> make_expert(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::kPendulum: return std::make_unique<PendulumExpert>(spec.pendulum);
    case EnvKind::kPusher: return std::make_unique<PusherExpert>(spec.pusher);
    case EnvKind::kDoubleIntegrator:
      return std::make_unique<DoubleIntegratorExpert>(spec.double_integrator);
  }
  throw ConfigError("make_expert: unknown kind");
}

Action expert_action(EnvKind kind, const State& state) {
  EnvSpec spec;
  spec.kind = kind;
  return make_expert(spec)->act(state);
}

}  // namespace crsail
