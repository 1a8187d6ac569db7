#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "crsail/mdp.hpp"

namespace crsail::testing {

/// 1D random walk x' = x + dt * u with a fixed horizon and zero reward.
class LineEnv final : public Environment {
 public:
  explicit LineEnv(int horizon = 100, double reward = 0.0) : horizon_(horizon), reward_(reward) {}
  std::string name() const override { return "line"; }
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  State sample_initial_state(Rng& rng) const override {
    State x(1);
    x[0] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return x;
  }
  EnvStep step(const State& state, const Action& action) const override {
    EnvStep s;
    s.next_state = state + 0.1 * clip_action(action);
    s.reward = reward_;
    return s;
  }
  Action clip_action(const Action& a) const override { return a.cwiseMax(-1.0).cwiseMin(1.0); }

 private:
  int horizon_;
  double reward_;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(Action a) : a_(std::move(a)) {}
  Action act(const State&) const override { return a_; }

 private:
  Action a_;
};

/// u = -gain * x, elementwise on the first action_dim coordinates.
class LinearPolicy final : public Policy {
 public:
  LinearPolicy(double gain, int action_dim) : gain_(gain), action_dim_(action_dim) {}
  Action act(const State& x) const override { return -gain_ * x.head(action_dim_); }

 private:
  double gain_;
  int action_dim_;
};

inline State vec(std::initializer_list<double> values) {
  State v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vector random_vector(Rng& rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v;
}

/// Reference K-th nearest neighbor distance: all distances, sorted.
inline double kth_distance_oracle(const std::vector<Vector>& points, const Vector& x, int k) {
  std::vector<double> d;
  d.reserve(points.size());
  for (const auto& p : points) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (x[i] - p[i]) * (x[i] - p[i]);
    d.push_back(std::sqrt(s));
  }
  std::sort(d.begin(), d.end());
  return d.at(static_cast<std::size_t>(k - 1));
}

}  // namespace crsail::testing
