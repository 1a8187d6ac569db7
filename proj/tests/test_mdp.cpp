#include <doctest.h>

#include "crsail/environments.hpp"
#include "helpers.hpp"

using namespace crsail;
using crsail::testing::vec;

namespace {

class NanPolicy final : public Policy {
 public:
  explicit NanPolicy(int fail_at) : fail_at_(fail_at) {}
  Action act(const State&) const override {
    Action u(1);
    u[0] = (++calls_ > fail_at_) ? std::nan("") : 0.0;
    return u;
  }

 private:
  int fail_at_;
  mutable int calls_ = 0;
};

}  // namespace

TEST_SUITE("core-mdp") {
  TEST_CASE("zero input on the double integrator follows the closed form") {
    DoubleIntegratorParams p;
    p.horizon = 3;
    DoubleIntegratorEnv env(p);
    testing::ConstantPolicy zero(Action::Zero(2));

    const Trajectory a = rollout_from(env, zero, vec({1, 0, 0, 0}));
    CHECK(a.length() == 3);
    for (const auto& x : a.states) CHECK(x == vec({1, 0, 0, 0}));

    const Trajectory b = rollout_from(env, zero, vec({1, -0.5, 0.2, 0.4}));
    REQUIRE(b.length() == 3);
    for (int t = 0; t < 3; ++t) {
      CHECK(b.states[t + 1].head<2>() == b.states[t].head<2>() + p.dt * b.states[t].tail<2>());
      CHECK(b.states[t + 1].tail<2>() == b.states[t].tail<2>());
    }
  }

  TEST_CASE("pendulum starting past the failure angle stops after one step") {
    PendulumEnv env;
    testing::ConstantPolicy zero(Action::Zero(1));
    const Trajectory t = rollout_from(env, zero, vec({1.6, 0.0}));
    CHECK(t.length() == 1);
    CHECK(t.terminated);
    CHECK(t.states.size() == 2);
  }

  TEST_CASE("rollouts are bitwise reproducible") {
    PendulumEnv env;
    PendulumExpert expert;
    const Trajectory a = rollout(env, expert, 42);
    const Trajectory b = rollout(env, expert, 42);
    REQUIRE(a.length() == b.length());
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
    const Trajectory c = rollout(env, expert, 43);
    CHECK(c.states.front() != a.states.front());
  }

  TEST_CASE("non-finite actions abort with the step index") {
    PendulumEnv env;
    NanPolicy policy(5);
    try {
      rollout_from(env, policy, vec({0.0, 0.0}));
      FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
      CHECK(e.step() == 5);
    }
  }

  TEST_CASE("dimension mismatch is a configuration error") {
    PendulumEnv env;
    testing::ConstantPolicy wrong(Action::Zero(3));
    CHECK_THROWS_AS(rollout(env, wrong, 1), ConfigError);
    PendulumExpert expert;
    CHECK_THROWS_AS(rollout_from(env, expert, vec({0, 0, 0})), ConfigError);
  }

  TEST_CASE("every trajectory ends at a terminal state or the horizon") {
    PendulumEnv env;
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const double gain = std::uniform_real_distribution<double>(-5.0, 15.0)(rng);
      testing::LinearPolicy policy(gain, 1);
      const Trajectory t = rollout(env, policy, rng());
      CHECK(t.length() >= 1);
      CHECK(t.length() <= env.horizon());
      CHECK(t.states.size() == t.actions.size() + 1);
      const bool ends_terminal = std::abs(t.states.back()[0]) > env.params().fail_angle;
      CHECK((ends_terminal || t.length() == env.horizon()));
      CHECK(ends_terminal == t.terminated);
    }
  }

  TEST_CASE("evaluation of a zero-reward environment") {
    testing::LineEnv env(20, 0.0);
    testing::ConstantPolicy p(vec({0.3}));
    const ReturnStats s = evaluate_policy(env, p, 10, 5);
    CHECK(s.mean == 0.0);
    CHECK(s.std == 0.0);
    CHECK_THROWS_AS(evaluate_policy(env, p, 0, 5), ConfigError);
  }

  TEST_CASE("a surviving policy collects exactly the horizon") {
    PendulumEnv env;
    PendulumExpert expert;
    const ReturnStats s = evaluate_policy(env, expert, 20, 11);
    CHECK(s.mean == 200.0);
    CHECK(s.std == 0.0);
  }

  TEST_CASE("Monte Carlo evaluation is stable across seed sets") {
    PendulumParams weak;
    weak.kp = 11.0;
    weak.kd = 1.0;
    weak.expert_torque_limit = 3.0;  // fails on part of the initial box
    PendulumEnv env;
    PendulumExpert policy(weak);
    const ReturnStats a = evaluate_policy(env, policy, 20, 1);
    const ReturnStats b = evaluate_policy(env, policy, 20, 2);
    CHECK(a.mean > 0.0);
    CHECK(std::abs(a.mean - b.mean) <= 0.1 * std::max(a.mean, b.mean));
  }
}
