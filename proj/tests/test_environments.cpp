#include <doctest.h>

#include <cmath>

#include "crsail/environments.hpp"
#include "helpers.hpp"

using namespace crsail;
using crsail::testing::vec;

TEST_SUITE("environments") {
  TEST_CASE("pendulum step") {
    PendulumEnv env;
    const auto& p = env.params();

    SUBCASE("upright equilibrium is a fixed point") {
      const EnvStep s = env.step(vec({0, 0}), vec({0}));
      CHECK(s.next_state == vec({0, 0}));
      CHECK(s.reward == 1.0);
      CHECK_FALSE(s.terminal);
    }
    SUBCASE("semi-implicit Euler update") {
      const EnvStep s = env.step(vec({0.1, 0}), vec({0}));
      const double omega = p.dt * (p.gravity / p.length) * std::sin(0.1);
      CHECK(s.next_state[1] == doctest::Approx(omega).epsilon(1e-15));
      CHECK(s.next_state[0] == doctest::Approx(0.1 + p.dt * omega).epsilon(1e-15));
    }
    SUBCASE("crossing the failure angle terminates with zero reward") {
      const EnvStep s = env.step(vec({1.55, 5.0}), vec({p.max_torque}));
      CHECK(s.next_state[0] > std::numbers::pi / 2);
      CHECK(s.terminal);
      CHECK(s.reward == 0.0);
    }
    SUBCASE("torque is clipped before integration") {
      const EnvStep a = env.step(vec({0.2, 0.1}), vec({100.0}));
      const EnvStep b = env.step(vec({0.2, 0.1}), vec({p.max_torque}));
      CHECK(a.next_state == b.next_state);
    }
  }

  TEST_CASE("pusher step") {
    PusherEnv env;
    SUBCASE("no contact leaves the object in place") {
      const EnvStep s = env.step(vec({-1, -1, 0.5, 0.5, 0, 0}), vec({1, 0}));
      CHECK(s.next_state.segment<2>(2) == vec({0.5, 0.5}));
      CHECK(s.next_state[0] == doctest::Approx(-0.9));
    }
    SUBCASE("contact moves the object by the push gain times the agent displacement") {
      const EnvStep s = env.step(vec({0.2, 0.3, 0.2, 0.3, 1, 1}), vec({1, 0}));
      CHECK(s.next_state[2] - 0.2 == doctest::Approx(0.08));
      CHECK(s.next_state[3] == 0.3);
      CHECK_FALSE(s.terminal);
    }
    SUBCASE("object resting at the goal earns zero reward") {
      const EnvStep s = env.step(vec({-1, -1, 0.4, -0.2, 0.4, -0.2}), vec({0, 0}));
      CHECK(s.reward == 0.0);
    }
    SUBCASE("speed is capped by norm") {
      const Action u = env.clip_action(vec({3, 4}));
      CHECK(u.norm() == doctest::Approx(1.0));
      CHECK(u[0] / u[1] == doctest::Approx(0.75));
    }
  }

  TEST_CASE("experts at their equilibria output zero") {
    CHECK(expert_action(EnvKind::kPendulum, vec({0, 0})) == vec({0}));
    CHECK(expert_action(EnvKind::kDoubleIntegrator, vec({0, 0, 0, 0})).norm() == 0.0);
  }

  TEST_CASE("pendulum expert survives every corner of the initial box") {
    PendulumEnv env;
    PendulumExpert expert;
    for (double a : {-0.3, 0.3}) {
      for (double w : {-0.5, 0.5}) {
        CHECK(rollout_from(env, expert, vec({a, w})).length() == 200);
      }
    }
  }

  TEST_CASE("pendulum expert certification: at least 99% success over 1000 episodes") {
    PendulumEnv env;
    PendulumExpert expert;
    int survived = 0;
    for (std::uint64_t e = 0; e < 1000; ++e) survived += rollout(env, expert, e).length() == 200;
    CHECK(survived >= 990);
  }

  TEST_CASE("a degraded pendulum expert fails on part of the box") {
    PendulumParams p;
    p.expert_torque_limit = 3.0;
    PendulumEnv env(p);
    PendulumExpert expert(p);
    int survived = 0;
    for (std::uint64_t e = 0; e < 500; ++e) survived += rollout(env, expert, e).length() == 200;
    CHECK(survived < 490);
    CHECK(survived > 400);
  }

  TEST_CASE("pendulum episodes split into early failures and full-length successes") {
    PendulumEnv env;
    testing::ConstantPolicy zero(Action::Zero(1));
    PendulumExpert expert;
    for (std::uint64_t e = 0; e < 20; ++e) {
      CHECK(rollout(env, zero, e).length() < 100);
      CHECK(rollout(env, expert, e).length() == 200);
    }
  }

  TEST_CASE("pusher expert beats the idle policy at least threefold") {
    PusherEnv env;
    PusherExpert expert;
    testing::ConstantPolicy idle(Action::Zero(2));
    const double e = evaluate_policy(env, expert, 200, 3).mean;
    const double z = evaluate_policy(env, idle, 200, 3).mean;
    CHECK(e < 0.0);
    CHECK(std::abs(z) >= 3.0 * std::abs(e));
  }

  TEST_CASE("double-integrator LQR gain solves the Riccati equation") {
    DoubleIntegratorParams p;
    DoubleIntegratorExpert expert(p);
    Matrix a = Matrix::Identity(4, 4);
    a.block<2, 2>(0, 2) = p.dt * Matrix::Identity(2, 2);
    Matrix b = Matrix::Zero(4, 2);
    b.block<2, 2>(2, 0) = p.dt * Matrix::Identity(2, 2);
    const Matrix& k = expert.gain();
    const Eigen::VectorXcd eig = (a - b * k).eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) CHECK(std::abs(eig[i]) < 1.0);

    // Perturbing the gain can only raise the quadratic cost from a fixed start.
    auto cost = [&](const Matrix& gain) {
      Vector x = vec({1.0, -0.5, 0.2, 0.1});
      double c = 0.0;
      for (int t = 0; t < 2000; ++t) {
        const Vector u = -gain * x;
        c += x.squaredNorm() + u.squaredNorm();
        x = a * x + b * u;
      }
      return c;
    };
    const double best = cost(k);
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix dk = Matrix::Zero(2, 4);
      for (Eigen::Index i = 0; i < dk.size(); ++i) dk.data()[i] = 0.05 * testing::random_vector(rng, 1)[0];
      CHECK(cost(k + dk) >= best - 1e-9);
    }
  }

  TEST_CASE("step functions keep finite inputs finite") {
    Rng rng(9);
    PendulumEnv pendulum;
    PusherEnv pusher;
    DoubleIntegratorEnv di;
    for (int i = 0; i < 500; ++i) {
      CHECK(pendulum.step(testing::random_vector(rng, 2, 3.0), testing::random_vector(rng, 1, 50.0))
                .next_state.allFinite());
      CHECK(pusher.step(testing::random_vector(rng, 6, 3.0), testing::random_vector(rng, 2, 50.0))
                .next_state.allFinite());
      CHECK(di.step(testing::random_vector(rng, 4, 3.0), testing::random_vector(rng, 2, 50.0))
                .next_state.allFinite());
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    PendulumParams p;
    p.dt = 0.0;
    CHECK_THROWS_AS(PendulumEnv{p}, ConfigError);
    PusherParams q;
    q.push_gain = 1.5;
    CHECK_THROWS_AS(PusherEnv{q}, ConfigError);
    CHECK_THROWS_AS(parse_env_kind("hopper"), ConfigError);
    CHECK(parse_env_kind(to_string(EnvKind::kPusher)) == EnvKind::kPusher);
  }
}
