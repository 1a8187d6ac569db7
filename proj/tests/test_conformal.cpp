#include <doctest.h>

#include <numeric>

#include "crsail/conformal.hpp"
#include "crsail/environments.hpp"
#include "crsail/trainer.hpp"
#include "helpers.hpp"

using namespace crsail;
using crsail::testing::vec;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

struct PendulumFixture {
  PendulumEnv env;
  PendulumExpert expert;
  ExpertDataset dataset = build_initial_dataset(env, expert, 500, 3);
  MlpPolicy policy = [this] {
    TrainConfig cfg;
    cfg.seed = 5;
    return behavioral_cloning(dataset, cfg);
  }();
};

}  // namespace

TEST_SUITE("conformal") {
  TEST_CASE("order statistic index") {
    CHECK(conformal_order_index(99, 0.05) == 95);
    CHECK(conformal_order_index(9, 0.1) == 9);
    CHECK(conformal_order_index(9, 0.05) == 10);
    CHECK(conformal_order_index(999, 0.93) == 70);
    CHECK(conformal_order_index(10, 0.99) == 1);
    CHECK_THROWS_AS(conformal_order_index(10, 0.0), ConfigError);
    CHECK_THROWS_AS(conformal_order_index(10, 1.0), ConfigError);
  }

  TEST_CASE("quantile of 1..99 at alpha 0.05") {
    const CalibratedThreshold t = conformal_quantile(one_to(99), 0.05);
    CHECK(t.order_index == 95);
    CHECK(t.radius == 95.0);
    CHECK(t.calibration_size == 99);
    CHECK(t.alpha == 0.05);
  }

  TEST_CASE("m = N picks the maximum") {
    std::vector<double> s = {0.3, 2.5, 0.1, 0.9, 1.7, 0.2, 0.4, 2.2, 0.8};
    CHECK(conformal_quantile(s, 0.1).radius == 2.5);
  }

  TEST_CASE("constant scores") {
    CHECK(conformal_quantile(std::vector<double>(40, 1.25), 0.3).radius == 1.25);
  }

  TEST_CASE("infeasible alpha is a hard error with remediation text") {
    try {
      conformal_quantile(one_to(9), 0.05);
      FAIL("expected InfeasibleCalibration");
    } catch (const InfeasibleCalibration& e) {
      CHECK(std::string(e.what()).find("collect more calibration episodes") != std::string::npos);
    }
    CHECK_THROWS_AS(conformal_quantile({}, 0.5), InfeasibleCalibration);
  }

  TEST_CASE("R is a member of the scores and non-increasing in alpha") {
    Rng rng(1);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> s(static_cast<std::size_t>(50 + trial * 7));
      for (auto& x : s) x = std::exponential_distribution<double>(1.0)(rng);
      double previous = std::numeric_limits<double>::infinity();
      for (int i = 1; i < 50; ++i) {
        const double alpha = 0.02 * i;
        if (conformal_order_index(static_cast<int>(s.size()), alpha) > static_cast<int>(s.size())) continue;
        const double r = conformal_quantile(s, alpha).radius;
        CHECK(std::find(s.begin(), s.end(), r) != s.end());
        CHECK(r <= previous);
        previous = r;
      }
    }
  }

  TEST_CASE("exchangeable coverage") {
    Rng rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 99;
    const double alpha = 0.1;
    int covered = 0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      std::vector<double> s(n);
      for (auto& x : s) x = normal(rng);
      covered += normal(rng) <= conformal_quantile(s, alpha).radius;
    }
    const double rate = static_cast<double>(covered) / trials;
    CHECK(rate >= 1 - alpha - 0.02);
    CHECK(rate <= 1 - alpha + 1.0 / (n + 1) + 0.02);
  }

  TEST_CASE("calibration on a fixed-horizon environment") {
    PusherEnv env;
    PusherExpert expert;
    const CalibrationSet a = collect_calibration(env, expert, 1, 3);
    CHECK(a.size() == 100);
    const CalibrationSet b = collect_calibration(env, expert, 1, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.states[static_cast<std::size_t>(i)] == b.states[static_cast<std::size_t>(i)]);
    CHECK_THROWS_AS(collect_calibration(env, expert, 0, 3), ConfigError);
  }

  TEST_CASE("calibration size is the sum of episode lengths") {
    PendulumFixture f;
    // A poor controller makes the lengths vary.
    testing::LinearPolicy weak(3.0, 1);
    const CalibrationSet cal = collect_calibration(f.env, weak, 12, 9);
    int recount = 0;
    for (int e = 0; e < 12; ++e) {
      const Trajectory t = rollout(f.env, weak, derive_seed(9, Stream::kCalibration, e));
      CHECK(cal.episode_lengths[static_cast<std::size_t>(e)] == t.length());
      recount += t.length();
    }
    CHECK(cal.size() == recount);
    CHECK(cal.size() < 12 * 200);
  }

  TEST_CASE("calibrate_radius end to end") {
    PendulumFixture f;
    const NoveltyConfig cfg;
    const CalibratedThreshold t =
        calibrate_radius(f.env, f.policy, f.dataset, cfg, 0.93, 30, 11);
    const CalibratedThreshold again =
        calibrate_radius(f.env, f.policy, f.dataset, cfg, 0.93, 30, 11);
    CHECK(t.radius == again.radius);
    CHECK(t.order_index == conformal_order_index(t.calibration_size, 0.93));

    SUBCASE("m = N returns the largest calibration score") {
      const CalibrationSet cal = collect_calibration(f.env, f.policy, 2, 11);
      const double alpha = 1.0 / (cal.size() + 1.0);
      const auto scores = score_batch(cal.states, f.dataset, cfg);
      const CalibratedThreshold top = calibrate_radius(f.env, f.policy, f.dataset, cfg, alpha, 2, 11);
      CHECK(top.order_index == cal.size());
      CHECK(top.radius == *std::max_element(scores.begin(), scores.end()));
    }

    SUBCASE("on-policy coverage of the frozen learner") {
      const NoveltyIndex index(f.dataset, cfg);
      double fraction = 0.0;
      for (int e = 0; e < 50; ++e) {
        const Trajectory traj = rollout(f.env, f.policy, derive_seed(12345, Stream::kEvaluation, e));
        int below = 0;
        for (int s = 0; s < traj.length(); ++s) below += index.score(traj.states[static_cast<std::size_t>(s)]) <= t.radius;
        fraction += static_cast<double>(below) / traj.length();
      }
      fraction /= 50;
      CHECK(fraction >= 1 - 0.93 - 0.1);
      CHECK(fraction <= 1.0);
    }

    SUBCASE("K larger than the dataset") {
      ExpertDataset tiny(2, 1);
      tiny.add(vec({0, 0}), vec({0}));
      CHECK_THROWS_AS(calibrate_radius(f.env, f.policy, tiny, cfg, 0.5, 2, 1), InsufficientData);
    }
  }
}
