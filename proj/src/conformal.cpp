#include "crsail/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crsail {

int conformal_order_index(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("conformal: alpha must lie in (0, 1)");
  if (n < 1) throw InfeasibleCalibration("conformal: no calibration scores");
  const double target = (static_cast<double>(n) + 1.0) * (1.0 - alpha);
  const double m = std::ceil(target - 1e-9 * std::max(1.0, target));
  return std::max(1, static_cast<int>(m));
}

CalibrationSet collect_calibration(const Environment& env, const Policy& policy, int episodes,
                                   std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("calibration: episode count must be >= 1");
  CalibrationSet cal;
  for (int e = 0; e < episodes; ++e) {
    Trajectory traj =
        rollout(env, policy, derive_seed(seed, Stream::kCalibration, static_cast<std::uint64_t>(e)));
    const int length = traj.length();
    cal.episode_lengths.push_back(length);
    for (int t = 0; t < length; ++t) cal.states.push_back(std::move(traj.states[t]));
  }
  return cal;
}

CalibratedThreshold conformal_quantile(std::vector<double> scores, double alpha) {
  const int n = static_cast<int>(scores.size());
  const int m = conformal_order_index(n, alpha);
  if (m > n) {
    std::ostringstream msg;
    msg << "infeasible calibration: alpha=" << alpha << " with " << n
        << " calibration scores needs order statistic m=" << m
        << " > N_cal; collect more calibration episodes or raise alpha (needs N_cal >= "
        << static_cast<long long>(std::ceil((1.0 - alpha) / alpha)) << ")";
    throw InfeasibleCalibration(msg.str());
  }
  std::nth_element(scores.begin(), scores.begin() + (m - 1), scores.end());
  return {scores[m - 1], alpha, m, n};
}

CalibratedThreshold calibrate_radius(const Environment& env, const Policy& initial_policy,
                                     const ExpertDataset& initial_dataset,
                                     const NoveltyConfig& config, double alpha, int episodes,
                                     std::uint64_t seed) {
  if (initial_dataset.size() < config.k) {
    throw InsufficientData("calibration: initial dataset smaller than K");
  }
  const CalibrationSet cal = collect_calibration(env, initial_policy, episodes, seed);
  const NoveltyIndex index(initial_dataset, config);
  return conformal_quantile(index.score_batch(cal.states), alpha);
}

}  // namespace crsail
