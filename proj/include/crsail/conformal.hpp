#pragma once

#include <cstdint>
#include <vector>

#include "crsail/mdp.hpp"
#include "crsail/novelty.hpp"

namespace crsail {

/// Unlabeled on-policy states visited by the initial learner.
struct CalibrationSet {
  std::vector<State> states;
  std::vector<int> episode_lengths;

  int size() const { return static_cast<int>(states.size()); }
  int episodes() const { return static_cast<int>(episode_lengths.size()); }
};

/// The single global query radius and where it came from.
struct CalibratedThreshold {
  double radius = 0.0;
  double alpha = 0.0;
  int order_index = 0;  // m, 1-based
  int calibration_size = 0;
};

/// m = ceil((n + 1)(1 - alpha)), with a relative guard so that products that
/// are integers in exact arithmetic are not bumped up by rounding.
int conformal_order_index(int n, double alpha);

/// Rolls out `policy` for `episodes` seeded episodes and keeps x_0..x_{L-1}
/// of each. No expert labels are requested.
CalibrationSet collect_calibration(const Environment& env, const Policy& policy, int episodes,
                                   std::uint64_t seed);

/// R = s_(m), the m-th smallest score. Throws InfeasibleCalibration when m > n.
CalibratedThreshold conformal_quantile(std::vector<double> scores, double alpha);

/// Collect, score against the initial dataset, take the quantile. Run once
/// before training.
CalibratedThreshold calibrate_radius(const Environment& env, const Policy& initial_policy,
                                     const ExpertDataset& initial_dataset,
                                     const NoveltyConfig& config, double alpha, int episodes,
                                     std::uint64_t seed);

}  // namespace crsail
