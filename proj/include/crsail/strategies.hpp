#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crsail/novelty.hpp"
#include "crsail/policy.hpp"

namespace crsail {

enum class StrategyKind { kCrsail, kDagger, kRandomRate, kFixedThreshold, kEnsembleVariance };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(const std::string& text);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kCrsail;
  // crsail
  double alpha = 0.93;
  std::optional<double> radius;  // set by calibration unless overridden
  int recalibrate_every = 0;     // episodes between recalibrations; 0 = never
  // random-rate
  double rate = 0.5;
  // fixed-threshold
  double threshold = 0.0;
  // ensemble-variance
  int ensemble_size = 5;
  double doubt_threshold = 0.1;

  bool uses_novelty() const {
    return kind == StrategyKind::kCrsail || kind == StrategyKind::kFixedThreshold;
  }
  void validate() const;
};

/// Post hoc query indices S_i into one trajectory, ascending and unique.
struct QuerySet {
  std::vector<int> indices;
  std::vector<double> scores;  // per-step novelty or disagreement, when the strategy has one

  int size() const { return static_cast<int>(indices.size()); }
  bool empty() const { return indices.empty(); }
};

/// Bootstrap ensemble used by the ensemble-variance gate.
class PolicyEnsemble {
 public:
  PolicyEnsemble() = default;
  /// Trains `size` members by behavioral cloning on bootstrap resamples.
  static PolicyEnsemble train(const ExpertDataset& dataset, const TrainConfig& config, int size,
                              Rng& rng);
  /// Warm-starts every member on a fresh bootstrap resample of `dataset`.
  void update(const ExpertDataset& dataset, const TrainConfig& config, Rng& rng);

  /// Mean over action dimensions of the across-member standard deviation.
  double disagreement(const State& state) const;
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<MlpPolicy>& members() const { return members_; }

  static PolicyEnsemble from_members(std::vector<MlpPolicy> members);

 private:
  std::vector<MlpPolicy> members_;
};

/// Inputs a strategy may read besides the trajectory. Everything here is
/// derived from history up to the start of the episode.
struct QueryContext {
  const NoveltyIndex* novelty = nullptr;  // snapshot of D_exp^(i)
  const PolicyEnsemble* ensemble = nullptr;
  Rng* rng = nullptr;  // random-rate stream
};

QuerySet select_queries(const StrategyConfig& strategy, const Trajectory& trajectory,
                        const QueryContext& context);

/// One expert label per queried index, computed from the stored states.
ExpertDataset label_queries(const Policy& expert, const Trajectory& trajectory,
                            const QuerySet& queries, int action_dim);

}  // namespace crsail
