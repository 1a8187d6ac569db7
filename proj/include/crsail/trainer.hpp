#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crsail/conformal.hpp"
#include "crsail/strategies.hpp"

namespace crsail {

/// Query budget B and step budget T_train. Empty means unbounded.
struct Budget {
  std::optional<long long> queries;
  std::optional<long long> steps;

  void validate() const;
  /// The loop condition: both counters strictly below their budgets.
  bool allows(long long steps_so_far, long long queries_so_far) const;
};

struct TrainerConfig {
  TrainConfig bc{.epochs = 50};
  TrainConfig update{.epochs = 10};
  bool retrain_from_scratch = false;
  NoveltyConfig novelty;
  int calibration_episodes = 30;
  int eval_episodes = 20;
  Budget budget{.queries = std::nullopt, .steps = 10000};

  void validate() const;
};

struct EpisodeMetrics {
  int episode = 0;
  int length = 0;
  int queries = 0;
  long long steps_cum = 0;
  long long queries_cum = 0;
  long long dataset_size = 0;  // after aggregation
  double eval_mean = 0.0;
  double eval_std = 0.0;
  double mean_score = 0.0;  // mean novelty score over the episode, 0 if unused
  double radius = 0.0;
  double alpha = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
};

struct RunSummary {
  bool converged = false;
  std::optional<long long> queries_to_expert;
  long long total_queries = 0;
  long long total_steps = 0;
  int episodes = 0;
  double best_eval = 0.0;
  double final_eval = 0.0;
  double expert_mean = 0.0;

  bool operator==(const RunSummary&) const = default;
};

struct RunRecord {
  std::string method;  // strategy label, e.g. "crsail(alpha=0.93,K=5)"
  std::string env;
  int initial_size_target = 0;  // M
  std::uint64_t seed = 0;
  nlohmann::json config;  // snapshot of the resolved experiment config
  std::optional<CalibratedThreshold> threshold;
  int initial_dataset_size = 0;
  double bc_loss = 0.0;
  double bc_eval_mean = 0.0;
  double expert_mean = 0.0;
  double expert_std = 0.0;
  bool standardized = true;
  std::vector<std::string> notes;
  std::vector<EpisodeMetrics> episodes;
  RunSummary summary;

  /// Recomputes the summary from the episode series.
  RunSummary recompute_summary() const;

  nlohmann::json to_json() const;
  /// Throws if the stored summary disagrees with the series.
  static RunRecord from_json(const nlohmann::json& j);
  /// Columns: episode, steps_cum, queries_episode, queries_cum, eval_mean, eval_std, converged_flag
  void write_csv(std::ostream& out) const;
};

/// eval >= expert - 0.05 |expert|; for positive returns this is 95% of expert.
bool meets_expert_level(double eval_mean, double expert_mean);

/// Cumulative queries at the first episode meeting the expert-level rule.
std::optional<long long> queries_to_expert(const RunRecord& record, double expert_mean);

/// Concatenates whole expert episodes until the dataset holds at least
/// `min_pairs` pairs. The last episode is kept in full.
ExpertDataset build_initial_dataset(const Environment& env, const Policy& expert, int min_pairs,
                                    std::uint64_t seed);

/// Everything fixed before the loop starts.
struct TrainingSetup {
  ExpertDataset dataset;  // D_exp^(0), with frozen standardizer
  MlpPolicy policy;       // pi_theta0 after behavioral cloning
  std::optional<CalibratedThreshold> threshold;
  double expert_mean = 0.0;
};

struct TrainResult {
  MlpPolicy policy;
  ExpertDataset dataset;
  RunRecord record;
};

/// The query/aggregate/update loop. Budgets are checked only at loop entry,
/// so the episode that crosses a budget runs to completion and is counted.
TrainResult train(const Environment& env, const Policy& expert, StrategyConfig strategy,
                  const TrainerConfig& config, TrainingSetup setup, std::uint64_t seed);

}  // namespace crsail
