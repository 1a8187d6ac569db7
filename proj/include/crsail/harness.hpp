#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "crsail/environments.hpp"
#include "crsail/trainer.hpp"

namespace crsail {

/// Fully resolved experiment description. Every field has a default except
/// the environment and strategy kinds, which must be set explicitly.
struct ExperimentConfig {
  EnvSpec env;
  StrategyConfig strategy;
  TrainerConfig trainer;
  std::vector<int> initial_sizes{500};             // M grid
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int workers = 1;
  std::string output_dir = "runs";
  bool env_set = false;
  bool strategy_set = false;

  void validate() const;

  /// Sets "section.key" to a textual value. Throws ConfigError on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Resolved config as "section.key" -> value, in a stable order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// Reads the sectioned key=value format; later set() calls override it.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::string& path);
  void write(std::ostream& out) const;
  nlohmann::json to_json() const;

  std::string method_label() const;
};

/// Output directory after applying the CRSAIL_OUTPUT_ROOT environment variable
/// to relative paths.
std::filesystem::path resolve_output_dir(const std::string& dir);

/// One (M, seed) run: initial dataset, behavioral cloning, calibration when
/// the strategy needs it, then training.
RunRecord run_single(const ExperimentConfig& config, int initial_size, std::uint64_t seed);

struct RunFailure {
  int initial_size = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct RunBatch {
  std::vector<RunRecord> records;
  std::vector<RunFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// Runs every (M, seed) pair, using up to config.workers threads. When
/// `out_dir` is non-empty each record is written there as JSON and CSV.
RunBatch run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

void write_record(const RunRecord& record, const std::filesystem::path& dir);
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

struct SummaryRow {
  std::string method;
  int initial_size = 0;
  int runs = 0;
  int converged = 0;
  double convergence_pct = 0.0;
  double q2e_mean = 0.0;  // over converged runs; NaN when none converged
  double q2e_std = 0.0;   // sample standard deviation
  double total_mean = 0.0;
  double total_std = 0.0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;  // sorted by method, then M

  void write_csv(std::ostream& out) const;
  /// One block per method: convergence, queries-to-expert and total queries
  /// rows against M columns.
  void write_text(std::ostream& out) const;
};

SummaryTable summarize(const std::vector<RunRecord>& records);

/// Writes reward_vs_queries.csv, queries_vs_steps.csv and queries_vs_length.csv.
/// Curves are aligned by episode index and report mean/std across seeds.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<RunRecord>& records,
                                                  const std::filesystem::path& dir);

/// Sample mean and standard deviation (n - 1 denominator; 0 for n < 2).
std::pair<double, double> sample_mean_std(const std::vector<double>& values);

}  // namespace crsail
