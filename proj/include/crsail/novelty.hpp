#pragma once

#include <memory>
#include <string>
#include <vector>

#include "crsail/dataset.hpp"

namespace crsail {

enum class NoveltyBackend { kBruteForce, kKdTree };

std::string to_string(NoveltyBackend backend);
NoveltyBackend parse_novelty_backend(const std::string& text);

struct NoveltyConfig {
  int k = 5;
  /// Euclidean distance on coordinates standardized by the dataset's frozen
  /// standardizer; false measures raw Euclidean distance.
  bool standardize = true;
  NoveltyBackend backend = NoveltyBackend::kBruteForce;

  void validate() const;
};

/// Immutable snapshot of a dataset's state projection answering K-th nearest
/// neighbor distance queries. Both backends compute every distance with the
/// same arithmetic, so their answers are bitwise equal.
class NoveltyIndex {
 public:
  NoveltyIndex(const ExpertDataset& dataset, const NoveltyConfig& config);
  ~NoveltyIndex();
  NoveltyIndex(NoveltyIndex&&) noexcept;
  NoveltyIndex& operator=(NoveltyIndex&&) noexcept;

  /// Distance from x to its K-th nearest dataset state, counting duplicates.
  double score(const State& x) const;
  std::vector<double> score_batch(const std::vector<State>& states) const;

  int size() const { return size_; }
  /// Dataset size the snapshot was taken at.
  int version() const { return size_; }
  const NoveltyConfig& config() const { return config_; }

 private:
  State project(const State& x) const;
  double brute_force(const double* query) const;

  struct KdTree;

  NoveltyConfig config_;
  Standardizer standardizer_;
  int dim_ = 0;
  int size_ = 0;
  std::vector<double> points_;  // row-major, size_ x dim_
  std::unique_ptr<KdTree> tree_;
};

/// Brute-force K-th nearest neighbor distance against the dataset.
double score_sk(const State& x, const ExpertDataset& dataset, const NoveltyConfig& config);
std::vector<double> score_batch(const std::vector<State>& states, const ExpertDataset& dataset,
                                const NoveltyConfig& config);
NoveltyIndex rebuild_index(const ExpertDataset& dataset, const NoveltyConfig& config);

}  // namespace crsail
