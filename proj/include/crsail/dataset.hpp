#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crsail/core.hpp"

namespace crsail {

/// Per-dimension affine map x -> (x - mean) / scale. Frozen once fitted.
class Standardizer {
 public:
  Standardizer() = default;
  static Standardizer identity(int dim);
  static Standardizer from(Vector mean, Vector scale);
  /// Dimensions with (near) zero spread keep scale 1.
  static Standardizer fit(const std::vector<State>& states);

  State apply(const State& x) const;
  bool empty() const { return mean_.size() == 0; }
  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }

 private:
  Vector mean_;
  Vector scale_;
};

/// Multiset of (state, expert action) pairs. Duplicates are kept.
class ExpertDataset {
 public:
  ExpertDataset() = default;
  ExpertDataset(int state_dim, int action_dim);

  void add(State state, Action action);
  /// Multiset union with another batch of pairs.
  void merge(const ExpertDataset& other);

  int size() const { return static_cast<int>(states_.size()); }
  bool empty() const { return states_.empty(); }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Action>& actions() const { return actions_; }

  /// Freezes the standardizer from the current contents.
  void freeze_standardizer();
  void set_standardizer(Standardizer s) { standardizer_ = std::move(s); }
  const Standardizer& standardizer() const { return standardizer_; }

  // Text format: header "state_dim action_dim count", then one row per pair
  // with 17 significant digits, which round-trips doubles exactly.
  void write(std::ostream& out) const;
  static ExpertDataset read(std::istream& in);
  void save(const std::string& path) const;
  static ExpertDataset load(const std::string& path);

 private:
  int state_dim_ = 0;
  int action_dim_ = 0;
  std::vector<State> states_;
  std::vector<Action> actions_;
  Standardizer standardizer_;
};

}  // namespace crsail
