#pragma once

#include <iosfwd>
#include <string>

#include "crsail/dataset.hpp"
#include "crsail/mdp.hpp"

namespace crsail {

/// One-hidden-layer tanh network: y = W2 tanh(W1 x + b1) + b2.
struct MlpParams {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Matrix w2;  // output x hidden
  Vector b2;  // output

  static MlpParams zeros(int input_dim, int hidden, int output_dim);
  /// Every entry drawn as scale * N(0, 1).
  static MlpParams random(int input_dim, int hidden, int output_dim, double scale, Rng& rng);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
  Eigen::Index parameter_count() const;

  Vector forward(const Vector& x) const;
  /// Batched forward pass, one sample per column.
  Matrix forward(const Matrix& inputs) const;

  /// Flat view in the order w1 (column-major), b1, w2, b2.
  Vector flatten() const;
  void assign(const Vector& flat);

  bool all_finite() const;
  bool operator==(const MlpParams& other) const;
};

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};

/// Mean squared action error over the batch (one sample per column) and its
/// exact gradient by backpropagation.
LossAndGrad loss_and_grad(const MlpParams& params, const Matrix& inputs, const Matrix& targets);
double mean_squared_loss(const MlpParams& params, const Matrix& inputs, const Matrix& targets);

struct TrainConfig {
  double learning_rate = 1e-2;
  int batch_size = 64;
  int epochs = 50;
  double init_scale = 0.1;
  int hidden = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic learner: standardize the state, then run the network.
class MlpPolicy final : public Policy {
 public:
  MlpPolicy() = default;
  MlpPolicy(MlpParams params, Standardizer standardizer);

  Action act(const State& state) const override;

  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }
  const Standardizer& standardizer() const { return standardizer_; }

  void write(std::ostream& out) const;
  static MlpPolicy read(std::istream& in);
  void save(const std::string& path) const;
  static MlpPolicy load(const std::string& path);

 private:
  MlpParams params_;
  Standardizer standardizer_;
};

/// Standardized inputs and targets, one sample per column.
struct TrainingMatrices {
  Matrix inputs;
  Matrix targets;
};
TrainingMatrices training_matrices(const ExpertDataset& dataset, const Standardizer& standardizer);

/// Fresh seeded initialization, then `config.epochs` of minibatch SGD.
/// Uses the dataset's frozen standardizer, or fits one if it has none.
MlpPolicy behavioral_cloning(const ExpertDataset& dataset, const TrainConfig& config);

/// Warm-started minibatch SGD over the whole dataset. Minibatch order comes
/// from `shuffle`, so two calls sharing a stream replay one longer call.
MlpPolicy update(const MlpPolicy& policy, const ExpertDataset& dataset, const TrainConfig& config,
                 Rng& shuffle);
MlpPolicy update(const MlpPolicy& policy, const ExpertDataset& dataset, const TrainConfig& config);

/// Runs `epochs` of SGD in place and returns the full-dataset loss after each epoch.
std::vector<double> sgd_epochs(MlpParams& params, const TrainingMatrices& data,
                               const TrainConfig& config, int epochs, Rng& shuffle);

}  // namespace crsail
