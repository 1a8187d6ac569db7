#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace crsail {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in an environment's state space. Dimension is fixed per environment.
using State = Vector;
/// A control input. Dimension is fixed per environment.
using Action = Vector;

using Rng = std::mt19937_64;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value showed up during simulation.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Fewer reference points than the neighbor order K.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The conformal order statistic index exceeds the number of calibration scores.
class InfeasibleCalibration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A failure inside the training loop, tagged with the iteration it happened in.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(int iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

// Seed derivation. Every random stream in a run is keyed by (base seed, purpose, index)
// so that sweeps are reproducible and streams never overlap by accident.
enum class Stream : std::uint64_t {
  kInitialDataset = 1,
  kBehavioralCloning = 2,
  kCalibration = 3,
  kTraining = 4,
  kEvaluation = 5,
  kStrategy = 6,
  kEnsemble = 7,
  kUpdate = 8,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0);

bool all_finite(const Vector& v);

}  // namespace crsail
