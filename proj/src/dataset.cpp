#include "crsail/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

namespace crsail {

Standardizer Standardizer::identity(int dim) {
  Standardizer s;
  s.mean_ = Vector::Zero(dim);
  s.scale_ = Vector::Ones(dim);
  return s;
}

Standardizer Standardizer::from(Vector mean, Vector scale) {
  if (mean.size() != scale.size()) throw ConfigError("Standardizer: mean/scale size mismatch");
  if (!((scale.array() > 0.0).all())) throw ConfigError("Standardizer: scale must be > 0");
  Standardizer s;
  s.mean_ = std::move(mean);
  s.scale_ = std::move(scale);
  return s;
}

Standardizer Standardizer::fit(const std::vector<State>& states) {
  if (states.empty()) throw ConfigError("Standardizer::fit: no states");
  const auto dim = states.front().size();
  const double n = static_cast<double>(states.size());
  Vector mean = Vector::Zero(dim);
  for (const auto& x : states) mean += x;
  mean /= n;
  Vector var = Vector::Zero(dim);
  for (const auto& x : states) var += (x - mean).cwiseAbs2();
  var /= n;

  Standardizer s;
  s.mean_ = mean;
  s.scale_ = var.cwiseSqrt();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(s.scale_[i] > 1e-8)) s.scale_[i] = 1.0;
  }
  return s;
}

State Standardizer::apply(const State& x) const {
  if (x.size() != mean_.size()) {
    throw ConfigError("Standardizer: state has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(mean_.size()));
  }
  return (x - mean_).cwiseQuotient(scale_);
}

ExpertDataset::ExpertDataset(int state_dim, int action_dim)
    : state_dim_(state_dim), action_dim_(action_dim) {
  if (state_dim < 1 || action_dim < 1) throw ConfigError("ExpertDataset: dimensions must be >= 1");
}

void ExpertDataset::add(State state, Action action) {
  if (state.size() != state_dim_ || action.size() != action_dim_) {
    throw ConfigError("ExpertDataset::add: dimension mismatch");
  }
  states_.push_back(std::move(state));
  actions_.push_back(std::move(action));
}

void ExpertDataset::merge(const ExpertDataset& other) {
  if (other.empty()) return;
  if (other.state_dim_ != state_dim_ || other.action_dim_ != action_dim_) {
    throw ConfigError("ExpertDataset::merge: dimension mismatch");
  }
  states_.insert(states_.end(), other.states_.begin(), other.states_.end());
  actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
}

void ExpertDataset::freeze_standardizer() { standardizer_ = Standardizer::fit(states_); }

void ExpertDataset::write(std::ostream& out) const {
  out << state_dim_ << ' ' << action_dim_ << ' ' << size() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < state_dim_; ++j) out << (j ? " " : "") << states_[i][j];
    for (int j = 0; j < action_dim_; ++j) out << ' ' << actions_[i][j];
    out << '\n';
  }
}

ExpertDataset ExpertDataset::read(std::istream& in) {
  int d = 0, a = 0, n = 0;
  if (!(in >> d >> a >> n) || n < 0) throw ConfigError("ExpertDataset::read: bad header");
  ExpertDataset ds(d, a);
  for (int i = 0; i < n; ++i) {
    State x(d);
    Action u(a);
    for (int j = 0; j < d; ++j) in >> x[j];
    for (int j = 0; j < a; ++j) in >> u[j];
    if (!in) throw ConfigError("ExpertDataset::read: truncated at row " + std::to_string(i));
    ds.add(std::move(x), std::move(u));
  }
  return ds;
}

void ExpertDataset::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
}

ExpertDataset ExpertDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read(in);
}

}  // namespace crsail
