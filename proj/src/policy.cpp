#include "crsail/policy.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>

namespace crsail {

MlpParams MlpParams::zeros(int input_dim, int hidden, int output_dim) {
  return {Matrix::Zero(hidden, input_dim), Vector::Zero(hidden), Matrix::Zero(output_dim, hidden),
          Vector::Zero(output_dim)};
}

MlpParams MlpParams::random(int input_dim, int hidden, int output_dim, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MlpParams p = zeros(input_dim, hidden, output_dim);
  Vector flat(p.parameter_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = scale * normal(rng);
  p.assign(flat);
  return p;
}

Eigen::Index MlpParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

Vector MlpParams::forward(const Vector& x) const {
  if (x.size() != w1.cols()) {
    throw ConfigError("policy_act: state has dimension " + std::to_string(x.size()) +
                      ", network expects " + std::to_string(w1.cols()));
  }
  return w2 * (w1 * x + b1).array().tanh().matrix() + b2;
}

Matrix MlpParams::forward(const Matrix& inputs) const {
  if (inputs.rows() != w1.cols()) throw ConfigError("MlpParams::forward: input dimension mismatch");
  const Matrix h = ((w1 * inputs).colwise() + b1).array().tanh().matrix();
  return (w2 * h).colwise() + b2;
}

Vector MlpParams::flatten() const {
  Vector flat(parameter_count());
  Eigen::Index o = 0;
  flat.segment(o, w1.size()) = w1.reshaped();
  o += w1.size();
  flat.segment(o, b1.size()) = b1;
  o += b1.size();
  flat.segment(o, w2.size()) = w2.reshaped();
  o += w2.size();
  flat.segment(o, b2.size()) = b2;
  return flat;
}

void MlpParams::assign(const Vector& flat) {
  if (flat.size() != parameter_count()) throw ConfigError("MlpParams::assign: size mismatch");
  Eigen::Index o = 0;
  w1.reshaped() = flat.segment(o, w1.size());
  o += w1.size();
  b1 = flat.segment(o, b1.size());
  o += b1.size();
  w2.reshaped() = flat.segment(o, w2.size());
  o += w2.size();
  b2 = flat.segment(o, b2.size());
}

bool MlpParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

bool MlpParams::operator==(const MlpParams& other) const {
  return w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
         w2.rows() == other.w2.rows() && flatten() == other.flatten();
}

LossAndGrad loss_and_grad(const MlpParams& params, const Matrix& inputs, const Matrix& targets) {
  const auto batch = inputs.cols();
  if (batch == 0) throw ConfigError("loss_and_grad: empty batch");
  if (targets.cols() != batch || targets.rows() != params.output_dim() ||
      inputs.rows() != params.input_dim()) {
    throw ConfigError("loss_and_grad: dimension mismatch");
  }
  const Matrix hidden = ((params.w1 * inputs).colwise() + params.b1).array().tanh().matrix();
  const Matrix residual = ((params.w2 * hidden).colwise() + params.b2) - targets;

  LossAndGrad out;
  const double inv = 1.0 / static_cast<double>(batch);
  out.loss = residual.squaredNorm() * inv;

  const Matrix d_out = 2.0 * inv * residual;
  const Matrix d_pre = (params.w2.transpose() * d_out).cwiseProduct(
      (1.0 - hidden.array().square()).matrix());
  out.grad.w2 = d_out * hidden.transpose();
  out.grad.b2 = d_out.rowwise().sum();
  out.grad.w1 = d_pre * inputs.transpose();
  out.grad.b1 = d_pre.rowwise().sum();
  return out;
}

double mean_squared_loss(const MlpParams& params, const Matrix& inputs, const Matrix& targets) {
  if (inputs.cols() == 0) throw ConfigError("mean_squared_loss: empty batch");
  return (params.forward(inputs) - targets).squaredNorm() / static_cast<double>(inputs.cols());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (hidden < 1) throw ConfigError("train: hidden must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("train: init_scale must be >= 0");
}

MlpPolicy::MlpPolicy(MlpParams params, Standardizer standardizer)
    : params_(std::move(params)), standardizer_(std::move(standardizer)) {
  if (standardizer_.dim() != params_.input_dim()) {
    throw ConfigError("MlpPolicy: standardizer and network input dimensions differ");
  }
}

Action MlpPolicy::act(const State& state) const {
  return params_.forward(standardizer_.apply(state));
}

void MlpPolicy::write(std::ostream& out) const {
  out << "mlp " << params_.input_dim() << ' ' << params_.hidden() << ' ' << params_.output_dim()
      << '\n'
      << std::setprecision(17);
  auto row = [&out](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
  };
  row(standardizer_.mean());
  row(standardizer_.scale());
  row(params_.flatten());
}

MlpPolicy MlpPolicy::read(std::istream& in) {
  std::string tag;
  int input = 0, hidden = 0, output = 0;
  if (!(in >> tag >> input >> hidden >> output) || tag != "mlp" || input < 1 || hidden < 1 ||
      output < 1) {
    throw ConfigError("MlpPolicy::read: bad header");
  }
  auto read_vector = [&in](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) in >> v[i];
    if (!in) throw ConfigError("MlpPolicy::read: truncated");
    return v;
  };
  const Vector mean = read_vector(input);
  const Vector scale = read_vector(input);
  MlpParams params = MlpParams::zeros(input, hidden, output);
  params.assign(read_vector(params.parameter_count()));

  MlpPolicy policy;
  policy.params_ = std::move(params);
  policy.standardizer_ = Standardizer::from(mean, scale);
  return policy;
}

void MlpPolicy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
}

MlpPolicy MlpPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read(in);
}

TrainingMatrices training_matrices(const ExpertDataset& dataset, const Standardizer& standardizer) {
  TrainingMatrices m;
  m.inputs.resize(dataset.state_dim(), dataset.size());
  m.targets.resize(dataset.action_dim(), dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    m.inputs.col(i) = standardizer.apply(dataset.states()[i]);
    m.targets.col(i) = dataset.actions()[i];
  }
  return m;
}

std::vector<double> sgd_epochs(MlpParams& params, const TrainingMatrices& data,
                               const TrainConfig& config, int epochs, Rng& shuffle) {
  const auto n = static_cast<int>(data.inputs.cols());
  if (n == 0) throw ConfigError("train: empty dataset");
  std::vector<int> order(n);

  std::vector<double> losses;
  losses.reserve(epochs);
  Matrix inputs(data.inputs.rows(), config.batch_size);
  Matrix targets(data.targets.rows(), config.batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Each epoch's order depends only on the stream, not on earlier epochs.
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle);
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      inputs.resize(Eigen::NoChange, count);
      targets.resize(Eigen::NoChange, count);
      for (int j = 0; j < count; ++j) {
        inputs.col(j) = data.inputs.col(order[start + j]);
        targets.col(j) = data.targets.col(order[start + j]);
      }
      const LossAndGrad lg = loss_and_grad(params, inputs, targets);
      params.w1 -= config.learning_rate * lg.grad.w1;
      params.b1 -= config.learning_rate * lg.grad.b1;
      params.w2 -= config.learning_rate * lg.grad.w2;
      params.b2 -= config.learning_rate * lg.grad.b2;
    }
    losses.push_back(mean_squared_loss(params, data.inputs, data.targets));
  }
  return losses;
}

MlpPolicy behavioral_cloning(const ExpertDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("behavioral_cloning: empty dataset");
  const Standardizer standardizer = dataset.standardizer().empty()
                                        ? Standardizer::fit(dataset.states())
                                        : dataset.standardizer();
  Rng rng(config.seed);
  MlpParams params = MlpParams::random(dataset.state_dim(), config.hidden, dataset.action_dim(),
                                       config.init_scale, rng);
  sgd_epochs(params, training_matrices(dataset, standardizer), config, config.epochs, rng);
  return MlpPolicy(std::move(params), standardizer);
}

MlpPolicy update(const MlpPolicy& policy, const ExpertDataset& dataset, const TrainConfig& config,
                 Rng& shuffle) {
  config.validate();
  if (dataset.empty()) throw ConfigError("update: empty dataset");
  MlpParams params = policy.params();
  sgd_epochs(params, training_matrices(dataset, policy.standardizer()), config, config.epochs,
             shuffle);
  return MlpPolicy(std::move(params), policy.standardizer());
}

MlpPolicy update(const MlpPolicy& policy, const ExpertDataset& dataset, const TrainConfig& config) {
  Rng shuffle(config.seed);
  return update(policy, dataset, config, shuffle);
}

}  // namespace crsail
