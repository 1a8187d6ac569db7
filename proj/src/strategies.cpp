#include "crsail/strategies.hpp"

#include <cmath>

namespace crsail {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kCrsail: return "crsail";
    case StrategyKind::kDagger: return "dagger";
    case StrategyKind::kRandomRate: return "random_rate";
    case StrategyKind::kFixedThreshold: return "fixed_threshold";
    case StrategyKind::kEnsembleVariance: return "ensemble_variance";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(const std::string& text) {
  if (text == "crsail") return StrategyKind::kCrsail;
  if (text == "dagger") return StrategyKind::kDagger;
  if (text == "random_rate") return StrategyKind::kRandomRate;
  if (text == "fixed_threshold") return StrategyKind::kFixedThreshold;
  if (text == "ensemble_variance") return StrategyKind::kEnsembleVariance;
  throw ConfigError("unknown strategy kind '" + text +
                    "' (expected crsail, dagger, random_rate, fixed_threshold or "
                    "ensemble_variance)");
}

void StrategyConfig::validate() const {
  switch (kind) {
    case StrategyKind::kCrsail:
      if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("crsail: alpha must lie in (0, 1)");
      if (recalibrate_every < 0) throw ConfigError("crsail: recalibrate_every must be >= 0");
      break;
    case StrategyKind::kDagger: break;
    case StrategyKind::kRandomRate:
      if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("random_rate: rate must lie in [0, 1]");
      break;
    case StrategyKind::kFixedThreshold:
      if (!(threshold >= 0.0)) throw ConfigError("fixed_threshold: threshold must be >= 0");
      break;
    case StrategyKind::kEnsembleVariance:
      if (ensemble_size < 2) throw ConfigError("ensemble_variance: ensemble_size must be >= 2");
      if (!(doubt_threshold >= 0.0)) {
        throw ConfigError("ensemble_variance: doubt_threshold must be >= 0");
      }
      break;
  }
}

namespace {

ExpertDataset bootstrap(const ExpertDataset& dataset, Rng& rng) {
  ExpertDataset sample(dataset.state_dim(), dataset.action_dim());
  std::uniform_int_distribution<int> pick(0, dataset.size() - 1);
  for (int i = 0; i < dataset.size(); ++i) {
    const int j = pick(rng);
    sample.add(dataset.states()[j], dataset.actions()[j]);
  }
  sample.set_standardizer(dataset.standardizer());
  return sample;
}

QuerySet above(const std::vector<double>& scores, double cutoff) {
  QuerySet q;
  q.scores = scores;
  for (int t = 0; t < static_cast<int>(scores.size()); ++t) {
    if (scores[t] > cutoff) q.indices.push_back(t);
  }
  return q;
}

}  // namespace

PolicyEnsemble PolicyEnsemble::train(const ExpertDataset& dataset, const TrainConfig& config,
                                     int size, Rng& rng) {
  if (size < 2) throw ConfigError("ensemble: size must be >= 2");
  PolicyEnsemble ens;
  for (int i = 0; i < size; ++i) {
    TrainConfig member = config;
    member.seed = rng();
    ens.members_.push_back(behavioral_cloning(bootstrap(dataset, rng), member));
  }
  return ens;
}

void PolicyEnsemble::update(const ExpertDataset& dataset, const TrainConfig& config, Rng& rng) {
  for (auto& member : members_) {
    Rng shuffle(rng());
    member = crsail::update(member, bootstrap(dataset, rng), config, shuffle);
  }
}

PolicyEnsemble PolicyEnsemble::from_members(std::vector<MlpPolicy> members) {
  PolicyEnsemble ens;
  ens.members_ = std::move(members);
  return ens;
}

double PolicyEnsemble::disagreement(const State& state) const {
  if (members_.size() < 2) throw ConfigError("ensemble: needs at least two members");
  const double n = static_cast<double>(members_.size());
  std::vector<Action> outs;
  outs.reserve(members_.size());
  for (const auto& m : members_) outs.push_back(m.act(state));
  Vector mean = Vector::Zero(outs.front().size());
  for (const auto& a : outs) mean += a;
  mean /= n;
  Vector var = Vector::Zero(mean.size());
  for (const auto& a : outs) var += (a - mean).cwiseAbs2();
  return (var / n).cwiseSqrt().mean();
}

QuerySet select_queries(const StrategyConfig& strategy, const Trajectory& trajectory,
                        const QueryContext& context) {
  const int length = trajectory.length();
  // Only x_0..x_{L-1} are candidates; the final state has no action to correct.
  const std::vector<State> visited(trajectory.states.begin(), trajectory.states.begin() + length);

  switch (strategy.kind) {
    case StrategyKind::kDagger: {
      QuerySet q;
      q.indices.resize(length);
      for (int t = 0; t < length; ++t) q.indices[t] = t;
      return q;
    }
    case StrategyKind::kCrsail:
    case StrategyKind::kFixedThreshold: {
      if (context.novelty == nullptr) throw ConfigError("select_queries: novelty index missing");
      double cutoff = strategy.threshold;
      if (strategy.kind == StrategyKind::kCrsail) {
        if (!strategy.radius) throw ConfigError("crsail: no calibrated radius supplied");
        cutoff = *strategy.radius;
      }
      if (length > 0 && context.novelty->size() < context.novelty->config().k) {
        throw InsufficientData("select_queries: dataset smaller than K");
      }
      return above(context.novelty->score_batch(visited), cutoff);
    }
    case StrategyKind::kRandomRate: {
      if (context.rng == nullptr) throw ConfigError("random_rate: rng missing");
      std::bernoulli_distribution coin(strategy.rate);
      QuerySet q;
      for (int t = 0; t < length; ++t) {
        if (coin(*context.rng)) q.indices.push_back(t);
      }
      return q;
    }
    case StrategyKind::kEnsembleVariance: {
      if (context.ensemble == nullptr || context.ensemble->size() < 2) {
        throw ConfigError("ensemble_variance: no trained ensemble supplied");
      }
      std::vector<double> spread;
      spread.reserve(visited.size());
      for (const auto& x : visited) spread.push_back(context.ensemble->disagreement(x));
      return above(spread, strategy.doubt_threshold);
    }
  }
  throw ConfigError("select_queries: unknown strategy");
}

ExpertDataset label_queries(const Policy& expert, const Trajectory& trajectory,
                            const QuerySet& queries, int action_dim) {
  const int state_dim = trajectory.states.empty()
                            ? 1
                            : static_cast<int>(trajectory.states.front().size());
  ExpertDataset labeled(state_dim, action_dim);
  for (int t : queries.indices) {
    if (t < 0 || t >= trajectory.length()) {
      throw ConfigError("label_queries: index " + std::to_string(t) + " out of range");
    }
    labeled.add(trajectory.states[t], expert.act(trajectory.states[t]));
  }
  return labeled;
}

}  // namespace crsail
