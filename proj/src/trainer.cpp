#include "crsail/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace crsail {

void Budget::validate() const {
  if (!queries && !steps) throw ConfigError("budget: at least one of queries/steps must be finite");
  if (queries && *queries < 0) throw ConfigError("budget: query budget must be >= 0");
  if (steps && *steps < 0) throw ConfigError("budget: step budget must be >= 0");
}

bool Budget::allows(long long steps_so_far, long long queries_so_far) const {
  return (!steps || steps_so_far < *steps) && (!queries || queries_so_far < *queries);
}

void TrainerConfig::validate() const {
  bc.validate();
  update.validate();
  novelty.validate();
  budget.validate();
  if (calibration_episodes < 1) throw ConfigError("calibration_episodes must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
}

bool meets_expert_level(double eval_mean, double expert_mean) {
  return eval_mean >= expert_mean - 0.05 * std::abs(expert_mean);
}

std::optional<long long> queries_to_expert(const RunRecord& record, double expert_mean) {
  for (const auto& ep : record.episodes) {
    if (meets_expert_level(ep.eval_mean, expert_mean)) return ep.queries_cum;
  }
  return std::nullopt;
}

RunSummary RunRecord::recompute_summary() const {
  RunSummary s;
  s.expert_mean = expert_mean;
  s.queries_to_expert = queries_to_expert(*this, expert_mean);
  s.converged = s.queries_to_expert.has_value();
  s.episodes = static_cast<int>(episodes.size());
  if (!episodes.empty()) {
    s.total_queries = episodes.back().queries_cum;
    s.total_steps = episodes.back().steps_cum;
    s.final_eval = episodes.back().eval_mean;
    s.best_eval = episodes.front().eval_mean;
    for (const auto& ep : episodes) s.best_eval = std::max(s.best_eval, ep.eval_mean);
  }
  return s;
}

namespace {

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j = {{"converged", s.converged},         {"total_queries", s.total_queries},
                      {"total_steps", s.total_steps},     {"episodes", s.episodes},
                      {"best_eval", s.best_eval},         {"final_eval", s.final_eval},
                      {"expert_mean", s.expert_mean},     {"queries_to_expert", nullptr}};
  if (s.queries_to_expert) j["queries_to_expert"] = *s.queries_to_expert;
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.converged = j.at("converged").get<bool>();
  s.total_queries = j.at("total_queries").get<long long>();
  s.total_steps = j.at("total_steps").get<long long>();
  s.episodes = j.at("episodes").get<int>();
  s.best_eval = j.at("best_eval").get<double>();
  s.final_eval = j.at("final_eval").get<double>();
  s.expert_mean = j.at("expert_mean").get<double>();
  if (!j.at("queries_to_expert").is_null()) {
    s.queries_to_expert = j.at("queries_to_expert").get<long long>();
  }
  return s;
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes) {
    eps.push_back({{"episode", e.episode},
                   {"length", e.length},
                   {"queries", e.queries},
                   {"steps_cum", e.steps_cum},
                   {"queries_cum", e.queries_cum},
                   {"dataset_size", e.dataset_size},
                   {"eval_mean", e.eval_mean},
                   {"eval_std", e.eval_std},
                   {"mean_score", e.mean_score},
                   {"radius", e.radius},
                   {"alpha", e.alpha},
                   {"wall_seconds", e.wall_seconds},
                   {"converged", e.converged}});
  }
  nlohmann::json j = {{"method", method},
                      {"env", env},
                      {"M", initial_size_target},
                      {"seed", seed},
                      {"config", config},
                      {"threshold", nullptr},
                      {"initial_dataset_size", initial_dataset_size},
                      {"bc_loss", bc_loss},
                      {"bc_eval_mean", bc_eval_mean},
                      {"expert_mean", expert_mean},
                      {"expert_std", expert_std},
                      {"standardized", standardized},
                      {"notes", notes},
                      {"episodes", eps},
                      {"summary", summary_to_json(summary)}};
  if (threshold) {
    j["threshold"] = {{"R", threshold->radius},
                      {"alpha", threshold->alpha},
                      {"m", threshold->order_index},
                      {"N_cal", threshold->calibration_size}};
  }
  return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  r.method = j.at("method").get<std::string>();
  r.env = j.at("env").get<std::string>();
  r.initial_size_target = j.at("M").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  if (!j.at("threshold").is_null()) {
    const auto& t = j.at("threshold");
    r.threshold = CalibratedThreshold{t.at("R").get<double>(), t.at("alpha").get<double>(),
                                      t.at("m").get<int>(), t.at("N_cal").get<int>()};
  }
  r.initial_dataset_size = j.at("initial_dataset_size").get<int>();
  r.bc_loss = j.at("bc_loss").get<double>();
  r.bc_eval_mean = j.at("bc_eval_mean").get<double>();
  r.expert_mean = j.at("expert_mean").get<double>();
  r.expert_std = j.at("expert_std").get<double>();
  r.standardized = j.at("standardized").get<bool>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& e : j.at("episodes")) {
    EpisodeMetrics m;
    m.episode = e.at("episode").get<int>();
    m.length = e.at("length").get<int>();
    m.queries = e.at("queries").get<int>();
    m.steps_cum = e.at("steps_cum").get<long long>();
    m.queries_cum = e.at("queries_cum").get<long long>();
    m.dataset_size = e.at("dataset_size").get<long long>();
    m.eval_mean = e.at("eval_mean").get<double>();
    m.eval_std = e.at("eval_std").get<double>();
    m.mean_score = e.at("mean_score").get<double>();
    m.radius = e.at("radius").get<double>();
    m.alpha = e.at("alpha").get<double>();
    m.wall_seconds = e.at("wall_seconds").get<double>();
    m.converged = e.at("converged").get<bool>();
    r.episodes.push_back(m);
  }
  r.summary = summary_from_json(j.at("summary"));
  if (!(r.recompute_summary() == r.summary)) {
    throw std::runtime_error("run record " + r.method + " seed " + std::to_string(r.seed) +
                             ": stored summary does not match the episode series");
  }
  return r;
}

void RunRecord::write_csv(std::ostream& out) const {
  out << "episode,steps_cum,queries_episode,queries_cum,eval_mean,eval_std,converged_flag\n";
  out << std::setprecision(17);
  for (const auto& e : episodes) {
    out << e.episode << ',' << e.steps_cum << ',' << e.queries << ',' << e.queries_cum << ','
        << e.eval_mean << ',' << e.eval_std << ',' << (e.converged ? 1 : 0) << '\n';
  }
}

ExpertDataset build_initial_dataset(const Environment& env, const Policy& expert, int min_pairs,
                                    std::uint64_t seed) {
  if (min_pairs < 1) throw ConfigError("initial dataset: M must be >= 1");
  ExpertDataset dataset(env.state_dim(), env.action_dim());
  for (std::uint64_t e = 0; dataset.size() < min_pairs; ++e) {
    const Trajectory traj = rollout(env, expert, derive_seed(seed, Stream::kInitialDataset, e));
    for (int t = 0; t < traj.length(); ++t) dataset.add(traj.states[t], traj.actions[t]);
  }
  dataset.freeze_standardizer();
  return dataset;
}

TrainResult train(const Environment& env, const Policy& expert, StrategyConfig strategy,
                  const TrainerConfig& config, TrainingSetup setup, std::uint64_t seed) {
  config.validate();
  strategy.validate();
  if (setup.dataset.empty()) throw ConfigError("train: initial dataset is empty");
  if (strategy.kind == StrategyKind::kCrsail && !strategy.radius) {
    if (!setup.threshold) {
      throw ConfigError("train: crsail needs a calibrated threshold before the loop starts");
    }
    strategy.radius = setup.threshold->radius;
  }

  TrainResult result{std::move(setup.policy), std::move(setup.dataset), {}};
  RunRecord& record = result.record;
  record.env = env.name();
  record.seed = seed;
  record.threshold = setup.threshold;
  record.initial_dataset_size = result.dataset.size();
  record.expert_mean = setup.expert_mean;
  record.standardized = config.novelty.standardize;

  const long long initial_size = result.dataset.size();
  Rng strategy_rng(derive_seed(seed, Stream::kStrategy));
  Rng update_rng(derive_seed(seed, Stream::kUpdate));
  Rng ensemble_rng(derive_seed(seed, Stream::kEnsemble));

  PolicyEnsemble ensemble;
  if (strategy.kind == StrategyKind::kEnsembleVariance) {
    ensemble = PolicyEnsemble::train(result.dataset, config.bc, strategy.ensemble_size,
                                     ensemble_rng);
  }

  long long steps = 0;
  long long queries = 0;
  for (int i = 0; config.budget.allows(steps, queries); ++i) {
    const auto started = std::chrono::steady_clock::now();
    EpisodeMetrics m;
    try {
      const Trajectory traj = rollout(env, result.policy,
                                      derive_seed(seed, Stream::kTraining, static_cast<std::uint64_t>(i)));

      // Scores use the dataset as it was at the start of this episode.
      std::optional<NoveltyIndex> snapshot;
      if (strategy.uses_novelty()) snapshot.emplace(result.dataset, config.novelty);
      QueryContext context;
      context.novelty = snapshot ? &*snapshot : nullptr;
      context.ensemble = &ensemble;
      context.rng = &strategy_rng;
      const QuerySet selected = select_queries(strategy, traj, context);
      const ExpertDataset labeled = label_queries(expert, traj, selected, env.action_dim());

      result.dataset.merge(labeled);
      if (config.retrain_from_scratch) {
        TrainConfig fresh = config.bc;
        fresh.seed = derive_seed(seed, Stream::kBehavioralCloning, static_cast<std::uint64_t>(i) + 1);
        MlpPolicy retrained = behavioral_cloning(result.dataset, fresh);
        result.policy = std::move(retrained);
      } else {
        result.policy = update(result.policy, result.dataset, config.update, update_rng);
      }
      if (strategy.kind == StrategyKind::kEnsembleVariance) {
        ensemble.update(result.dataset, config.update, ensemble_rng);
      }

      steps += traj.length();
      queries += labeled.size();
      if (result.dataset.size() != initial_size + queries) {
        throw std::logic_error("dataset size drifted from |D0| + queries");
      }

      const ReturnStats eval = evaluate_policy(env, result.policy, config.eval_episodes, seed);
      m.episode = i;
      m.length = traj.length();
      m.queries = selected.size();
      m.steps_cum = steps;
      m.queries_cum = queries;
      m.dataset_size = result.dataset.size();
      m.eval_mean = eval.mean;
      m.eval_std = eval.std;
      if (!selected.scores.empty()) {
        double sum = 0.0;
        for (double s : selected.scores) sum += s;
        m.mean_score = sum / static_cast<double>(selected.scores.size());
      }
      m.radius = strategy.radius.value_or(strategy.kind == StrategyKind::kFixedThreshold
                                              ? strategy.threshold
                                              : 0.0);
      m.alpha = strategy.kind == StrategyKind::kCrsail ? strategy.alpha : 0.0;
      m.converged = meets_expert_level(eval.mean, setup.expert_mean);

      if (strategy.kind == StrategyKind::kCrsail && strategy.recalibrate_every > 0 &&
          (i + 1) % strategy.recalibrate_every == 0) {
        const CalibratedThreshold again = calibrate_radius(
            env, result.policy, result.dataset, config.novelty, strategy.alpha,
            config.calibration_episodes,
            derive_seed(seed, Stream::kCalibration, static_cast<std::uint64_t>(i) + 1));
        strategy.radius = again.radius;
      }
    } catch (const TrainingError&) {
      throw;
    } catch (const std::exception& e) {
      throw TrainingError(i, e.what());
    }
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    record.episodes.push_back(m);
  }
  record.summary = record.recompute_summary();
  return result;
}

}  // namespace crsail
