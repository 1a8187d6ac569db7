#include "crsail/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace crsail {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": integer out of range");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + text + "'");
}

std::optional<long long> parse_budget(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "none" || t == "unbounded") return std::nullopt;
  return parse_integer(key, t);
}

std::string format_budget(const std::optional<long long>& b) {
  return b ? std::to_string(*b) : "inf";
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(static_cast<T>(parse(key, item)));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

template <typename T>
std::string format_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? "," : "") + std::to_string(values[i]);
  }
  return out;
}

struct Field {
  const char* key;
  void (*set)(ExperimentConfig&, const std::string& key, const std::string& value);
  std::string (*get)(const ExperimentConfig&);
};

#define CRSAIL_DOUBLE(name, member)                                                       \
  Field {                                                                                 \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) {           \
      c.member = parse_double(k, v);                                                      \
    },                                                                                    \
        [](const ExperimentConfig& c) { return format_double(c.member); }                 \
  }
#define CRSAIL_INT(name, member)                                                          \
  Field {                                                                                 \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) {           \
      c.member = parse_int(k, v);                                                         \
    },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                \
  }
#define CRSAIL_BOOL(name, member)                                                         \
  Field {                                                                                 \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) {           \
      c.member = parse_bool(k, v);                                                        \
    },                                                                                    \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"env.kind",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.env.kind = parse_env_kind(trim(v));
         c.env_set = true;
       },
       [](const ExperimentConfig& c) { return c.env_set ? to_string(c.env.kind) : std::string(); }},
      CRSAIL_DOUBLE("pendulum.gravity", env.pendulum.gravity),
      CRSAIL_DOUBLE("pendulum.length", env.pendulum.length),
      CRSAIL_DOUBLE("pendulum.mass", env.pendulum.mass),
      CRSAIL_DOUBLE("pendulum.damping", env.pendulum.damping),
      CRSAIL_DOUBLE("pendulum.dt", env.pendulum.dt),
      CRSAIL_DOUBLE("pendulum.max_torque", env.pendulum.max_torque),
      CRSAIL_DOUBLE("pendulum.fail_angle", env.pendulum.fail_angle),
      CRSAIL_INT("pendulum.horizon", env.pendulum.horizon),
      CRSAIL_DOUBLE("pendulum.init_angle", env.pendulum.init_angle),
      CRSAIL_DOUBLE("pendulum.init_velocity", env.pendulum.init_velocity),
      CRSAIL_DOUBLE("pendulum.kp", env.pendulum.kp),
      CRSAIL_DOUBLE("pendulum.kd", env.pendulum.kd),
      CRSAIL_DOUBLE("pendulum.expert_torque_limit", env.pendulum.expert_torque_limit),
      CRSAIL_DOUBLE("pusher.dt", env.pusher.dt),
      CRSAIL_DOUBLE("pusher.max_speed", env.pusher.max_speed),
      CRSAIL_DOUBLE("pusher.contact_radius", env.pusher.contact_radius),
      CRSAIL_DOUBLE("pusher.push_gain", env.pusher.push_gain),
      CRSAIL_DOUBLE("pusher.goal_range", env.pusher.goal_range),
      CRSAIL_DOUBLE("pusher.object_range", env.pusher.object_range),
      CRSAIL_DOUBLE("pusher.agent_range", env.pusher.agent_range),
      CRSAIL_INT("pusher.horizon", env.pusher.horizon),
      CRSAIL_DOUBLE("pusher.standoff", env.pusher.standoff),
      CRSAIL_DOUBLE("double_integrator.dt", env.double_integrator.dt),
      CRSAIL_DOUBLE("double_integrator.max_accel", env.double_integrator.max_accel),
      CRSAIL_INT("double_integrator.horizon", env.double_integrator.horizon),
      CRSAIL_DOUBLE("double_integrator.init_position", env.double_integrator.init_position),
      CRSAIL_DOUBLE("double_integrator.init_velocity", env.double_integrator.init_velocity),
      {"strategy.kind",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.strategy.kind = parse_strategy_kind(trim(v));
         c.strategy_set = true;
       },
       [](const ExperimentConfig& c) {
         return c.strategy_set ? to_string(c.strategy.kind) : std::string();
       }},
      CRSAIL_DOUBLE("strategy.alpha", strategy.alpha),
      {"strategy.radius",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const std::string t = trim(v);
         if (t == "auto" || t.empty()) {
           c.strategy.radius.reset();
         } else {
           c.strategy.radius = parse_double(k, t);
         }
       },
       [](const ExperimentConfig& c) {
         return c.strategy.radius ? format_double(*c.strategy.radius) : std::string("auto");
       }},
      CRSAIL_INT("strategy.recalibrate_every", strategy.recalibrate_every),
      CRSAIL_DOUBLE("strategy.rate", strategy.rate),
      CRSAIL_DOUBLE("strategy.threshold", strategy.threshold),
      CRSAIL_INT("strategy.ensemble_size", strategy.ensemble_size),
      CRSAIL_DOUBLE("strategy.doubt_threshold", strategy.doubt_threshold),
      CRSAIL_INT("novelty.k", trainer.novelty.k),
      CRSAIL_BOOL("novelty.standardize", trainer.novelty.standardize),
      {"novelty.backend",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.trainer.novelty.backend = parse_novelty_backend(trim(v));
       },
       [](const ExperimentConfig& c) { return to_string(c.trainer.novelty.backend); }},
      CRSAIL_DOUBLE("train.learning_rate", trainer.bc.learning_rate),
      CRSAIL_INT("train.batch_size", trainer.bc.batch_size),
      CRSAIL_INT("train.bc_epochs", trainer.bc.epochs),
      CRSAIL_INT("train.update_epochs", trainer.update.epochs),
      CRSAIL_DOUBLE("train.init_scale", trainer.bc.init_scale),
      CRSAIL_INT("train.hidden", trainer.bc.hidden),
      CRSAIL_BOOL("train.retrain_from_scratch", trainer.retrain_from_scratch),
      {"budget.steps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.trainer.budget.steps = parse_budget(k, v);
       },
       [](const ExperimentConfig& c) { return format_budget(c.trainer.budget.steps); }},
      {"budget.queries",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.trainer.budget.queries = parse_budget(k, v);
       },
       [](const ExperimentConfig& c) { return format_budget(c.trainer.budget.queries); }},
      {"experiment.M",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.initial_sizes = parse_list<int>(k, v, parse_int);
       },
       [](const ExperimentConfig& c) { return format_list(c.initial_sizes); }},
      {"experiment.seeds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.seeds = parse_list<std::uint64_t>(k, v, parse_integer);
       },
       [](const ExperimentConfig& c) { return format_list(c.seeds); }},
      CRSAIL_INT("experiment.calibration_episodes", trainer.calibration_episodes),
      CRSAIL_INT("experiment.eval_episodes", trainer.eval_episodes),
      CRSAIL_INT("experiment.workers", workers),
      {"experiment.output_dir",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.output_dir = trim(v);
       },
       [](const ExperimentConfig& c) { return c.output_dir; }},
  };
  return table;
}

#undef CRSAIL_DOUBLE
#undef CRSAIL_INT
#undef CRSAIL_BOOL

// BC and per-episode updates share the optimizer settings except for epochs.
void sync_update_config(ExperimentConfig& c) {
  const int epochs = c.trainer.update.epochs;
  c.trainer.update = c.trainer.bc;
  c.trainer.update.epochs = epochs;
}

void write_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' || ch == '-' ||
        ch == '=' || ch == ',') {
      out += ch;
    } else if (ch == '(' || ch == ')') {
      out += '_';
    }
  }
  return out;
}

double population_std(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, key, value);
      sync_update_config(*this);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

void ExperimentConfig::validate() const {
  if (!env_set) throw ConfigError("config: env.kind must be set");
  if (!strategy_set) throw ConfigError("config: strategy.kind must be set");
  make_environment(env);  // parameter validation
  strategy.validate();
  trainer.validate();
  if (initial_sizes.empty() || seeds.empty()) throw ConfigError("config: empty M or seed list");
  for (int m : initial_sizes) {
    if (m < 1) throw ConfigError("config: every M must be >= 1");
  }
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (strategy.uses_novelty()) {
    for (int m : initial_sizes) {
      if (m < trainer.novelty.k) {
        throw ConfigError("config: M=" + std::to_string(m) + " is smaller than K=" +
                          std::to_string(trainer.novelty.k));
      }
    }
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  // '#' comments are accepted in addition to the ';' comments the INI reader knows.
  std::stringstream filtered;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    filtered << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(filtered, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) config.set(section + "." + key, value.data());
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in);
}

void ExperimentConfig::write(std::ostream& out) const {
  std::string section;
  for (const auto& [key, value] : entries()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    if (value.empty()) {
      out << "; " << key.substr(dot + 1) << " = <required>\n";
    } else {
      out << key.substr(dot + 1) << " = " << value << '\n';
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : entries()) j[key] = value;
  return j;
}

std::string ExperimentConfig::method_label() const {
  std::ostringstream s;
  s << to_string(strategy.kind);
  switch (strategy.kind) {
    case StrategyKind::kCrsail:
      s << "(alpha=" << format_double(strategy.alpha) << ",K=" << trainer.novelty.k;
      if (strategy.radius) s << ",R=" << format_double(*strategy.radius);
      if (strategy.recalibrate_every > 0) s << ",recal=" << strategy.recalibrate_every;
      s << ')';
      break;
    case StrategyKind::kDagger: break;
    case StrategyKind::kRandomRate: s << "(p=" << format_double(strategy.rate) << ')'; break;
    case StrategyKind::kFixedThreshold:
      s << "(tau=" << format_double(strategy.threshold) << ",K=" << trainer.novelty.k << ')';
      break;
    case StrategyKind::kEnsembleVariance:
      s << "(n=" << strategy.ensemble_size
        << ",tau=" << format_double(strategy.doubt_threshold) << ')';
      break;
  }
  if (trainer.retrain_from_scratch) s << "[retrain]";
  return s.str();
}

fs::path resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("CRSAIL_OUTPUT_ROOT"); root && *root) {
      return fs::path(root) / p;
    }
  }
  return p;
}

RunRecord run_single(const ExperimentConfig& config, int initial_size, std::uint64_t seed) {
  const auto env = make_environment(config.env);
  const auto expert = make_expert(config.env);
  const TrainerConfig& tc = config.trainer;

  ExpertDataset dataset = build_initial_dataset(*env, *expert, initial_size, seed);
  TrainConfig bc = tc.bc;
  bc.seed = derive_seed(seed, Stream::kBehavioralCloning);
  MlpPolicy policy = behavioral_cloning(dataset, bc);

  const TrainingMatrices bc_data = training_matrices(dataset, policy.standardizer());
  const double bc_loss = mean_squared_loss(policy.params(), bc_data.inputs, bc_data.targets);
  const ReturnStats expert_stats = evaluate_policy(*env, *expert, tc.eval_episodes, seed);
  const ReturnStats bc_stats = evaluate_policy(*env, policy, tc.eval_episodes, seed);

  std::optional<CalibratedThreshold> threshold;
  if (config.strategy.kind == StrategyKind::kCrsail && !config.strategy.radius) {
    threshold = calibrate_radius(*env, policy, dataset, tc.novelty, config.strategy.alpha,
                                 tc.calibration_episodes, seed);
  }

  TrainingSetup setup{std::move(dataset), std::move(policy), threshold, expert_stats.mean};
  TrainResult result = train(*env, *expert, config.strategy, tc, std::move(setup), seed);

  RunRecord& r = result.record;
  r.method = config.method_label();
  r.initial_size_target = initial_size;
  r.config = config.to_json();
  r.bc_loss = bc_loss;
  r.bc_eval_mean = bc_stats.mean;
  r.expert_std = expert_stats.std;
  if (config.strategy.kind == StrategyKind::kEnsembleVariance) {
    r.notes.push_back(
        "ensemble_variance gates on mean per-dimension action std only (no agreement threshold)");
  }
  if (config.strategy.kind == StrategyKind::kCrsail && config.strategy.radius) {
    r.notes.push_back("radius overridden by config; calibration skipped");
  }
  if (tc.retrain_from_scratch) r.notes.push_back("learner retrained from scratch every episode");
  r.notes.push_back("behavioral cloning excluded from step and query budgets");
  return std::move(result.record);
}

void write_record(const RunRecord& record, const fs::path& dir) {
  const fs::path sub = dir / sanitize(record.method);
  fs::create_directories(sub);
  const std::string stem =
      "M" + std::to_string(record.initial_size_target) + "_seed" + std::to_string(record.seed);
  write_atomically(sub / (stem + ".json"), record.to_json().dump(2) + "\n");
  std::ostringstream csv;
  record.write_csv(csv);
  write_atomically(sub / (stem + ".csv"), csv.str());
}

RunBatch run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  struct Job {
    int m;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int m : config.initial_sizes) {
    for (auto s : config.seeds) jobs.push_back({m, s});
  }

  std::vector<std::optional<RunRecord>> done(jobs.size());
  std::vector<std::optional<RunFailure>> failed(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        RunRecord r = run_single(config, jobs[j].m, jobs[j].seed);
        if (!out_dir.empty()) write_record(r, out_dir);
        done[j] = std::move(r);
      } catch (const std::exception& e) {
        failed[j] = RunFailure{jobs[j].m, jobs[j].seed, e.what()};
      }
    }
  };
  const auto n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunBatch batch;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (done[j]) batch.records.push_back(std::move(*done[j]));
    if (failed[j]) batch.failures.push_back(std::move(*failed[j]));
  }
  return batch;
}

std::vector<RunRecord> load_records(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> records;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (!j.is_object() || !j.contains("episodes") || !j.contains("summary")) continue;
    records.push_back(RunRecord::from_json(j));
  }
  return records;
}

std::pair<double, double> sample_mean_std(const std::vector<double>& values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const double mean = mean_of(values);
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

SummaryTable summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::runtime_error("summarize: no run records");
  std::map<std::pair<std::string, int>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.method, r.initial_size_target}].push_back(&r);

  SummaryTable table;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.method = key.first;
    row.initial_size = key.second;
    row.runs = static_cast<int>(group.size());
    std::vector<double> q2e, totals;
    for (const RunRecord* r : group) {
      if (r->summary.queries_to_expert) q2e.push_back(static_cast<double>(*r->summary.queries_to_expert));
      totals.push_back(static_cast<double>(r->summary.total_queries));
    }
    row.converged = static_cast<int>(q2e.size());
    row.convergence_pct = 100.0 * row.converged / row.runs;
    std::tie(row.q2e_mean, row.q2e_std) = sample_mean_std(q2e);
    std::tie(row.total_mean, row.total_std) = sample_mean_std(totals);
    table.rows.push_back(row);
  }
  return table;
}

void SummaryTable::write_csv(std::ostream& out) const {
  out << "method,M,runs,converged,convergence_pct,q2e_mean,q2e_std,total_queries_mean,"
         "total_queries_std\n";
  for (const auto& r : rows) {
    out << '"' << r.method << "\"," << r.initial_size << ',' << r.runs << ',' << r.converged << ','
        << format_double(r.convergence_pct) << ','
        << (std::isnan(r.q2e_mean) ? std::string() : format_double(r.q2e_mean)) << ','
        << (std::isnan(r.q2e_mean) ? std::string() : format_double(r.q2e_std)) << ','
        << format_double(r.total_mean) << ',' << format_double(r.total_std) << '\n';
  }
}

void SummaryTable::write_text(std::ostream& out) const {
  std::map<std::string, std::vector<const SummaryRow*>> by_method;
  for (const auto& r : rows) by_method[r.method].push_back(&r);

  auto pm = [](double mean, double sd) {
    if (std::isnan(mean)) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(0) << mean << " ± " << sd;
    return s.str();
  };
  constexpr int kLabel = 16, kCol = 18;
  for (const auto& [method, list] : by_method) {
    out << method << '\n' << std::left << std::setw(kLabel) << "  M";
    for (const auto* r : list) out << std::setw(kCol) << r->initial_size;
    out << '\n' << std::setw(kLabel) << "  Conv. (%)";
    for (const auto* r : list) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(0) << r->convergence_pct << " (" << r->converged << '/'
        << r->runs << ')';
      out << std::setw(kCol) << s.str();
    }
    out << '\n' << std::setw(kLabel) << "  Q->expert";
    for (const auto* r : list) out << std::setw(kCol + 1) << pm(r->q2e_mean, r->q2e_std);
    out << '\n' << std::setw(kLabel) << "  Total Q";
    for (const auto* r : list) out << std::setw(kCol + 1) << pm(r->total_mean, r->total_std);
    out << "\n\n";
  }
}

std::vector<fs::path> emit_plot_data(const std::vector<RunRecord>& records, const fs::path& dir) {
  if (records.empty()) throw std::runtime_error("plotdata: no run records");
  fs::create_directories(dir);
  std::map<std::pair<std::string, int>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.method, r.initial_size_target}].push_back(&r);

  std::ostringstream reward, steps, lengths;
  reward << "method,M,episode,n_seeds,queries_mean,queries_std,reward_mean,reward_std\n";
  steps << "method,M,episode,n_seeds,steps_mean,steps_std,queries_mean,queries_std\n";
  lengths << "method,M,length,n_episodes,queries_mean,queries_std\n";
  for (auto* s : {&reward, &steps, &lengths}) *s << std::setprecision(17);

  for (const auto& [key, group] : groups) {
    const std::string prefix = '"' + key.first + "\"," + std::to_string(key.second) + ',';
    std::size_t longest = 0;
    for (const RunRecord* r : group) longest = std::max(longest, r->episodes.size());
    for (std::size_t e = 0; e < longest; ++e) {
      std::vector<double> q, rw, st;
      for (const RunRecord* r : group) {
        if (e >= r->episodes.size()) continue;
        q.push_back(static_cast<double>(r->episodes[e].queries_cum));
        rw.push_back(r->episodes[e].eval_mean);
        st.push_back(static_cast<double>(r->episodes[e].steps_cum));
      }
      const double qm = mean_of(q), rm = mean_of(rw), sm = mean_of(st);
      reward << prefix << e << ',' << q.size() << ',' << qm << ',' << population_std(q, qm) << ','
             << rm << ',' << population_std(rw, rm) << '\n';
      steps << prefix << e << ',' << q.size() << ',' << sm << ',' << population_std(st, sm) << ','
            << qm << ',' << population_std(q, qm) << '\n';
    }
    std::map<int, std::vector<double>> per_length;
    for (const RunRecord* r : group) {
      for (const auto& ep : r->episodes) per_length[ep.length].push_back(ep.queries);
    }
    for (const auto& [len, qs] : per_length) {
      const double m = mean_of(qs);
      lengths << prefix << len << ',' << qs.size() << ',' << m << ',' << population_std(qs, m)
              << '\n';
    }
  }

  const std::vector<fs::path> paths = {dir / "reward_vs_queries.csv", dir / "queries_vs_steps.csv",
                                       dir / "queries_vs_length.csv"};
  write_atomically(paths[0], reward.str());
  write_atomically(paths[1], steps.str());
  write_atomically(paths[2], lengths.str());
  return paths;
}

}  // namespace crsail
