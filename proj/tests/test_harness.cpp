#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crsail/harness.hpp"

using namespace crsail;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crsail_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig quick(const std::string& env, const std::string& strategy) {
  ExperimentConfig c;
  c.set("env.kind", env);
  c.set("strategy.kind", strategy);
  c.set("train.bc_epochs", "20");
  c.set("train.update_epochs", "3");
  c.set("experiment.eval_episodes", "3");
  c.set("experiment.calibration_episodes", "5");
  c.set("experiment.seeds", "1");
  return c;
}

RunRecord synthetic(const std::string& method, std::optional<long long> q2e, long long total) {
  RunRecord r;
  r.method = method;
  r.initial_size_target = 500;
  r.expert_mean = 100.0;
  EpisodeMetrics a;
  a.episode = 0;
  a.queries_cum = q2e.value_or(total) / 2;
  a.eval_mean = 0.0;
  EpisodeMetrics b;
  b.episode = 1;
  b.queries_cum = q2e.value_or(total);
  b.eval_mean = q2e ? 100.0 : 10.0;
  EpisodeMetrics c = b;
  c.episode = 2;
  c.queries_cum = total;
  r.episodes = {a, b, c};
  r.summary = r.recompute_summary();
  return r;
}

}  // namespace

TEST_SUITE("cli-harness") {
  TEST_CASE("config text parsing and overrides") {
    std::istringstream text(R"(# comment
[env]
kind = pendulum
[strategy]
kind = crsail
alpha = 0.8
radius = auto
[novelty]
k = 3
backend = kd_tree
[budget]
steps = 2500
queries = inf
[experiment]
M = 250, 1000
seeds = 4,5
)");
    ExperimentConfig c = ExperimentConfig::parse(text);
    CHECK(c.env.kind == EnvKind::kPendulum);
    CHECK(c.strategy.kind == StrategyKind::kCrsail);
    CHECK(c.strategy.alpha == 0.8);
    CHECK_FALSE(c.strategy.radius.has_value());
    CHECK(c.trainer.novelty.k == 3);
    CHECK(c.trainer.novelty.backend == NoveltyBackend::kKdTree);
    CHECK(c.trainer.budget.steps == 2500);
    CHECK_FALSE(c.trainer.budget.queries.has_value());
    CHECK(c.initial_sizes == std::vector<int>{250, 1000});
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(c.method_label() == "crsail(alpha=0.8,K=3)");

    c.set("strategy.radius", "0.25");
    CHECK(c.strategy.radius == 0.25);
    c.set("train.learning_rate", "0.005");
    CHECK(c.trainer.update.learning_rate == 0.005);  // optimizer settings are shared
    CHECK_THROWS_AS(c.set("strategy.colour", "red"), ConfigError);
    CHECK_THROWS_AS(c.set("novelty.k", "five"), ConfigError);
    CHECK_THROWS_AS(c.set("env.kind", "cartpole"), ConfigError);
    CHECK_NOTHROW(c.validate());
    c.set("strategy.alpha", "1.5");
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("env and strategy kinds are required") {
    ExperimentConfig c;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.set("env.kind", "pusher");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.set("strategy.kind", "dagger");
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("written configs parse back to the same entries") {
    ExperimentConfig c = quick("double_integrator", "ensemble_variance");
    c.set("strategy.doubt_threshold", "0.0625");
    c.set("budget.queries", "777");
    c.set("experiment.M", "10,20");
    std::stringstream buf;
    c.write(buf);
    const ExperimentConfig back = ExperimentConfig::parse(buf);
    CHECK(back.entries() == c.entries());
    CHECK(back.to_json() == c.to_json());
  }

  TEST_CASE("DAgger on a fixed-horizon env spends T_train queries") {
    ExperimentConfig c = quick("pusher", "dagger");
    c.set("budget.steps", "300");
    c.set("experiment.M", "100");
    const RunRecord r = run_single(c, 100, 1);
    CHECK(r.summary.total_queries == 300);
    CHECK(r.summary.total_steps == 300);
    CHECK(r.initial_dataset_size == 100);
    CHECK(r.method == "dagger");
    CHECK(r.config.at("env.kind") == "pusher");
    CHECK_FALSE(r.threshold.has_value());

    const fs::path a = scratch_dir("rerun_a");
    const fs::path b = scratch_dir("rerun_b");
    const RunBatch first = run_experiment(c, a);
    const RunBatch second = run_experiment(c, b);
    REQUIRE(first.ok());
    REQUIRE(second.ok());
    const std::string csv_a = slurp(a / "dagger" / "M100_seed1.csv");
    CHECK_FALSE(csv_a.empty());
    CHECK(csv_a == slurp(b / "dagger" / "M100_seed1.csv"));

    const auto loaded = load_records(a);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].summary == first.records[0].summary);
  }

  TEST_CASE("infeasible calibration surfaces the remediation text") {
    ExperimentConfig c = quick("pendulum", "crsail");
    c.set("strategy.alpha", "0.001");
    c.set("experiment.calibration_episodes", "1");
    c.set("budget.steps", "200");
    try {
      run_single(c, 250, 1);
      FAIL("expected InfeasibleCalibration");
    } catch (const InfeasibleCalibration& e) {
      CHECK(std::string(e.what()).find("collect more calibration episodes or raise alpha") !=
            std::string::npos);
    }
    const RunBatch batch = run_experiment(c);
    REQUIRE(batch.failures.size() == 1);
    CHECK(batch.failures[0].message.find("raise alpha") != std::string::npos);

    c.set("strategy.alpha", "0.999");  // the permissive end is always feasible
    CHECK(run_single(c, 250, 1).threshold->order_index == 1);
  }

  TEST_CASE("summary statistics") {
    std::vector<RunRecord> all;
    for (long long q : {90, 100, 110, 100, 100}) all.push_back(synthetic("a", q, 200));
    SummaryTable t = summarize(all);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].convergence_pct == 100.0);
    CHECK(t.rows[0].q2e_mean == doctest::Approx(100.0));
    CHECK(t.rows[0].q2e_std == doctest::Approx(std::sqrt(50.0)));
    CHECK(t.rows[0].total_mean == 200.0);
    CHECK(t.rows[0].total_std == 0.0);

    std::vector<RunRecord> some = {synthetic("b", 60, 300), synthetic("b", 80, 300),
                                   synthetic("b", std::nullopt, 300),
                                   synthetic("b", std::nullopt, 300),
                                   synthetic("b", std::nullopt, 300)};
    t = summarize(some);
    CHECK(t.rows[0].converged == 2);
    CHECK(t.rows[0].convergence_pct == 40.0);
    CHECK(t.rows[0].q2e_mean == 70.0);

    std::vector<RunRecord> none = {synthetic("c", std::nullopt, 10)};
    t = summarize(none);
    CHECK(std::isnan(t.rows[0].q2e_mean));
    std::ostringstream csv, text;
    t.write_csv(csv);
    t.write_text(text);
    CHECK(csv.str().find("\"c\",500,1,0,0,,,10,0") != std::string::npos);
    CHECK(text.str().find("Conv. (%)") != std::string::npos);

    CHECK_THROWS(summarize({}));
    CHECK(sample_mean_std({4.0}).second == 0.0);
  }

  TEST_CASE("text table has one row block per method with M columns") {
    std::vector<RunRecord> grid;
    for (int m : {250, 500, 1000}) {
      RunRecord r = synthetic("dagger", 100, 200);
      r.initial_size_target = m;
      grid.push_back(r);
    }
    const SummaryTable t = summarize(grid);
    CHECK(t.rows.size() == 3);
    std::ostringstream text;
    t.write_text(text);
    const std::string s = text.str();
    CHECK(s.rfind("dagger\n", 0) == 0);
    CHECK(s.find("250") < s.find("500"));
    CHECK(s.find("500") < s.find("1000"));
  }

  TEST_CASE("plot data") {
    ExperimentConfig c = quick("pendulum", "dagger");
    c.set("budget.steps", "1000");
    c.set("experiment.M", "500");
    const RunRecord dagger = run_single(c, 500, 2);
    c.set("strategy.kind", "crsail");
    const RunRecord crsail = run_single(c, 500, 2);

    const fs::path dir = scratch_dir("plots");
    const auto paths = emit_plot_data({dagger, crsail}, dir);
    REQUIRE(paths.size() == 3);

    // Parse queries_vs_steps rows: method,M,episode,n,steps_mean,steps_std,queries_mean,queries_std
    std::istringstream steps(slurp(dir / "queries_vs_steps.csv"));
    std::string line;
    std::getline(steps, line);
    int dagger_rows = 0;
    while (std::getline(steps, line)) {
      // The method label is quoted and may itself contain commas.
      const std::size_t close = line.find('"', 1);
      std::vector<std::string> cells = {line.substr(0, close + 1)};
      std::stringstream ss(line.substr(close + 2));
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      REQUIRE(cells.size() >= 8);
      CHECK(std::stod(cells[5]) == 0.0);  // single seed
      CHECK(std::stod(cells[7]) == 0.0);
      if (line.rfind("\"dagger\"", 0) == 0) {
        ++dagger_rows;
        CHECK(std::stod(cells[4]) == std::stod(cells[6]));
      } else {
        CHECK(std::stod(cells[6]) <= std::stod(cells[4]));
      }
    }
    CHECK(dagger_rows == static_cast<int>(dagger.episodes.size()));
    CHECK(crsail.summary.total_queries < dagger.summary.total_queries);
    CHECK(slurp(dir / "queries_vs_length.csv").find("\"dagger\",500,200,") != std::string::npos);
    CHECK_THROWS(emit_plot_data({}, dir));
  }

  TEST_CASE("output root override for relative paths") {
    ::setenv("CRSAIL_OUTPUT_ROOT", "/tmp/crsail_root", 1);
    CHECK(resolve_output_dir("runs/x") == fs::path("/tmp/crsail_root/runs/x"));
    CHECK(resolve_output_dir("/abs/y") == fs::path("/abs/y"));
    ::unsetenv("CRSAIL_OUTPUT_ROOT");
    CHECK(resolve_output_dir("runs/x") == fs::path("runs/x"));
  }

  TEST_CASE("record loading skips foreign JSON") {
    const fs::path dir = scratch_dir("foreign");
    std::ofstream(dir / "notes.json") << "{\"hello\": 1}\n";
    std::ofstream(dir / "list.json") << "[1,2]\n";
    write_record(synthetic("x", 5, 9), dir);
    const auto records = load_records(dir);
    REQUIRE(records.size() == 1);
    CHECK(records[0].method == "x");
  }
}
