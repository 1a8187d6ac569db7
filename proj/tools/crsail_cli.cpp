// Command-line front end for the experiment harness.
//
//   crsail run <config> [--set section.key=value ...] [--out DIR] [--print-config]
//   crsail sweep <config> [--alpha a1,a2,...] [--K k1,...] [--M m1,...]
//   crsail summarize <dir>
//   crsail plotdata <dir>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crsail/harness.hpp"

namespace fs = std::filesystem;
using crsail::ExperimentConfig;
using crsail::RunRecord;

namespace {

ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = ExperimentConfig::load(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw crsail::ConfigError("--set expects section.key=value, got '" + kv + "'");
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

// Summary tables and plot data next to the run records.
void write_reports(const std::vector<RunRecord>& records, const fs::path& dir) {
  const crsail::SummaryTable table = crsail::summarize(records);
  std::ostringstream csv, text;
  table.write_csv(csv);
  table.write_text(text);
  write_text_file(dir / "summary.csv", csv.str());
  write_text_file(dir / "summary.txt", text.str());
  crsail::emit_plot_data(records, dir);
  std::cout << text.str();
}

int report_failures(const crsail::RunBatch& batch) {
  for (const auto& f : batch.failures) {
    std::cerr << "run M=" << f.initial_size << " seed=" << f.seed << " failed: " << f.message
              << '\n';
  }
  return batch.ok() ? 0 : 1;
}

int execute(const std::vector<ExperimentConfig>& configs, const std::vector<fs::path>& dirs,
            const fs::path& root) {
  std::vector<RunRecord> all;
  int status = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    fs::create_directories(dirs[i]);
    std::ostringstream snapshot;
    configs[i].write(snapshot);
    write_text_file(dirs[i] / "config.ini", snapshot.str());

    crsail::RunBatch batch = crsail::run_experiment(configs[i], dirs[i]);
    status |= report_failures(batch);
    for (auto& r : batch.records) {
      std::cout << r.method << " M=" << r.initial_size_target << " seed=" << r.seed
                << " episodes=" << r.summary.episodes << " queries=" << r.summary.total_queries
                << " converged=" << (r.summary.converged ? "yes" : "no") << '\n';
      all.push_back(std::move(r));
    }
  }
  if (!all.empty()) write_reports(all, root);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active imitation learning experiments with conformally calibrated novelty queries"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool print_config = false;
  int workers = 0;

  auto* run = app.add_subcommand("run", "Run every (M, seed) pair of a config");
  run->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a config value (section.key=value)");
  run->add_option("--out", out_dir, "Output directory (default: experiment.output_dir)");
  run->add_option("--workers", workers, "Parallel runs");
  run->add_flag("--print-config", print_config, "Print the resolved config and exit");

  std::string alphas, ks, ms;
  auto* sweep = app.add_subcommand("sweep", "Run a config across alpha, K or M values");
  sweep->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--alpha", alphas, "Comma-separated miscoverage values");
  sweep->add_option("--K", ks, "Comma-separated neighbor orders");
  sweep->add_option("--M", ms, "Comma-separated initial dataset sizes");
  sweep->add_option("--set", overrides, "Override a config value (section.key=value)");
  sweep->add_option("--out", out_dir, "Output directory (default: experiment.output_dir)");
  sweep->add_option("--workers", workers, "Parallel runs");
  sweep->add_flag("--print-config", print_config, "Print the resolved config and exit");

  std::string records_dir;
  auto* summarize = app.add_subcommand("summarize", "Tabulate convergence and query counts");
  summarize->add_option("dir", records_dir, "Directory of run records")->required();
  auto* plotdata = app.add_subcommand("plotdata", "Write plot-ready CSV curves");
  plotdata->add_option("dir", records_dir, "Directory of run records")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *sweep) {
      ExperimentConfig base = resolve_config(config_path, overrides);
      if (workers > 0) base.workers = workers;
      if (*sweep && !ms.empty()) base.set("experiment.M", ms);
      if (print_config) {
        base.write(std::cout);
        return 0;
      }
      base.validate();
      const fs::path root = crsail::resolve_output_dir(out_dir.empty() ? base.output_dir : out_dir);

      std::vector<ExperimentConfig> configs;
      std::vector<fs::path> dirs;
      if (*run) {
        configs.push_back(base);
        dirs.push_back(root);
      } else {
        const auto alpha_values = alphas.empty() ? std::vector<std::string>{""} : split(alphas);
        const auto k_values = ks.empty() ? std::vector<std::string>{""} : split(ks);
        for (const auto& a : alpha_values) {
          for (const auto& k : k_values) {
            ExperimentConfig c = base;
            std::string name;
            if (!a.empty()) {
              c.set("strategy.alpha", a);
              name += "alpha=" + a;
            }
            if (!k.empty()) {
              c.set("novelty.k", k);
              name += (name.empty() ? "" : "_") + std::string("K=") + k;
            }
            c.validate();
            configs.push_back(c);
            dirs.push_back(name.empty() ? root : root / name);
          }
        }
      }
      return execute(configs, dirs, root);
    }

    const std::vector<RunRecord> records = crsail::load_records(records_dir);
    if (records.empty()) {
      std::cerr << "no run records under " << records_dir << '\n';
      return 1;
    }
    if (*summarize) {
      const crsail::SummaryTable table = crsail::summarize(records);
      std::ostringstream csv;
      table.write_csv(csv);
      write_text_file(fs::path(records_dir) / "summary.csv", csv.str());
      table.write_text(std::cout);
    } else {
      for (const auto& p : crsail::emit_plot_data(records, records_dir)) std::cout << p.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
