// Command-line driver: single trials, Monte Carlo sweeps, plot-ready
// aggregation, and the property-validation suites.

#include "staree/config.hpp"
#include "staree/harness.hpp"
#include "staree/validation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<staree::Method> parse_methods(const std::string& csv) {
  std::vector<staree::Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(staree::parse_method(item));
  }
  return out;
}

staree::RunConfig resolve_config(const std::string& config_path,
                                 const std::vector<std::string>& overrides) {
  staree::RunConfig config =
      config_path.empty() ? staree::default_config() : staree::load_config(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    staree::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-surface assisted MU-MIMO energy-efficiency simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--set", overrides, "override a config key (key=value, repeatable)");

  // run
  auto* cmd_run = app.add_subcommand("run", "run a single trial and print the record");
  std::string run_method = "star-es";
  std::uint64_t run_seed = 1;
  std::string run_trace;
  cmd_run->add_option("--method", run_method, "star-es|star-ms|ris|ris-rand|no-ris");
  cmd_run->add_option("--seed", run_seed, "trial seed");
  cmd_run->add_option("--trace", run_trace, "write the per-iteration trace to this file");

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one axis");
  std::string sweep_axis = "ps", sweep_values, sweep_methods = "star-es,star-ms,ris,ris-rand,no-ris";
  int sweep_trials = 50, sweep_jobs = 0;
  std::uint64_t sweep_seed = 1;
  std::string sweep_out = "sweep.csv";
  cmd_sweep->add_option("--axis", sweep_axis, "ps|l|eps|m")->required();
  cmd_sweep->add_option("--values", sweep_values, "comma-separated axis values")->required();
  cmd_sweep->add_option("--methods", sweep_methods, "comma-separated method list");
  cmd_sweep->add_option("--trials", sweep_trials, "Monte Carlo trials per point");
  cmd_sweep->add_option("--seed", sweep_seed, "base seed; trial k uses base+k");
  cmd_sweep->add_option("--out", sweep_out, "output CSV path");
  cmd_sweep->add_option("--jobs", sweep_jobs, "worker pool size (0 = hardware)");

  // plotdata
  auto* cmd_plot = app.add_subcommand("plotdata", "aggregate a sweep CSV into plot series");
  std::string plot_in, plot_out = "plotdata.csv", plot_group = "axis,method";
  cmd_plot->add_option("--in", plot_in, "sweep CSV to aggregate")->required();
  cmd_plot->add_option("--out", plot_out, "output CSV path");
  cmd_plot->add_option("--group-by", plot_group, "grouping (only axis,method is supported)");

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "run the property-validation suites");
  int val_instances = 20, val_samples = 200;
  std::uint64_t val_seed = 1;
  std::string val_report;
  cmd_validate->add_option("--instances", val_instances, "random instances per suite");
  cmd_validate->add_option("--samples", val_samples, "perturbation samples per instance");
  cmd_validate->add_option("--seed", val_seed, "suite seed");
  cmd_validate->add_option("--report", val_report, "write the minorization report to this file");

  // config
  auto* cmd_config = app.add_subcommand("config", "configuration helpers");
  auto* cmd_config_print = cmd_config->add_subcommand("print-default", "print the default config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      const staree::RunConfig config = resolve_config(config_path, overrides);
      const staree::Method method = staree::parse_method(run_method);
      const staree::TrialRecord rec = staree::run_trial(config, method, run_seed);
      std::cout << rec.to_string();
      if (!run_trace.empty()) {
        const staree::ScenarioConfig scenario = staree::materialize_scenario(config, run_seed);
        staree::ProblemInstance instance =
            staree::make_instance(config, staree::sample_links(scenario, run_seed));
        const staree::SolveTrace trace =
            staree::run_baseline(method, std::move(instance),
                                 staree::make_ao_config(config, run_seed));
        std::ofstream out(run_trace);
        if (!out) throw std::runtime_error("cannot open trace file: " + run_trace);
        out << trace.to_delimited();
        std::cout << "trace -> " << run_trace << "\n";
      }
      return 0;
    }

    if (*cmd_sweep) {
      const staree::RunConfig config = resolve_config(config_path, overrides);
      staree::SweepSpec spec;
      spec.axis = staree::parse_axis(sweep_axis);
      spec.values = parse_values(sweep_values);
      spec.methods = parse_methods(sweep_methods);
      spec.n_trials = sweep_trials;
      spec.base_seed = sweep_seed;
      spec.jobs = sweep_jobs;
      const auto records = staree::sweep(spec, config);
      staree::emit_csv(records, sweep_out);
      int errors = 0;
      for (const auto& rec : records)
        if (!rec.error.empty()) ++errors;
      std::cout << records.size() << " rows -> " << sweep_out;
      if (errors) std::cout << " (" << errors << " rows with errors)";
      std::cout << "\n";
      return errors == 0 ? 0 : 1;
    }

    if (*cmd_plot) {
      if (plot_group != "axis,method")
        throw std::invalid_argument("--group-by supports only 'axis,method'");
      const auto records = staree::read_csv(plot_in);
      const auto rows = staree::aggregate_plotdata(records);
      staree::emit_plotdata(rows, plot_out);
      std::cout << rows.size() << " series rows -> " << plot_out << "\n";
      return 0;
    }

    if (*cmd_validate) {
      const staree::ValidationSummary summary =
          staree::run_validation_suites(val_instances, val_samples, val_seed);
      std::cout << summary.to_string();
      if (!val_report.empty()) {
        std::ofstream out(val_report);
        if (!out) throw std::runtime_error("cannot open report file: " + val_report);
        out << summary.minorization_report;
        std::cout << "minorization report -> " << val_report << "\n";
      }
      return summary.all_pass() ? 0 : 1;
    }

    if (*cmd_config_print || *cmd_config) {
      const staree::RunConfig config = resolve_config(config_path, overrides);
      std::cout << staree::config_to_string(config);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
