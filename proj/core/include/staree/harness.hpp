#pragma once

#include "staree/ao.hpp"
#include "staree/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace staree {

enum class SweepAxis { StaticPower, Blocklength, Epsilon, RisElements };

const char* axis_name(SweepAxis axis);        // "ps", "l", "eps", "m"
SweepAxis parse_axis(const std::string& name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::StaticPower;
  std::vector<double> values;    // nonempty, sorted ascending
  std::vector<Method> methods;
  int n_trials = 50;
  std::uint64_t base_seed = 1;
  int jobs = 0;  // worker pool size; 0 means hardware concurrency

  void validate() const;
};

struct TrialRecord {
  Method method = Method::StarES;
  std::string axis;        // empty for single runs
  double axis_value = 0.0;
  int trial_index = 0;
  std::uint64_t seed = 0;  // base_seed + trial_index
  double sum_ee_nats = 0.0;
  double sum_ee_bits = 0.0;
  RealVector rates;        // final per-user rates, nats
  int outer_iters = 0;
  double wall_clock_s = 0.0;  // informational; never serialized to CSV
  bool feasible = true;
  double power_used = 0.0;
  double ris_power = 0.0;  // sum_m |theta_r|^2 + |theta_t|^2
  std::string error;

  std::string to_string() const;
};

/// Concrete scenario for one trial: user positions drawn from the configured
/// disc, the second half mirrored across the surface plane. Deterministic in
/// (config, seed).
ScenarioConfig materialize_scenario(const RunConfig& config, std::uint64_t seed);

ProblemInstance make_instance(const RunConfig& config, LinkSet links);
AOConfig make_ao_config(const RunConfig& config, std::uint64_t seed);

/// Samples links with the seed, runs the method, extracts the record.
/// Pure function of its inputs; errors carry the trial context.
TrialRecord run_trial(const RunConfig& config, Method method, std::uint64_t seed);

/// Cartesian product of values x methods x trials, executed by a bounded
/// worker pool, output ordered (axis value, method, trial). Per-trial errors
/// are recorded in the row and the sweep continues.
std::vector<TrialRecord> sweep(const SweepSpec& spec, const RunConfig& config);

/// Header plus one row per record, comma separated, doubles at 9 significant
/// digits. Byte-identical across runs with the same inputs.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::string to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_csv(const std::string& path);

struct PlotRow {
  std::string axis;
  double axis_value = 0.0;
  Method method = Method::StarES;
  double mean_nats = 0.0, stderr_nats = 0.0;
  double mean_bits = 0.0, stderr_bits = 0.0;
  int count = 0;
};

/// Per (axis value, method): mean, standard error, trial count.
std::vector<PlotRow> aggregate_plotdata(const std::vector<TrialRecord>& records);
void emit_plotdata(const std::vector<PlotRow>& rows, const std::string& path);

}  // namespace staree
