#include "staree/harness.hpp"

#include "staree/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace staree {

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::StaticPower: return "ps";
    case SweepAxis::Blocklength: return "l";
    case SweepAxis::Epsilon: return "eps";
    case SweepAxis::RisElements: return "m";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "ps") return SweepAxis::StaticPower;
  if (name == "l") return SweepAxis::Blocklength;
  if (name == "eps") return SweepAxis::Epsilon;
  if (name == "m") return SweepAxis::RisElements;
  throw std::invalid_argument("unknown sweep axis '" + name + "' (expected ps|l|eps|m)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("SweepSpec: values must be nonempty");
  if (!std::is_sorted(values.begin(), values.end()))
    throw std::invalid_argument("SweepSpec: values must be sorted ascending");
  if (methods.empty()) throw std::invalid_argument("SweepSpec: methods must be nonempty");
  if (n_trials < 1) throw std::invalid_argument("SweepSpec: n_trials must be >= 1");
}

ScenarioConfig materialize_scenario(const RunConfig& config, std::uint64_t seed) {
  ScenarioConfig sc;
  sc.dims = config.dims;
  sc.bs_position = config.bs_position;
  sc.ris_position = config.ris_position;
  sc.ricean_factor = config.ricean_factor;
  sc.pathloss_exponent = {config.pl_exp_direct, config.pl_exp_bs_ris, config.pl_exp_ris_user};
  sc.pathloss_ref_db = {config.pl_ref_db_direct, config.pl_ref_db_bs_ris,
                        config.pl_ref_db_ris_user};
  sc.noise_power = config.noise_power;
  sc.antenna_gain_db = config.antenna_gain_db;
  sc.blockage_db = config.blockage_db;

  const int k_users = config.dims.n_users;
  const int n_reflection = (k_users + 1) / 2;
  StreamRng rng(seed, "scenario/users");
  sc.user_positions.resize(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) {
    const double r = config.user_disc_radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    Position p{config.user_disc_x + r * std::cos(phi), config.user_disc_y + r * std::sin(phi)};
    if (k >= n_reflection) p.y = 2.0 * config.ris_position.y - p.y;  // refraction space
    sc.user_positions[static_cast<std::size_t>(k)] = p;
  }
  return sc;
}

ProblemInstance make_instance(const RunConfig& config, LinkSet links) {
  ProblemInstance instance;
  instance.links = std::move(links);
  instance.dims = config.dims;
  instance.fbl.blocklength = config.blocklength;
  instance.fbl.epsilon = config.epsilon;
  instance.fbl.noise_power = config.noise_power;
  instance.power.p_static = config.p_static;
  instance.power.beta = config.beta;
  instance.power.p_budget = config.p_budget;
  instance.power.weights = RealVector::Constant(config.dims.n_users, config.weight);
  instance.power.rate_floors = RealVector::Constant(config.dims.n_users, config.rate_floor);
  return instance;
}

AOConfig make_ao_config(const RunConfig& config, std::uint64_t seed) {
  AOConfig ao;
  ao.max_outer = config.max_outer;
  ao.tol_outer = config.tol_outer;
  ao.seed = seed;
  ao.ms_split = config.ms_split;
  ao.solver.max_inner = config.solver_max_inner;
  ao.solver.tol_kkt = config.solver_tol_kkt;
  return ao;
}

TrialRecord run_trial(const RunConfig& config, Method method, std::uint64_t seed) {
  try {
    const ScenarioConfig scenario = materialize_scenario(config, seed);
    LinkSet links = sample_links(scenario, seed);
    ProblemInstance instance = make_instance(config, std::move(links));
    const AOConfig ao = make_ao_config(config, seed);
    const SolveTrace trace = run_baseline(method, std::move(instance), ao);

    TrialRecord rec;
    rec.method = method;
    rec.seed = seed;
    rec.outer_iters = trace.outer_iterations();
    rec.wall_clock_s = trace.wall_clock_s;
    rec.power_used = trace.final_gammas.total_power();
    rec.ris_power =
        trace.final_ris.theta_r.squaredNorm() + trace.final_ris.theta_t.squaredNorm();
    const IterationRecord& last = trace.iterations.back();
    rec.rates = last.rates;

    // Displayed efficiency clamps negative rates at zero; the optimizer always
    // saw the raw values.
    PowerParams power;
    power.p_static = config.p_static;
    power.beta = config.beta;
    power.p_budget = config.p_budget;
    power.weights = RealVector::Constant(config.dims.n_users, config.weight);
    power.rate_floors = RealVector::Constant(config.dims.n_users, config.rate_floor);
    double ee = 0.0;
    for (int k = 0; k < config.dims.n_users; ++k)
      ee += power.weights(k) *
            energy_efficiency(std::max(last.rates(k), 0.0),
                              trace.final_gammas.gamma[static_cast<std::size_t>(k)], power);
    rec.sum_ee_nats = ee;
    rec.sum_ee_bits = ee / std::numbers::ln2;

    const double floor_slack = 1e-6;
    rec.feasible = !trace.infeasible &&
                   rec.power_used <= config.p_budget * (1.0 + 1e-8) + 1e-12 &&
                   last.ris_residual <= 1e-8 &&
                   ((last.rates.array() + floor_slack) >= config.rate_floor).all();
    return rec;
  } catch (const std::exception& e) {
    throw std::runtime_error("trial(method=" + std::string(method_name(method)) +
                             ", seed=" + std::to_string(seed) + "): " + e.what());
  }
}

namespace {

RunConfig with_axis_value(RunConfig config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::StaticPower:
      config.p_static = value;
      break;
    case SweepAxis::Blocklength:
      config.blocklength = static_cast<int>(value);
      break;
    case SweepAxis::Epsilon:
      config.epsilon = value;
      break;
    case SweepAxis::RisElements:
      config.dims.n_ris = static_cast<int>(value);
      break;
  }
  return config;
}

}  // namespace

std::vector<TrialRecord> sweep(const SweepSpec& spec, const RunConfig& config) {
  spec.validate();
  struct Task {
    double value;
    Method method;
    int trial;
  };
  std::vector<Task> tasks;
  for (double value : spec.values)
    for (Method method : spec.methods)
      for (int trial = 0; trial < spec.n_trials; ++trial) tasks.push_back({value, method, trial});

  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers =
      std::min<std::size_t>(spec.jobs > 0 ? static_cast<std::size_t>(spec.jobs) : hw,
                            tasks.size());

  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const RunConfig cfg = with_axis_value(config, spec.axis, task.value);
      const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(task.trial);
      TrialRecord rec;
      try {
        rec = run_trial(cfg, task.method, seed);
      } catch (const std::exception& e) {
        rec.method = task.method;
        rec.seed = seed;
        rec.feasible = false;
        rec.error = e.what();
        rec.rates = RealVector::Zero(cfg.dims.n_users);
      }
      rec.axis = axis_name(spec.axis);
      rec.axis_value = task.value;
      rec.trial_index = task.trial;
      records[i] = std::move(rec);
    }
  };

  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(work);
    for (auto& t : workers) t.join();
  }
  return records;
}

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_csv(const std::vector<TrialRecord>& records) {
  const int k_users = records.empty() ? 0 : static_cast<int>(records.front().rates.size());
  std::ostringstream os;
  os << "method,axis,axis_value,trial,seed,sum_ee_nats_per_j,sum_ee_bits_per_j,outer_iters,"
        "power_used_w,ris_power,feasible,error";
  for (int k = 0; k < k_users; ++k) os << ",rate" << k << "_nats";
  os << "\n";
  for (const auto& rec : records) {
    os << method_name(rec.method) << ',' << rec.axis << ',' << fmt9(rec.axis_value) << ','
       << rec.trial_index << ',' << rec.seed << ',' << fmt9(rec.sum_ee_nats) << ','
       << fmt9(rec.sum_ee_bits) << ',' << rec.outer_iters << ',' << fmt9(rec.power_used) << ','
       << fmt9(rec.ris_power) << ',' << (rec.feasible ? 1 : 0) << ',' << rec.error;
    for (int k = 0; k < k_users; ++k)
      os << ',' << fmt9(k < rec.rates.size() ? rec.rates(k) : 0.0);
    os << "\n";
  }
  return os.str();
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open for writing: " + path);
  out << to_csv(records);
  if (!out) throw std::runtime_error("emit_csv: write failed: " + path);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file: " + path);
  const auto header = split_csv_line(line);
  constexpr int kFixed = 12;
  if (header.size() < kFixed) throw std::runtime_error("read_csv: unexpected header: " + path);
  const int k_users = static_cast<int>(header.size()) - kFixed;

  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != kFixed + k_users)
      throw std::runtime_error("read_csv: malformed row: " + line);
    TrialRecord rec;
    rec.method = parse_method(f[0]);
    rec.axis = f[1];
    rec.axis_value = std::stod(f[2]);
    rec.trial_index = std::stoi(f[3]);
    rec.seed = std::stoull(f[4]);
    rec.sum_ee_nats = std::stod(f[5]);
    rec.sum_ee_bits = std::stod(f[6]);
    rec.outer_iters = std::stoi(f[7]);
    rec.power_used = std::stod(f[8]);
    rec.ris_power = std::stod(f[9]);
    rec.feasible = f[10] == "1";
    rec.error = f[11];
    rec.rates = RealVector::Zero(k_users);
    for (int k = 0; k < k_users; ++k) rec.rates(k) = std::stod(f[static_cast<std::size_t>(kFixed + k)]);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<PlotRow> aggregate_plotdata(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate_plotdata: empty table");
  std::vector<PlotRow> rows;
  auto find_row = [&](const TrialRecord& rec) -> PlotRow& {
    for (auto& row : rows)
      if (row.axis_value == rec.axis_value && row.method == rec.method) return row;
    PlotRow row;
    row.axis = rec.axis;
    row.axis_value = rec.axis_value;
    row.method = rec.method;
    rows.push_back(row);
    return rows.back();
  };

  // streaming mean pass
  for (const auto& rec : records) {
    PlotRow& row = find_row(rec);
    row.count += 1;
    row.mean_nats += (rec.sum_ee_nats - row.mean_nats) / row.count;
    row.mean_bits += (rec.sum_ee_bits - row.mean_bits) / row.count;
  }
  // second pass for the spread
  std::vector<double> ss_nats(rows.size(), 0.0), ss_bits(rows.size(), 0.0);
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].axis_value == rec.axis_value && rows[i].method == rec.method) {
        ss_nats[i] += (rec.sum_ee_nats - rows[i].mean_nats) * (rec.sum_ee_nats - rows[i].mean_nats);
        ss_bits[i] += (rec.sum_ee_bits - rows[i].mean_bits) * (rec.sum_ee_bits - rows[i].mean_bits);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].count > 1) {
      const double n = rows[i].count;
      rows[i].stderr_nats = std::sqrt(ss_nats[i] / (n - 1.0)) / std::sqrt(n);
      rows[i].stderr_bits = std::sqrt(ss_bits[i] / (n - 1.0)) / std::sqrt(n);
    }
  }
  return rows;
}

void emit_plotdata(const std::vector<PlotRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plotdata: cannot open for writing: " + path);
  out << "axis,axis_value,method,mean_ee_nats_per_j,stderr_nats,mean_ee_bits_per_j,stderr_bits,"
         "trials\n";
  for (const auto& row : rows) {
    out << row.axis << ',' << fmt9(row.axis_value) << ',' << method_name(row.method) << ','
        << fmt9(row.mean_nats) << ',' << fmt9(row.stderr_nats) << ',' << fmt9(row.mean_bits)
        << ',' << fmt9(row.stderr_bits) << ',' << row.count << "\n";
  }
  if (!out) throw std::runtime_error("emit_plotdata: write failed: " + path);
}

std::string TrialRecord::to_string() const {
  std::ostringstream os;
  os << "method        " << method_name(method) << "\n"
     << "seed          " << seed << "\n"
     << "sum EE        " << sum_ee_nats << " nats/J  (" << sum_ee_bits << " bit/J)\n"
     << "rates (nats) ";
  for (Eigen::Index k = 0; k < rates.size(); ++k) os << ' ' << rates(k);
  os << "\n"
     << "outer iters   " << outer_iters << "\n"
     << "power used    " << power_used << " W\n"
     << "surface power " << ris_power << "\n"
     << "feasible      " << (feasible ? "yes" : "no") << "\n"
     << "wall clock    " << wall_clock_s << " s\n";
  if (!error.empty()) os << "error         " << error << "\n";
  return os.str();
}

}  // namespace staree
