#include "staree/validation.hpp"

#include "staree/rng.hpp"

#include <cmath>
#include <sstream>

namespace staree {

SyntheticInstance random_synthetic_instance(std::uint64_t seed, int max_users, int max_antennas,
                                            int max_elements) {
  StreamRng rng(seed, "synthetic/instance");
  auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  SyntheticInstance inst;
  inst.dims.n_users = pick(1, max_users);
  inst.dims.n_bs = pick(1, max_antennas);
  inst.dims.n_u = pick(1, max_antennas);
  inst.dims.n_streams = std::min(inst.dims.n_bs, inst.dims.n_u);
  inst.dims.n_ris = pick(1, max_elements);
  const int k_users = inst.dims.n_users;
  const int m = inst.dims.n_ris;

  auto fill = [&rng](ComplexMatrix& a) {
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.cnormal();
  };

  inst.links.g = ComplexMatrix(m, inst.dims.n_bs);
  fill(inst.links.g);
  inst.links.f.resize(static_cast<std::size_t>(k_users));
  inst.links.d.resize(static_cast<std::size_t>(k_users));
  inst.links.side.resize(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) {
    inst.links.f[static_cast<std::size_t>(k)] = ComplexMatrix(inst.dims.n_u, m);
    inst.links.d[static_cast<std::size_t>(k)] = ComplexMatrix(inst.dims.n_u, inst.dims.n_bs);
    fill(inst.links.f[static_cast<std::size_t>(k)]);
    fill(inst.links.d[static_cast<std::size_t>(k)]);
    inst.links.side[static_cast<std::size_t>(k)] =
        (rng.next_u64() & 1u) ? Side::Reflection : Side::Refraction;
  }

  inst.ris.mode = RisMode::EnergySplitting;
  inst.ris.theta_r = ComplexVector(m);
  inst.ris.theta_t = ComplexVector(m);
  for (int e = 0; e < m; ++e) {
    Complex r = rng.cnormal(), t = rng.cnormal();
    const double energy = std::norm(r) + std::norm(t);
    const double target = rng.uniform();  // strictly inside the ball
    const double scale = energy > 0 ? std::sqrt(target / energy) : 0.0;
    inst.ris.theta_r(e) = scale * r;
    inst.ris.theta_t(e) = scale * t;
  }

  inst.power.p_budget = 4.0;
  inst.power.p_static = 1.0;
  inst.power.beta = 1.0;
  inst.power.weights = RealVector::Constant(k_users, 1.0);
  inst.power.rate_floors = RealVector::Zero(k_users);

  inst.gammas.gamma.resize(static_cast<std::size_t>(k_users));
  double total = 0.0;
  for (int k = 0; k < k_users; ++k) {
    auto& g = inst.gammas.gamma[static_cast<std::size_t>(k)];
    g = ComplexMatrix(inst.dims.n_bs, inst.dims.n_streams);
    fill(g);
    total += g.squaredNorm();
  }
  const double scale = std::sqrt(inst.power.p_budget / total);
  for (auto& g : inst.gammas.gamma) g *= scale;

  inst.fbl.noise_power = 1.0;
  const int lengths[] = {64, 128, 256, 512, 1024, 2048};
  inst.fbl.blocklength = lengths[rng.next_u64() % 6];
  inst.fbl.epsilon = std::pow(10.0, -2.0 - 5.0 * rng.uniform());  // 1e-7 .. 1e-2
  return inst;
}

bool ValidationSummary::all_pass() const {
  for (const auto& s : suites)
    if (!s.pass) return false;
  return true;
}

std::string ValidationSummary::to_string() const {
  std::ostringstream os;
  for (const auto& s : suites) {
    os << (s.pass ? "[PASS] " : "[FAIL] ") << s.name << ": worst " << s.metric << " (tol "
       << s.tol << ")";
    if (!s.detail.empty()) os << " — " << s.detail;
    os << "\n";
  }
  return os.str();
}

ValidationSummary run_validation_suites(int n_instances, int n_samples, std::uint64_t seed) {
  ValidationSummary summary;

  double worst_tangency = 0.0, worst_excess_g = 0.0, worst_excess_t = 0.0, worst_grad = 0.0;
  std::string worst_report;
  double worst_report_metric = -1.0;
  for (int i = 0; i < n_instances; ++i) {
    const SyntheticInstance inst = random_synthetic_instance(seed + static_cast<std::uint64_t>(i));
    const ExpansionPoint point = make_expansion_point(inst.links, inst.ris, inst.gammas);
    const MinorizationReport rep =
        check_minorization(point, inst.links, inst.fbl, n_samples, 0.5,
                           seed ^ (0x9E37u + static_cast<std::uint64_t>(i)));
    worst_tangency = std::max(worst_tangency, rep.tangency_error);
    worst_excess_g = std::max(worst_excess_g, rep.max_excess_gamma);
    worst_excess_t = std::max(worst_excess_t, rep.max_excess_theta);
    worst_grad = std::max(worst_grad, rep.max_gradient_mismatch);
    const double badness = std::max({rep.tangency_error, rep.max_excess_gamma,
                                     rep.max_excess_theta, rep.max_gradient_mismatch});
    if (badness > worst_report_metric) {
      worst_report_metric = badness;
      worst_report = rep.to_string();
    }
  }
  summary.minorization_report = worst_report;
  summary.suites.push_back({"bound tangency at expansion point", worst_tangency <= 1e-10,
                            worst_tangency, 1e-10, std::to_string(n_instances) + " instances"});
  summary.suites.push_back({"bound minorizes rate (precoder neighborhood)",
                            worst_excess_g <= 1e-9, worst_excess_g, 1e-9,
                            std::to_string(n_samples) + " samples each"});
  summary.suites.push_back({"bound minorizes rate (surface neighborhood)",
                            worst_excess_t <= 1e-9, worst_excess_t, 1e-9, ""});
  summary.suites.push_back(
      {"gradient match at expansion point", worst_grad <= 1e-4, worst_grad, 1e-4, ""});

  // Alternating-optimization ascent and transform exactness on small scenarios.
  double worst_decrease = 0.0, worst_qt = 0.0, worst_residual = 0.0;
  const int n_runs = std::max(2, n_instances / 4);
  for (int i = 0; i < n_runs; ++i) {
    const SyntheticInstance inst = random_synthetic_instance(
        seed + 7000 + static_cast<std::uint64_t>(i), 3, 2, 6);
    ProblemInstance problem;
    problem.links = inst.links;
    problem.dims = inst.dims;
    problem.fbl = inst.fbl;
    problem.power = inst.power;
    problem.mode = Method::StarES;
    AOConfig config;
    config.max_outer = 8;
    config.seed = seed + static_cast<std::uint64_t>(i);
    const SolveTrace trace = optimize(problem, config);
    for (std::size_t n = 1; n < trace.iterations.size(); ++n) {
      const double prev = trace.iterations[n - 1].sum_ee;
      const double cur = trace.iterations[n].sum_ee;
      worst_decrease = std::max(worst_decrease, (prev - cur) / (1.0 + std::abs(prev)));
      worst_qt = std::max(worst_qt, trace.iterations[n].qt_gap);
    }
    worst_residual = std::max(worst_residual, trace.iterations.back().ris_residual);
    worst_residual =
        std::max(worst_residual, trace.final_gammas.total_power() - problem.power.p_budget);
  }
  summary.suites.push_back({"alternating ascent (relative decrease)", worst_decrease <= 1e-6,
                            worst_decrease, 1e-6, std::to_string(n_runs) + " runs"});
  summary.suites.push_back(
      {"fractional transform exactness", worst_qt <= 1e-10, worst_qt, 1e-10, ""});
  summary.suites.push_back(
      {"final iterate feasibility", worst_residual <= 1e-8, worst_residual, 1e-8, ""});
  return summary;
}

}  // namespace staree
