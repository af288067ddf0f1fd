#include "staree/ao.hpp"

#include "staree/rng.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace staree {

const char* method_name(Method m) {
  switch (m) {
    case Method::StarES: return "star-es";
    case Method::StarMS: return "star-ms";
    case Method::RisReflective: return "ris";
    case Method::RisRandom: return "ris-rand";
    case Method::NoRis: return "no-ris";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "star-es") return Method::StarES;
  if (name == "star-ms") return Method::StarMS;
  if (name == "ris") return Method::RisReflective;
  if (name == "ris-rand") return Method::RisRandom;
  if (name == "no-ris") return Method::NoRis;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected star-es|star-ms|ris|ris-rand|no-ris)");
}

void ProblemInstance::validate() const {
  dims.validate();
  fbl.validate();
  power.validate(dims.n_users);
  if (links.users() != dims.n_users)
    throw std::invalid_argument("ProblemInstance: links/user count mismatch");
}

RealVector zeta_update(const RealVector& rates, const BeamformerSet& gammas,
                       const PowerParams& power) {
  RealVector zeta(rates.size());
  for (Eigen::Index k = 0; k < rates.size(); ++k) {
    const double denom =
        power.p_static + power.beta * gammas.gamma[static_cast<std::size_t>(k)].squaredNorm();
    zeta(k) = std::sqrt(power.weights(k) * std::max(rates(k), 0.0)) / denom;
  }
  return zeta;
}

RealVector gamma_update(const RealVector& rtilde, const RealVector& weights) {
  RealVector gamma(rtilde.size());
  for (Eigen::Index k = 0; k < rtilde.size(); ++k)
    gamma(k) = std::sqrt(weights(k) * std::max(rtilde(k), 0.0));
  return gamma;
}

namespace {

RISProfile seeded_profile(const ProblemInstance& instance, const AOConfig& config) {
  const int m = instance.dims.n_ris;
  RISProfile ris;
  ris.theta_r = ComplexVector::Zero(m);
  ris.theta_t = ComplexVector::Zero(m);
  StreamRng rng(config.seed, "init/theta");
  auto phase = [&rng]() {
    const double p = 2.0 * std::numbers::pi * rng.uniform();
    return Complex(std::cos(p), std::sin(p));
  };
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  switch (instance.mode) {
    case Method::StarES:
    case Method::RisRandom:
      ris.mode = RisMode::EnergySplitting;
      for (int e = 0; e < m; ++e) {
        ris.theta_r(e) = inv_sqrt2 * phase();
        ris.theta_t(e) = inv_sqrt2 * phase();
      }
      break;
    case Method::StarMS:
      ris.mode = RisMode::ModeSwitching;
      ris.m_g = config.ms_split >= 0 ? config.ms_split : m / 2;
      for (int e = 0; e < m; ++e) {
        if (e < ris.m_g)
          ris.theta_r(e) = phase();
        else
          ris.theta_t(e) = phase();
      }
      break;
    case Method::RisReflective:
      ris.mode = RisMode::ModeSwitching;
      ris.m_g = m;  // every element reflects
      for (int e = 0; e < m; ++e) ris.theta_r(e) = phase();
      break;
    case Method::NoRis:
      ris.mode = RisMode::EnergySplitting;
      break;
  }
  return ris;
}

struct Evaluation {
  std::vector<ComplexMatrix> channels;
  RealVector rates;
  double sum_ee = 0.0;
  double power_used = 0.0;
};

Evaluation evaluate(const AOState& state, const ProblemInstance& instance) {
  Evaluation ev;
  const int k_users = instance.dims.n_users;
  ev.channels.reserve(static_cast<std::size_t>(k_users));
  ev.rates = RealVector::Zero(k_users);
  for (int k = 0; k < k_users; ++k) {
    ev.channels.push_back(compose_channel(instance.links, state.ris, k));
    ev.rates(k) = rate_fbl(ev.channels.back(), state.gammas, k, instance.fbl);
    ev.sum_ee += instance.power.weights(k) *
                 energy_efficiency(ev.rates(k), state.gammas.gamma[static_cast<std::size_t>(k)],
                                   instance.power);
  }
  ev.power_used = state.gammas.total_power();
  return ev;
}

double ris_violation(const RISProfile& ris) {
  double worst = 0.0;
  for (const auto& v : validate_ris(ris, 0.0).violations) worst = std::max(worst, v.magnitude);
  return worst;
}

// Acceptance slack for a block update: tiny relative decrease tolerated to
// absorb round-off, well inside the 1e-6 monotonicity contract.
bool acceptable(double ee_new, double ee_old) {
  return ee_new >= ee_old - 1e-9 * (1.0 + std::abs(ee_old));
}

struct OptState {
  std::vector<SurrogateCoeffs> coeffs;
  std::vector<QuadraticSurrogate> forms;
};

}  // namespace

AOState initial_state(const ProblemInstance& instance, const AOConfig& config) {
  instance.validate();
  AOState state;
  state.ris = config.initial_ris ? *config.initial_ris : seeded_profile(instance, config);
  if (state.ris.elements() != instance.dims.n_ris)
    throw std::invalid_argument("initial_state: surface profile has wrong element count");

  const int k_users = instance.dims.n_users;
  const int streams = instance.dims.n_streams;
  const double per_user = instance.power.p_budget / k_users;
  state.gammas.gamma.resize(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) {
    const ComplexMatrix h = compose_channel(instance.links, state.ris, k);
    Eigen::JacobiSVD<ComplexMatrix> svd(h, Eigen::ComputeFullV);
    ComplexMatrix dirs = svd.matrixV().leftCols(streams);
    state.gammas.gamma[static_cast<std::size_t>(k)] =
        std::sqrt(per_user / streams) * dirs;
  }
  return state;
}

namespace {

OptState build_all(const std::vector<ComplexMatrix>& channels, const BeamformerSet& gammas,
                   const RISProfile& ris, const ProblemInstance& instance) {
  ExpansionPoint point;
  point.gammas = gammas;
  point.ris = ris;
  point.channels = channels;
  OptState os;
  const int k_users = instance.dims.n_users;
  os.coeffs.reserve(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) os.coeffs.push_back(build_coeffs(point, instance.fbl, k));
  return os;
}

}  // namespace

BfStepResult beamforming_step(const AOState& state, const ProblemInstance& instance,
                              const AOConfig& config) {
  const int k_users = instance.dims.n_users;
  const int n_bs = instance.dims.n_bs;
  const int streams = instance.dims.n_streams;
  const int block = 2 * n_bs * streams;
  const int gamma_dim = k_users * block;
  const int dim = gamma_dim + k_users;
  const double sigma2 = instance.fbl.noise_power;

  BfStepResult result;
  result.state = state;

  const Evaluation ev = evaluate(state, instance);
  OptState os = build_all(ev.channels, state.gammas, state.ris, instance);

  // Fractional multipliers at the expansion point; the transform is exact
  // there, which the qt_gap records.
  const RealVector zeta = zeta_update(ev.rates, state.gammas, instance.power);
  RealVector rtilde_point(k_users);
  for (int k = 0; k < k_users; ++k)
    rtilde_point(k) =
        eval_bound_in_gamma(os.coeffs[static_cast<std::size_t>(k)],
                            ev.channels[static_cast<std::size_t>(k)], state.gammas, sigma2);
  const RealVector gamma0 = gamma_update(rtilde_point, instance.power.weights);
  double transform_value = 0.0, ratio_value = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const double denom =
        instance.power.p_static +
        instance.power.beta * state.gammas.gamma[static_cast<std::size_t>(k)].squaredNorm();
    transform_value += 2.0 * zeta(k) * gamma0(k) - zeta(k) * zeta(k) * denom;
    ratio_value += instance.power.weights(k) * std::max(rtilde_point(k), 0.0) / denom;
  }
  result.qt_gap = std::abs(transform_value - ratio_value);
  result.frac.zeta = zeta;
  result.frac.gamma_aux = gamma0;
  result.rtilde_new = rtilde_point;

  // Objective sum_k (2 zeta_k gamma_k - zeta_k^2 (P_s + beta tr(Gamma_k Gamma_k^H))).
  RealMatrix q0 = RealMatrix::Zero(dim, dim);
  RealVector c0 = RealVector::Zero(dim);
  double d0 = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const double curv = zeta(k) * zeta(k) * instance.power.beta;
    q0.block(k * block, k * block, block, block).diagonal().setConstant(-curv);
    c0(gamma_dim + k) = zeta(k);
    d0 -= zeta(k) * zeta(k) * instance.power.p_static;
  }

  std::vector<QuadConstraint> constraints;
  std::vector<QuadraticSurrogate> forms(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) {
    forms[static_cast<std::size_t>(k)] =
        gamma_surrogate_form(os.coeffs[static_cast<std::size_t>(k)],
                             ev.channels[static_cast<std::size_t>(k)], sigma2, n_bs, streams,
                             k_users);
    const auto& form = forms[static_cast<std::size_t>(k)];

    QuadConstraint qos;
    qos.q = RealMatrix::Zero(dim, dim);
    qos.q.topLeftCorner(gamma_dim, gamma_dim) = form.quad;
    qos.c = RealVector::Zero(dim);
    qos.c.head(gamma_dim) = -form.linear;
    qos.bound = form.constant - instance.power.rate_floors(k);
    qos.name = "qos[" + std::to_string(k) + "]";
    constraints.push_back(std::move(qos));

    QuadConstraint couple;
    couple.q = RealMatrix::Zero(dim, dim);
    couple.q.topLeftCorner(gamma_dim, gamma_dim) = instance.power.weights(k) * form.quad;
    couple.q(gamma_dim + k, gamma_dim + k) = 1.0;
    couple.c = RealVector::Zero(dim);
    couple.c.head(gamma_dim) = -instance.power.weights(k) * form.linear;
    couple.bound = instance.power.weights(k) * form.constant;
    couple.name = "transform[" + std::to_string(k) + "]";
    constraints.push_back(std::move(couple));
  }

  std::vector<BallBlock> balls(1);
  balls[0].cap = std::sqrt(instance.power.p_budget);
  balls[0].idx.resize(static_cast<std::size_t>(gamma_dim));
  for (int i = 0; i < gamma_dim; ++i) balls[0].idx[static_cast<std::size_t>(i)] = i;

  QcqpProblem problem(std::move(q0), std::move(c0), d0, std::move(constraints), std::move(balls));

  RealVector x0(dim);
  for (int k = 0; k < k_users; ++k)
    x0.segment(k * block, block) = realify_vec(state.gammas.gamma[static_cast<std::size_t>(k)]);
  x0.tail(k_users) = gamma0;

  const QcqpSolution sol = maximize(problem, x0, config.solver);
  result.status = sol.status;
  if (sol.status == SolveStatus::Infeasible) return result;

  AOState candidate = state;
  for (int k = 0; k < k_users; ++k)
    candidate.gammas.gamma[static_cast<std::size_t>(k)] =
        unrealify_vec(sol.x.segment(k * block, block), n_bs, streams);
  const Evaluation ev_new = evaluate(candidate, instance);
  if (acceptable(ev_new.sum_ee, ev.sum_ee)) {
    result.state = std::move(candidate);
    result.applied = true;
    result.frac.gamma_aux = sol.x.tail(k_users);
    for (int k = 0; k < k_users; ++k)
      result.rtilde_new(k) =
          eval_bound_in_gamma(os.coeffs[static_cast<std::size_t>(k)],
                              ev.channels[static_cast<std::size_t>(k)], result.state.gammas,
                              sigma2);
  }
  return result;
}

namespace {

// Free real coordinates of the surface variables under the mode mask, in the
// stacked layout [Re theta_r; Re theta_t; Im theta_r; Im theta_t].
std::vector<int> free_theta_coords(const RISProfile& ris) {
  const int m = ris.elements();
  std::vector<int> coords;
  for (int e = 0; e < m; ++e) {
    const bool r_free = ris.mode == RisMode::EnergySplitting || e < ris.m_g;
    const bool t_free = ris.mode == RisMode::EnergySplitting || e >= ris.m_g;
    if (r_free) {
      coords.push_back(e);
      coords.push_back(2 * m + e);
    }
    if (t_free) {
      coords.push_back(m + e);
      coords.push_back(3 * m + e);
    }
  }
  return coords;
}

}  // namespace

RisStepResult ris_step(const AOState& state, const ProblemInstance& instance,
                       const AOConfig& config) {
  if (instance.mode == Method::NoRis || instance.mode == Method::RisRandom)
    throw std::logic_error("ris_step: surface is not optimized in this mode");
  const int m = instance.dims.n_ris;
  const int k_users = instance.dims.n_users;
  const double sigma2 = instance.fbl.noise_power;

  RisStepResult result;
  result.ris = state.ris;
  if (m == 0) {
    result.applied = false;
    return result;
  }

  const Evaluation ev = evaluate(state, instance);
  OptState os = build_all(ev.channels, state.gammas, state.ris, instance);

  const std::vector<int> free = free_theta_coords(state.ris);
  const int dim = static_cast<int>(free.size());

  ComplexVector stacked0(2 * m);
  stacked0 << state.ris.theta_r, state.ris.theta_t;
  const RealVector full0 = realify_cvec(stacked0);

  auto reduce_vec = [&](const RealVector& v) {
    RealVector out(dim);
    for (int i = 0; i < dim; ++i) out(i) = v(free[static_cast<std::size_t>(i)]);
    return out;
  };
  auto reduce_mat = [&](const RealMatrix& q) {
    RealMatrix out(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        out(i, j) = q(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    return out;
  };

  RealMatrix q0 = RealMatrix::Zero(dim, dim);
  RealVector c0 = RealVector::Zero(dim);
  double d0 = 0.0;
  std::vector<QuadConstraint> constraints;
  for (int k = 0; k < k_users; ++k) {
    const QuadraticSurrogate form = theta_surrogate_form(
        os.coeffs[static_cast<std::size_t>(k)], state.gammas, instance.links, k, sigma2);
    const double weight =
        instance.power.weights(k) /
        (instance.power.p_static +
         instance.power.beta * state.gammas.gamma[static_cast<std::size_t>(k)].squaredNorm());
    const RealMatrix quad_free = reduce_mat(form.quad);
    const RealVector lin_free = reduce_vec(form.linear);
    q0 -= weight * quad_free;
    c0 += weight * lin_free;
    d0 += weight * form.constant;

    QuadConstraint qos;
    qos.q = quad_free;
    qos.c = -lin_free;
    qos.bound = form.constant - instance.power.rate_floors(k);
    qos.name = "qos[" + std::to_string(k) + "]";
    constraints.push_back(std::move(qos));
  }

  // Per-element energy balls over whichever of the element's coordinates are free.
  std::vector<BallBlock> balls;
  for (int e = 0; e < m; ++e) {
    BallBlock ball;
    ball.cap = 1.0;
    for (int i = 0; i < dim; ++i) {
      const int full = free[static_cast<std::size_t>(i)];
      if (full % m == e) ball.idx.push_back(i);
    }
    if (!ball.idx.empty()) balls.push_back(std::move(ball));
  }

  QcqpProblem problem(std::move(q0), std::move(c0), d0, std::move(constraints), std::move(balls));
  const RealVector x0 = reduce_vec(full0);
  const QcqpSolution sol = maximize(problem, x0, config.solver);
  result.status = sol.status;
  if (sol.status == SolveStatus::Infeasible) return result;

  RealVector full = RealVector::Zero(4 * m);
  for (int i = 0; i < dim; ++i) full(free[static_cast<std::size_t>(i)]) = sol.x(i);
  RISProfile candidate = state.ris;
  const ComplexVector stacked = unrealify_cvec(full);
  candidate.theta_r = stacked.head(m);
  candidate.theta_t = stacked.tail(m);

  AOState cand_state = state;
  cand_state.ris = candidate;
  const Evaluation ev_new = evaluate(cand_state, instance);
  if (acceptable(ev_new.sum_ee, ev.sum_ee)) {
    result.ris = std::move(candidate);
    result.applied = true;
  }
  return result;
}

RestoreStatus feasibility_restore(AOState& state, const ProblemInstance& instance,
                                  const AOConfig& config) {
  const int k_users = instance.dims.n_users;
  const int n_bs = instance.dims.n_bs;
  const int streams = instance.dims.n_streams;
  const int block = 2 * n_bs * streams;
  const int gamma_dim = k_users * block;
  const int dim = gamma_dim + 1;  // [precoders; margin]
  const double sigma2 = instance.fbl.noise_power;

  Evaluation ev = evaluate(state, instance);
  double margin = (ev.rates - instance.power.rate_floors).minCoeff();
  if (margin >= 0.0) return RestoreStatus::NoOp;

  for (int round = 0; round < 30; ++round) {
    OptState os = build_all(ev.channels, state.gammas, state.ris, instance);

    RealMatrix q0 = RealMatrix::Zero(dim, dim);
    RealVector c0 = RealVector::Zero(dim);
    c0(gamma_dim) = 0.5;  // objective: the margin variable itself

    std::vector<QuadConstraint> constraints;
    double surrogate_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_users; ++k) {
      const QuadraticSurrogate form =
          gamma_surrogate_form(os.coeffs[static_cast<std::size_t>(k)],
                               ev.channels[static_cast<std::size_t>(k)], sigma2, n_bs, streams,
                               k_users);
      QuadConstraint con;
      con.q = RealMatrix::Zero(dim, dim);
      con.q.topLeftCorner(gamma_dim, gamma_dim) = form.quad;
      con.c = RealVector::Zero(dim);
      con.c.head(gamma_dim) = -form.linear;
      con.c(gamma_dim) = 0.5;
      con.bound = form.constant - instance.power.rate_floors(k);
      con.name = "margin[" + std::to_string(k) + "]";
      constraints.push_back(std::move(con));
      surrogate_margin =
          std::min(surrogate_margin, os.coeffs[static_cast<std::size_t>(k)].expansion_rate -
                                         instance.power.rate_floors(k));
    }

    std::vector<BallBlock> balls(1);
    balls[0].cap = std::sqrt(instance.power.p_budget);
    balls[0].idx.resize(static_cast<std::size_t>(gamma_dim));
    for (int i = 0; i < gamma_dim; ++i) balls[0].idx[static_cast<std::size_t>(i)] = i;

    QcqpProblem problem(std::move(q0), std::move(c0), 0.0, std::move(constraints),
                        std::move(balls));
    RealVector x0(dim);
    for (int k = 0; k < k_users; ++k)
      x0.segment(k * block, block) =
          realify_vec(state.gammas.gamma[static_cast<std::size_t>(k)]);
    x0(gamma_dim) = surrogate_margin;

    const QcqpSolution sol = maximize(problem, x0, config.solver);
    if (sol.status == SolveStatus::Infeasible) return RestoreStatus::Infeasible;

    AOState candidate = state;
    for (int k = 0; k < k_users; ++k)
      candidate.gammas.gamma[static_cast<std::size_t>(k)] =
          unrealify_vec(sol.x.segment(k * block, block), n_bs, streams);
    const Evaluation ev_new = evaluate(candidate, instance);
    const double new_margin = (ev_new.rates - instance.power.rate_floors).minCoeff();
    const bool improved = new_margin > margin + 1e-9 * (1.0 + std::abs(margin));
    if (new_margin >= margin) {
      state = std::move(candidate);
      ev = ev_new;
      margin = new_margin;
    }
    if (margin >= 0.0) return RestoreStatus::Restored;
    if (!improved) return RestoreStatus::Infeasible;
  }
  return margin >= 0.0 ? RestoreStatus::Restored : RestoreStatus::Infeasible;
}

namespace {

IterationRecord record_of(const Evaluation& ev, const AOState& state) {
  IterationRecord rec;
  rec.sum_ee = ev.sum_ee;
  rec.rates = ev.rates;
  rec.rtilde = ev.rates;  // tangency: the bound coincides at the iterate itself
  rec.power_used = ev.power_used;
  rec.ris_residual = ris_violation(state.ris);
  return rec;
}

bool optimizes_surface(Method mode) {
  return mode == Method::StarES || mode == Method::StarMS || mode == Method::RisReflective;
}

}  // namespace

SolveTrace optimize(const ProblemInstance& instance, const AOConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  instance.validate();
  if (config.max_outer < 0) throw std::invalid_argument("AOConfig: max_outer must be >= 0");
  if (!(config.tol_outer > 0)) throw std::invalid_argument("AOConfig: tol_outer must be > 0");

  SolveTrace trace;
  AOState state = initial_state(instance, config);

  Evaluation ev = evaluate(state, instance);
  const bool needs_restore =
      ((ev.rates - instance.power.rate_floors).array() < 0.0).any();
  if (needs_restore) {
    const RestoreStatus rs = feasibility_restore(state, instance, config);
    if (rs == RestoreStatus::Infeasible) trace.infeasible = true;
    ev = evaluate(state, instance);
  }
  trace.iterations.push_back(record_of(ev, state));

  if (!trace.infeasible) {
    for (int n = 0; n < config.max_outer; ++n) {
      const double prev_ee = ev.sum_ee;
      IterationRecord rec;

      BfStepResult bf = beamforming_step(state, instance, config);
      state = bf.state;
      rec.bf_ran = true;
      rec.bf_applied = bf.applied;
      rec.bf_status = bf.status;
      rec.qt_gap = bf.qt_gap;

      if (optimizes_surface(instance.mode)) {
        RisStepResult rs = ris_step(state, instance, config);
        state.ris = rs.ris;
        rec.ris_ran = true;
        rec.ris_applied = rs.applied;
        rec.ris_status = rs.status;
      }

      ev = evaluate(state, instance);
      rec.sum_ee = ev.sum_ee;
      rec.rates = ev.rates;
      rec.rtilde = bf.rtilde_new;
      rec.power_used = ev.power_used;
      rec.ris_residual = ris_violation(state.ris);
      trace.iterations.push_back(rec);

      if (ev.sum_ee - prev_ee < config.tol_outer * (1.0 + std::abs(prev_ee))) break;
    }
  }

  trace.final_gammas = state.gammas;
  trace.final_ris = state.ris;
  trace.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

SolveTrace run_baseline(Method kind, ProblemInstance instance, const AOConfig& config) {
  instance.mode = kind;
  return optimize(instance, config);
}

std::string SolveTrace::to_delimited() const {
  std::ostringstream os;
  os << "iter\tsum_ee\tpower\tris_residual\tbf_applied\tris_applied\tqt_gap\n";
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const auto& it = iterations[i];
    os << i << '\t' << it.sum_ee << '\t' << it.power_used << '\t' << it.ris_residual << '\t'
       << (it.bf_ran ? (it.bf_applied ? "yes" : "no") : "-") << '\t'
       << (it.ris_ran ? (it.ris_applied ? "yes" : "no") : "-") << '\t' << it.qt_gap << '\n';
  }
  return os.str();
}

}  // namespace staree
