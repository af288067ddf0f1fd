#include "staree/qcqp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace staree {

namespace {

void check_spectrum(const RealMatrix& m, bool want_psd, const std::string& what) {
  if (m.size() == 0) return;
  if (m.rows() != m.cols()) throw std::invalid_argument(what + ": matrix must be square");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (m + m.transpose()),
                                               Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  if (want_psd && es.eigenvalues().minCoeff() < -tol)
    throw std::invalid_argument(what + ": matrix must be positive semidefinite");
  if (!want_psd && es.eigenvalues().maxCoeff() > tol)
    throw std::invalid_argument(what + ": matrix must be negative semidefinite");
}

}  // namespace

QcqpProblem::QcqpProblem(RealMatrix q0, RealVector c0, double d0,
                         std::vector<QuadConstraint> constraints, std::vector<BallBlock> balls)
    : q0_(std::move(q0)),
      c0_(std::move(c0)),
      d0_(d0),
      constraints_(std::move(constraints)),
      balls_(std::move(balls)) {
  if (q0_.rows() != c0_.size()) throw std::invalid_argument("QcqpProblem: q0/c0 size mismatch");
  check_spectrum(q0_, /*want_psd=*/false, "objective");
  for (const auto& con : constraints_) {
    if (con.q.rows() != c0_.size() || con.c.size() != c0_.size())
      throw std::invalid_argument("QcqpProblem: constraint size mismatch (" + con.name + ")");
    check_spectrum(con.q, /*want_psd=*/true, "constraint " + con.name);
  }
  std::vector<char> used(static_cast<std::size_t>(c0_.size()), 0);
  for (const auto& ball : balls_) {
    if (!(ball.cap > 0)) throw std::invalid_argument("QcqpProblem: ball cap must be > 0");
    for (int i : ball.idx) {
      if (i < 0 || i >= dim()) throw std::invalid_argument("QcqpProblem: ball index out of range");
      if (used[static_cast<std::size_t>(i)])
        throw std::invalid_argument("QcqpProblem: overlapping ball blocks");
      used[static_cast<std::size_t>(i)] = 1;
    }
  }
}

double QcqpProblem::objective(const RealVector& x) const {
  return x.dot(q0_ * x) + 2.0 * c0_.dot(x) + d0_;
}

RealVector QcqpProblem::objective_gradient(const RealVector& x) const {
  return 2.0 * (q0_ * x) + 2.0 * c0_;
}

double QcqpProblem::constraint_violation_value(int i, const RealVector& x) const {
  const auto& con = constraints_[static_cast<std::size_t>(i)];
  return x.dot(con.q * x) + 2.0 * con.c.dot(x) + con.d - con.bound;
}

double QcqpProblem::max_violation(const RealVector& x) const {
  double v = 0.0;
  for (int i = 0; i < static_cast<int>(constraints_.size()); ++i)
    v = std::max(v, constraint_violation_value(i, x));
  for (const auto& ball : balls_) {
    double nrm2 = 0.0;
    for (int idx : ball.idx) nrm2 += x(idx) * x(idx);
    v = std::max(v, nrm2 - ball.cap * ball.cap);
  }
  return v;
}

RealVector project_ball_blocks(RealVector x, const std::vector<BallBlock>& balls) {
  std::vector<char> used(static_cast<std::size_t>(x.size()), 0);
  for (const auto& ball : balls) {
    double nrm2 = 0.0;
    for (int idx : ball.idx) {
      if (used[static_cast<std::size_t>(idx)])
        throw std::invalid_argument("project_ball_blocks: overlapping blocks");
      used[static_cast<std::size_t>(idx)] = 1;
      nrm2 += x(idx) * x(idx);
    }
    const double nrm = std::sqrt(nrm2);
    if (nrm > ball.cap) {
      const double scale = ball.cap / nrm;
      for (int idx : ball.idx) x(idx) *= scale;
    }
  }
  return x;
}

namespace {

double feas_tol_for(const QcqpProblem& p) {
  double scale = 1.0;
  for (const auto& con : p.constraints()) scale = std::max(scale, std::abs(con.bound));
  for (const auto& ball : p.balls()) scale = std::max(scale, ball.cap * ball.cap);
  return 1e-8 * (1.0 + scale);
}

bool is_feasible(const QcqpProblem& p, const RealVector& x, double tol) {
  return p.max_violation(x) <= tol;
}

/// Largest t in [0,1] with x0 + t (x - x0) feasible; the constraint set is
/// convex and x0 feasible, so bisection applies.
RealVector pull_to_feasible(const QcqpProblem& p, const RealVector& x0, const RealVector& x,
                            double tol) {
  if (is_feasible(p, x, tol)) return x;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_feasible(p, x0 + mid * (x - x0), tol))
      lo = mid;
    else
      hi = mid;
  }
  return x0 + lo * (x - x0);
}

struct AugmentedLagrangian {
  const QcqpProblem& p;
  const RealVector& lambda;
  double rho;

  double value(const RealVector& x) const {
    double v = p.objective(x);
    for (int i = 0; i < static_cast<int>(p.constraints().size()); ++i) {
      const double g = p.constraint_violation_value(i, x);
      const double t = std::max(0.0, lambda(i) + rho * g);
      v -= (t * t - lambda(i) * lambda(i)) / (2.0 * rho);
    }
    return v;
  }

  RealVector gradient(const RealVector& x) const {
    RealVector grad = p.objective_gradient(x);
    for (int i = 0; i < static_cast<int>(p.constraints().size()); ++i) {
      const double g = p.constraint_violation_value(i, x);
      const double t = std::max(0.0, lambda(i) + rho * g);
      if (t > 0.0) {
        const auto& con = p.constraints()[static_cast<std::size_t>(i)];
        grad -= t * (2.0 * (con.q * x) + 2.0 * con.c);
      }
    }
    return grad;
  }
};

struct InnerResult {
  RealVector x;
  int iterations = 0;
  double prox_residual = 0.0;
};

/// Monotone spectral projected-gradient ascent over the ball-block feasible
/// set: Barzilai-Borwein step lengths, Armijo backtracking as the safeguard.
template <typename Phi>
InnerResult projected_gradient(const QcqpProblem& p, const Phi& phi, RealVector x, double tol,
                               int budget, double step_hint, std::ofstream* trace) {
  InnerResult res;
  double step = step_hint;
  double phi_x = phi.value(x);
  RealVector grad = phi.gradient(x);
  RealVector x_prev, grad_prev;
  for (int it = 0; it < budget; ++it) {
    // Prox residual at the reference step; scale-free stopping.
    const RealVector ref = project_ball_blocks(x + step_hint * grad, p.balls());
    res.prox_residual = (ref - x).norm() / step_hint;
    if (trace && trace->is_open())
      (*trace) << it << '\t' << phi_x << '\t' << res.prox_residual << '\n';
    if (res.prox_residual <= tol) {
      res.iterations = it;
      res.x = std::move(x);
      return res;
    }

    // Spectral step from the last displacement pair.
    double t = step;
    if (x_prev.size() == x.size()) {
      const RealVector s = x - x_prev;
      const RealVector dg = grad - grad_prev;
      const double sy = -s.dot(dg);  // >= 0 for a concave phi
      const double ss = s.squaredNorm();
      if (sy > 1e-300 && ss > 0.0) t = std::min(std::max(ss / sy, 1e-8 * step_hint), 1e8 * step_hint);
    }

    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      RealVector y = project_ball_blocks(x + t * grad, p.balls());
      const double gain = grad.dot(y - x);
      const double phi_y = phi.value(y);
      if (phi_y >= phi_x + 1e-4 * gain && phi_y > phi_x) {
        x_prev = std::move(x);
        grad_prev = grad;
        x = std::move(y);
        phi_x = phi_y;
        grad = phi.gradient(x);
        step = t;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      res.iterations = it + 1;
      res.x = std::move(x);
      return res;
    }
  }
  res.iterations = budget;
  res.x = std::move(x);
  return res;
}

Multipliers estimate_multipliers(const QcqpProblem& p, const RealVector& x,
                                 const RealVector& lambda) {
  Multipliers mult;
  mult.quad = lambda;
  mult.ball = RealVector::Zero(static_cast<Eigen::Index>(p.balls().size()));
  RealVector r = p.objective_gradient(x);
  for (int i = 0; i < static_cast<int>(p.constraints().size()); ++i) {
    const auto& con = p.constraints()[static_cast<std::size_t>(i)];
    r -= lambda(i) * (2.0 * (con.q * x) + 2.0 * con.c);
  }
  for (int b = 0; b < static_cast<int>(p.balls().size()); ++b) {
    const auto& ball = p.balls()[static_cast<std::size_t>(b)];
    double nrm2 = 0.0, dot = 0.0;
    for (int idx : ball.idx) {
      nrm2 += x(idx) * x(idx);
      dot += r(idx) * x(idx);
    }
    if (nrm2 >= ball.cap * ball.cap * (1.0 - 1e-7) && nrm2 > 0.0)
      mult.ball(b) = std::max(0.0, dot / (2.0 * nrm2));
  }
  return mult;
}

}  // namespace

double kkt_residual(const QcqpProblem& problem, const RealVector& x, const Multipliers& mult) {
  RealVector stationarity = problem.objective_gradient(x);
  double complementarity = 0.0;
  for (int i = 0; i < static_cast<int>(problem.constraints().size()); ++i) {
    const auto& con = problem.constraints()[static_cast<std::size_t>(i)];
    const double lam = mult.quad.size() > i ? mult.quad(i) : 0.0;
    stationarity -= lam * (2.0 * (con.q * x) + 2.0 * con.c);
    complementarity =
        std::max(complementarity, std::abs(lam * problem.constraint_violation_value(i, x)));
  }
  for (int b = 0; b < static_cast<int>(problem.balls().size()); ++b) {
    const auto& ball = problem.balls()[static_cast<std::size_t>(b)];
    const double mu = mult.ball.size() > b ? mult.ball(b) : 0.0;
    double nrm2 = 0.0;
    for (int idx : ball.idx) nrm2 += x(idx) * x(idx);
    for (int idx : ball.idx) stationarity(idx) -= mu * 2.0 * x(idx);
    complementarity = std::max(complementarity, std::abs(mu * (nrm2 - ball.cap * ball.cap)));
  }
  const double stat = stationarity.size() ? stationarity.cwiseAbs().maxCoeff() : 0.0;
  return std::max({stat, complementarity, problem.max_violation(x)});
}

QcqpSolution maximize(const QcqpProblem& problem, const RealVector& x0,
                      const SolverOptions& opts) {
  if (x0.size() != problem.dim())
    throw std::invalid_argument("maximize: x0 dimension mismatch");
  const double tol_feas = feas_tol_for(problem);
  const double tol_kkt =
      opts.tol_kkt > 0 ? opts.tol_kkt : 1e-7 * (1.0 + problem.c0().norm());

  QcqpSolution sol;
  sol.x = x0;
  sol.objective_value = problem.objective(x0);
  sol.multipliers.quad = RealVector::Zero(static_cast<Eigen::Index>(problem.constraints().size()));
  sol.multipliers.ball = RealVector::Zero(static_cast<Eigen::Index>(problem.balls().size()));

  if (!is_feasible(problem, x0, tol_feas)) {
    sol.status = SolveStatus::Infeasible;
    sol.kkt_residual = problem.max_violation(x0);
    return sol;
  }

  std::ofstream trace;
  if (!opts.trace_path.empty()) trace.open(opts.trace_path);

  // Step hint from the objective curvature; keeps behaviour invariant under
  // positive rescaling of the objective.
  double curvature = problem.q0().size() ? problem.q0().cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  for (const auto& con : problem.constraints())
    curvature = std::max(curvature, con.q.cwiseAbs().rowwise().sum().maxCoeff());
  const double step_hint = 1.0 / std::max(2.0 * curvature, 1e-6);

  const double f0 = problem.objective(x0);
  RealVector x = project_ball_blocks(x0, problem.balls());
  RealVector lambda =
      RealVector::Zero(static_cast<Eigen::Index>(problem.constraints().size()));
  double rho = opts.rho0;
  int used = 0;
  double prev_violation = std::numeric_limits<double>::infinity();

  RealVector best_x = x0;
  double best_f = f0;
  Multipliers best_mult = sol.multipliers;
  double best_kkt = kkt_residual(problem, x0, best_mult);
  bool converged = false;

  const int rounds = problem.constraints().empty() ? 1 : opts.max_al_rounds;
  for (int round = 0; round < rounds && used < opts.max_inner; ++round) {
    AugmentedLagrangian al{problem, lambda, rho};
    const double inner_tol = std::max(0.25 * tol_kkt, 1e-12);
    InnerResult inner = projected_gradient(problem, al, x, inner_tol, opts.max_inner - used,
                                           step_hint, trace.is_open() ? &trace : nullptr);
    used += inner.iterations;
    x = std::move(inner.x);

    double violation = 0.0;
    for (int i = 0; i < lambda.size(); ++i) {
      const double g = problem.constraint_violation_value(i, x);
      violation = std::max(violation, g);
      lambda(i) = std::max(0.0, lambda(i) + rho * g);
    }

    const RealVector candidate = pull_to_feasible(problem, x0, x, tol_feas);
    const double f_candidate = problem.objective(candidate);
    if (f_candidate >= best_f) {
      best_x = candidate;
      best_f = f_candidate;
      best_mult = estimate_multipliers(problem, candidate, lambda);
      best_kkt = kkt_residual(problem, candidate, best_mult);
    }
    if (best_kkt <= tol_kkt) {
      converged = true;
      break;
    }
    if (!problem.constraints().empty()) {
      if (violation > 0.25 * prev_violation) rho = std::min(rho * 10.0, 1e12);
      prev_violation = std::max(violation, 0.0);
    }
  }

  sol.x = best_x;
  sol.objective_value = best_f;
  sol.multipliers = best_mult;
  sol.kkt_residual = best_kkt;
  sol.iterations = used;
  sol.status = converged ? SolveStatus::Converged
                         : (best_kkt <= tol_kkt ? SolveStatus::Converged : SolveStatus::MaxIter);
  return sol;
}

}  // namespace staree
