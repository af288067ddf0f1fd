#pragma once

#include "staree/linalg.hpp"

#include <string>
#include <vector>

namespace staree {

/// One convex quadratic constraint  x^T q x + 2 c.x + d <= bound, q PSD.
struct QuadConstraint {
  RealMatrix q;
  RealVector c;
  double d = 0.0;
  double bound = 0.0;
  std::string name;
};

/// Disjoint index group with a Euclidean norm cap ||x_idx|| <= cap.
struct BallBlock {
  std::vector<int> idx;
  double cap = 1.0;
};

/// Maximization of a concave quadratic  f(x) = x^T q0 x + 2 c0.x + d0
/// (q0 negative semidefinite) over convex quadratic constraints and ball
/// blocks. Definiteness of q0 and every constraint is verified at
/// construction (eigenvalue check, tolerance 1e-9 relative).
class QcqpProblem {
 public:
  QcqpProblem() = default;
  QcqpProblem(RealMatrix q0, RealVector c0, double d0, std::vector<QuadConstraint> constraints,
              std::vector<BallBlock> balls);

  int dim() const { return static_cast<int>(c0_.size()); }
  const RealMatrix& q0() const { return q0_; }
  const RealVector& c0() const { return c0_; }
  double d0() const { return d0_; }
  const std::vector<QuadConstraint>& constraints() const { return constraints_; }
  const std::vector<BallBlock>& balls() const { return balls_; }

  double objective(const RealVector& x) const;
  RealVector objective_gradient(const RealVector& x) const;
  /// g_i(x) = quadratic_i(x) - bound_i; feasible iff <= 0.
  double constraint_violation_value(int i, const RealVector& x) const;
  /// Largest positive violation across quadratic constraints and balls.
  double max_violation(const RealVector& x) const;
  double feasibility_tol() const { return tol_feas_; }

 private:
  RealMatrix q0_;
  RealVector c0_;
  double d0_ = 0.0;
  std::vector<QuadConstraint> constraints_;
  std::vector<BallBlock> balls_;
  double tol_feas_ = 1e-8;
};

enum class SolveStatus { Converged, MaxIter, Infeasible };

struct SolverOptions {
  double tol_kkt = -1.0;       // < 0: auto, 1e-7 * (1 + ||c0||)
  int max_inner = 5000;        // total projected-gradient iterations per solve
  int max_al_rounds = 40;      // multiplier updates
  double rho0 = 1.0;           // initial penalty weight
  std::string trace_path;      // non-empty: per-iteration dump (iter, objective, residual)
};

struct Multipliers {
  RealVector quad;  // one per quadratic constraint
  RealVector ball;  // one per ball block
};

struct QcqpSolution {
  RealVector x;
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIter;
  Multipliers multipliers;
};

/// Projected-gradient ascent with backtracking for ball-only problems; an
/// augmented-Lagrangian outer loop around the same inner solver when
/// quadratic constraints are present. Guarantees a feasible result with
/// f(x) >= f(x0) - 1e-12 (1 + |f(x0)|) whenever x0 is feasible.
QcqpSolution maximize(const QcqpProblem& problem, const RealVector& x0,
                      const SolverOptions& opts = {});

/// Max of stationarity infinity-norm, complementarity |lambda_i g_i(x)|, and
/// feasibility violation.
double kkt_residual(const QcqpProblem& problem, const RealVector& x, const Multipliers& mult);

/// Rescales each block onto its cap when its norm exceeds it; idempotent.
RealVector project_ball_blocks(RealVector x, const std::vector<BallBlock>& balls);

}  // namespace staree
