#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace staree {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Shape/finiteness error that names the offending operand.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::string operand, const std::string& message)
      : std::invalid_argument(operand + ": " + message), operand_(std::move(operand)) {}
  const std::string& operand() const noexcept { return operand_; }

 private:
  std::string operand_;
};

bool all_finite(const ComplexMatrix& a);
bool all_finite(const RealVector& a);
void require_finite(const ComplexMatrix& a, const std::string& operand);

/// (A + A^H)/2, suppresses round-off asymmetry before factorizations.
ComplexMatrix hermitize(const ComplexMatrix& a);

/// log det of a Hermitian positive-definite matrix via Cholesky.
/// A failed factorization gets one retry with diagonal jitter
/// 1e-12 * trace/N before giving up.
double logdet_pd(const ComplexMatrix& a);

/// Solves A X = B for Hermitian positive-definite A (same jitter policy).
ComplexMatrix solve_pd(const ComplexMatrix& a, const ComplexMatrix& b);

double trace_real(const ComplexMatrix& a);

/// Stacked real embedding of a complex matrix: [Re vec(M); Im vec(M)].
RealVector realify_vec(const ComplexMatrix& m);
ComplexMatrix unrealify_vec(const RealVector& x, int rows, int cols);
RealVector realify_cvec(const ComplexVector& v);
ComplexVector unrealify_cvec(const RealVector& x);

/// Real symmetric matrix representing the Hermitian form v^H Q v over
/// x = [Re v; Im v]:  [[Re Q, -Im Q], [Im Q, Re Q]].
RealMatrix realify_form(const ComplexMatrix& q);

/// Kronecker product (dense, small operands).
ComplexMatrix kron_identity_left(int copies, const ComplexMatrix& q);

}  // namespace staree
