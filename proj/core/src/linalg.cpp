#include "staree/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace staree {

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

bool all_finite(const RealVector& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!std::isfinite(a(i))) return false;
  return true;
}

void require_finite(const ComplexMatrix& a, const std::string& operand) {
  if (!all_finite(a)) throw DimensionError(operand, "contains a non-finite entry");
}

ComplexMatrix hermitize(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

namespace {

Eigen::LLT<ComplexMatrix> llt_with_jitter(const ComplexMatrix& a, const char* what) {
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  // sigma^2 > 0 makes these matrices PD in exact arithmetic; jitter only
  // absorbs round-off.
  const double jitter = 1e-12 * trace_real(a) / static_cast<double>(a.rows());
  ComplexMatrix aj = a;
  aj.diagonal().array() += Complex(jitter, 0.0);
  llt.compute(aj);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": Cholesky failed even after diagonal jitter");
  return llt;
}

}  // namespace

double logdet_pd(const ComplexMatrix& a) {
  auto llt = llt_with_jitter(hermitize(a), "logdet_pd");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(llt.matrixL()(i, i).real());
  return 2.0 * acc;
}

ComplexMatrix solve_pd(const ComplexMatrix& a, const ComplexMatrix& b) {
  auto llt = llt_with_jitter(hermitize(a), "solve_pd");
  return llt.solve(b);
}

double trace_real(const ComplexMatrix& a) { return a.trace().real(); }

RealVector realify_vec(const ComplexMatrix& m) {
  const Eigen::Index n = m.size();
  RealVector x(2 * n);
  const ComplexVector v = Eigen::Map<const ComplexVector>(m.data(), n);
  x.head(n) = v.real();
  x.tail(n) = v.imag();
  return x;
}

ComplexMatrix unrealify_vec(const RealVector& x, int rows, int cols) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows) * cols;
  ComplexVector v(n);
  v.real() = x.head(n);
  v.imag() = x.tail(n);
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

RealVector realify_cvec(const ComplexVector& v) {
  RealVector x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

ComplexVector unrealify_cvec(const RealVector& x) {
  const Eigen::Index n = x.size() / 2;
  ComplexVector v(n);
  v.real() = x.head(n);
  v.imag() = x.tail(n);
  return v;
}

RealMatrix realify_form(const ComplexMatrix& q) {
  const Eigen::Index n = q.rows();
  RealMatrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = q.real();
  r.topRightCorner(n, n) = -q.imag();
  r.bottomLeftCorner(n, n) = q.imag();
  r.bottomRightCorner(n, n) = q.real();
  return 0.5 * (r + r.transpose());
}

ComplexMatrix kron_identity_left(int copies, const ComplexMatrix& q) {
  const Eigen::Index n = q.rows(), m = q.cols();
  ComplexMatrix out = ComplexMatrix::Zero(copies * n, copies * m);
  for (int c = 0; c < copies; ++c) out.block(c * n, c * m, n, m) = q;
  return out;
}

}  // namespace staree
