#include "staree/fbl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace staree {

void FBLParams::validate() const {
  if (blocklength < 1) throw std::invalid_argument("FBLParams: blocklength must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("FBLParams: epsilon must lie in (0, 0.5)");
  if (!(noise_power > 0.0)) throw std::invalid_argument("FBLParams: noise_power must be > 0");
}

void PowerParams::validate(int n_users) const {
  if (!(p_static > 0.0)) throw std::invalid_argument("PowerParams: p_static must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("PowerParams: beta must be > 0");
  if (!(p_budget > 0.0)) throw std::invalid_argument("PowerParams: p_budget must be > 0");
  if (weights.size() != n_users || rate_floors.size() != n_users)
    throw std::invalid_argument("PowerParams: weights/rate_floors must have n_users entries");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("PowerParams: weights must be > 0");
  if ((rate_floors.array() < 0.0).any())
    throw std::invalid_argument("PowerParams: rate_floors must be >= 0");
}

double BeamformerSet::total_power() const {
  double p = 0.0;
  for (const auto& g : gamma) p += g.squaredNorm();
  return p;
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double qfunc_inv(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("qfunc_inv: argument must lie in (0, 1)");
  if (epsilon == 0.5) return 0.0;
  const bool flip = epsilon > 0.5;
  const double e = flip ? 1.0 - epsilon : epsilon;

  // Newton on Q(x) - e with a bisection bracket as a safety net.
  double lo = 0.0, hi = 45.0;
  double x = std::sqrt(std::max(0.0, -2.0 * std::log(2.0 * e)));
  for (int it = 0; it < 200; ++it) {
    const double f = qfunc(x) - e;
    if (f > 0)
      lo = x;
    else
      hi = x;
    const double phi =
        std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double step = phi > 0.0 ? f / phi : 0.0;
    double next = x + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return flip ? -x : x;
}

namespace {

struct CovPair {
  ComplexMatrix s;  // interference plus noise
  ComplexMatrix t;  // total received covariance
  ComplexMatrix w;  // own-signal covariance
};

CovPair covariances(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("noise power must be > 0");
  require_finite(h_k, "H_k");
  const Eigen::Index nu = h_k.rows();
  CovPair cov;
  cov.s = sigma2 * ComplexMatrix::Identity(nu, nu);
  for (int i = 0; i < gammas.users(); ++i) {
    require_finite(gammas.gamma[static_cast<std::size_t>(i)], "Gamma_" + std::to_string(i));
    const ComplexMatrix hg = h_k * gammas.gamma[static_cast<std::size_t>(i)];
    const ComplexMatrix wi = hermitize(hg * hg.adjoint());
    if (i == k)
      cov.w = wi;
    else
      cov.s += wi;
  }
  if (cov.w.size() == 0) cov.w = ComplexMatrix::Zero(nu, nu);
  cov.s = hermitize(cov.s);
  cov.t = hermitize(cov.s + cov.w);
  return cov;
}

}  // namespace

double shannon_term(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k, double sigma2) {
  const CovPair cov = covariances(h_k, gammas, k, sigma2);
  return logdet_pd(cov.t) - logdet_pd(cov.s);
}

double dispersion_arg(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k,
                      double sigma2) {
  const CovPair cov = covariances(h_k, gammas, k, sigma2);
  const double eta = 2.0 * trace_real(solve_pd(cov.t, cov.w));
  return std::max(0.0, eta);
}

double rate_fbl(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k,
                const FBLParams& params) {
  params.validate();
  const double shannon = shannon_term(h_k, gammas, k, params.noise_power);
  const double eta = dispersion_arg(h_k, gammas, k, params.noise_power);
  return shannon - qfunc_inv(params.epsilon) * std::sqrt(eta) /
                       std::sqrt(static_cast<double>(params.blocklength));
}

double energy_efficiency(double rate, const ComplexMatrix& gamma_k, const PowerParams& power) {
  if (!(power.p_static > 0.0)) throw std::invalid_argument("energy_efficiency: p_static must be > 0");
  return rate / (power.p_static + power.beta * gamma_k.squaredNorm());
}

double sum_weighted_ee(const std::vector<ComplexMatrix>& channels, const BeamformerSet& gammas,
                       const FBLParams& fbl, const PowerParams& power) {
  if (static_cast<int>(channels.size()) != gammas.users())
    throw DimensionError("channels", "one channel per user expected");
  double acc = 0.0;
  for (int k = 0; k < gammas.users(); ++k) {
    const double r = rate_fbl(channels[static_cast<std::size_t>(k)], gammas, k, fbl);
    acc += power.weights(k) *
           energy_efficiency(r, gammas.gamma[static_cast<std::size_t>(k)], power);
  }
  return acc;
}

}  // namespace staree
