#pragma once

#include "staree/linalg.hpp"

#include <vector>

namespace staree {

struct FBLParams {
  int blocklength = 256;       // codeword length in channel uses
  double epsilon = 1e-5;       // maximum tolerable detection error rate
  double noise_power = 1.0;    // sigma^2 in watts

  void validate() const;
};

struct PowerParams {
  double p_static = 0.1;   // per-user static power, watts
  double beta = 1.0;       // amplifier inefficiency
  double p_budget = 1.0;   // total transmit power budget, watts
  RealVector weights;      // per-user, > 0
  RealVector rate_floors;  // per-user minimum rate, nats

  void validate(int n_users) const;
};

/// Per-user precoders; gamma[k] is N_BS x I.
struct BeamformerSet {
  std::vector<ComplexMatrix> gamma;

  int users() const { return static_cast<int>(gamma.size()); }
  double total_power() const;
};

/// Gaussian tail Q(x) = erfc(x / sqrt 2) / 2.
double qfunc(double x);

/// Inverse of Q on (0, 1); relative accuracy better than 1e-10.
double qfunc_inv(double epsilon);

/// ln det(I + S^-1 H Gamma_k Gamma_k^H H^H), interference treated as noise:
/// S = sigma^2 I + sum_{i != k} H Gamma_i Gamma_i^H H^H. Always >= 0.
double shannon_term(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k, double sigma2);

/// Dispersion argument eta = 2 tr(W_k T^-1) with T = sigma^2 I + sum_i W_i;
/// lies in [0, 2 N_u).
double dispersion_arg(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k, double sigma2);

/// Finite-blocklength achievable rate in nats:
/// shannon - Q^-1(eps) sqrt(eta) / sqrt(l). May be negative; never clamped here.
double rate_fbl(const ComplexMatrix& h_k, const BeamformerSet& gammas, int k,
                const FBLParams& params);

/// rate / (P_s + beta tr(Gamma_k Gamma_k^H)), nats per joule.
double energy_efficiency(double rate, const ComplexMatrix& gamma_k, const PowerParams& power);

/// sum_k alpha_k r_k / (P_s + beta tr(Gamma_k Gamma_k^H)) over all users.
double sum_weighted_ee(const std::vector<ComplexMatrix>& channels, const BeamformerSet& gammas,
                       const FBLParams& fbl, const PowerParams& power);

}  // namespace staree
