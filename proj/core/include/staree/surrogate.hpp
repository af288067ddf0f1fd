#pragma once

#include "staree/channel.hpp"
#include "staree/fbl.hpp"
#include "staree/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace staree {

/// Coefficients of the concave minorizer of one user's finite-blocklength
/// rate, built at an expansion point. The bound has the shape
///   a + 2 sum_j Re tr(A_kj Gamma_j^H H^H)
///     - tr(B (sigma^2 I + sum_j H Gamma_j Gamma_j^H H^H))
/// and is tangent to the true rate at the point (after recalibration).
struct SurrogateCoeffs {
  int user = 0;
  double a = 0.0;                     // additive constant, includes recalibration
  std::vector<ComplexMatrix> a_mat;   // per j: N_u x I
  ComplexMatrix b_mat;                // N_u x N_u, Hermitian PSD
  double eta = 0.0;                   // dispersion argument at the point
  double expansion_rate = 0.0;        // true rate at the point
  double recal_offset = 0.0;          // constant shift applied for exact tangency
};

struct ExpansionPoint {
  BeamformerSet gammas;
  RISProfile ris;
  std::vector<ComplexMatrix> channels;  // composed per user at (gammas, ris)
};

ExpansionPoint make_expansion_point(const LinkSet& links, const RISProfile& ris,
                                    const BeamformerSet& gammas);

/// Dispersion arguments below this drop the dispersion-dependent parts of
/// the coefficients (they sit under sqrt(eta) in denominators).
inline constexpr double kEtaMin = 1e-12;

/// Builds user k's minorizer coefficients at the expansion point and
/// recalibrates the additive constant so the bound touches the rate exactly.
SurrogateCoeffs build_coeffs(const ExpansionPoint& point, const FBLParams& fbl, int k);

/// Replaces the additive constant so the bound equals the true rate at the
/// expansion point; matrix coefficients are untouched and the applied offset
/// is recorded.
SurrogateCoeffs recalibrate_constant(SurrogateCoeffs coeffs, const ExpansionPoint& point,
                                     const FBLParams& fbl);

/// Bound value as a function of the precoders, channels held fixed.
double eval_bound_in_gamma(const SurrogateCoeffs& coeffs, const ComplexMatrix& h_k,
                           const BeamformerSet& gammas, double sigma2);

/// Bound value as a function of the surface state, precoders held fixed;
/// the channel is recomposed from (links, ris).
double eval_bound_in_theta(const SurrogateCoeffs& coeffs, const BeamformerSet& gammas_fixed,
                           const LinkSet& links, const RISProfile& ris, double sigma2);

/// Concave quadratic c + 2 b.x - x^T Q x with Q PSD, over stacked real
/// variables. The common currency between the minorizers and the solver.
struct QuadraticSurrogate {
  double constant = 0.0;
  RealVector linear;  // b
  RealMatrix quad;    // Q, positive semidefinite

  double value(const RealVector& x) const;
  RealVector gradient(const RealVector& x) const;
};

/// Minorizer of user k's rate as a quadratic in the stacked real embedding of
/// all precoders [x_1; ...; x_K], x_j = [Re vec Gamma_j; Im vec Gamma_j].
QuadraticSurrogate gamma_surrogate_form(const SurrogateCoeffs& coeffs, const ComplexMatrix& h_k,
                                        double sigma2, int n_bs, int n_streams, int n_users);

/// Minorizer of user k's rate as a quadratic in the stacked real embedding of
/// the surface coefficients [Re theta_r; Re theta_t; Im theta_r; Im theta_t]
/// (a length-4M real vector; the user's unused side contributes zeros).
QuadraticSurrogate theta_surrogate_form(const SurrogateCoeffs& coeffs,
                                        const BeamformerSet& gammas_fixed, const LinkSet& links,
                                        int k, double sigma2);

struct MinorizationReport {
  int samples_gamma = 0;
  int samples_theta = 0;
  double max_excess_gamma = 0.0;  // max over samples of bound - rate
  double max_excess_theta = 0.0;
  double max_gradient_mismatch = 0.0;  // at the expansion point, relative
  double tangency_error = 0.0;         // |bound - rate| at the point, relative
  double tol_excess = 1e-9;
  double tol_gradient = 1e-4;
  bool pass = false;

  std::string to_string() const;
};

/// Samples feasible perturbations around the point (relative radius in the
/// precoders, per-element-ball projected steps in the surface state) and
/// verifies the bound never exceeds the rate and gradients agree at the point.
MinorizationReport check_minorization(const ExpansionPoint& point, const LinkSet& links,
                                      const FBLParams& fbl, int n_samples, double radius,
                                      std::uint64_t seed);

}  // namespace staree
