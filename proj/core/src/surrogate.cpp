#include "staree/surrogate.hpp"

#include "staree/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace staree {

ExpansionPoint make_expansion_point(const LinkSet& links, const RISProfile& ris,
                                    const BeamformerSet& gammas) {
  ExpansionPoint point;
  point.gammas = gammas;
  point.ris = ris;
  point.channels.reserve(static_cast<std::size_t>(links.users()));
  for (int k = 0; k < links.users(); ++k)
    point.channels.push_back(compose_channel(links, ris, k));
  return point;
}

SurrogateCoeffs build_coeffs(const ExpansionPoint& point, const FBLParams& fbl, int k) {
  fbl.validate();
  const ComplexMatrix& h = point.channels[static_cast<std::size_t>(k)];
  const BeamformerSet& gn = point.gammas;
  const int n_users = gn.users();
  const Eigen::Index nu = h.rows();
  const double sigma2 = fbl.noise_power;

  ComplexMatrix s = sigma2 * ComplexMatrix::Identity(nu, nu);
  ComplexMatrix w = ComplexMatrix::Zero(nu, nu);
  std::vector<ComplexMatrix> hg(static_cast<std::size_t>(n_users));
  for (int j = 0; j < n_users; ++j) {
    hg[static_cast<std::size_t>(j)] = h * gn.gamma[static_cast<std::size_t>(j)];
    const ComplexMatrix wj =
        hermitize(hg[static_cast<std::size_t>(j)] * hg[static_cast<std::size_t>(j)].adjoint());
    if (j == k)
      w = wj;
    else
      s += wj;
  }
  s = hermitize(s);
  const ComplexMatrix t = hermitize(s + w);
  if (!all_finite(s) || !all_finite(t))
    throw DimensionError("covariance", "non-finite intermediate while building coefficients");

  const double shannon = logdet_pd(t) - logdet_pd(s);
  const double eta = std::max(0.0, 2.0 * trace_real(solve_pd(t, w)));
  const double qinv = qfunc_inv(fbl.epsilon);
  const double sqrt_l = std::sqrt(static_cast<double>(fbl.blocklength));
  const int n_streams = static_cast<int>(gn.gamma[static_cast<std::size_t>(k)].cols());

  SurrogateCoeffs coeffs;
  coeffs.user = k;
  coeffs.eta = eta;
  coeffs.expansion_rate = shannon - qinv * std::sqrt(eta) / sqrt_l;

  const ComplexMatrix s_inv = solve_pd(s, ComplexMatrix::Identity(nu, nu));
  const ComplexMatrix t_inv = solve_pd(t, ComplexMatrix::Identity(nu, nu));

  // Below the eta floor the dispersion penalty and its linearization are
  // dropped for this user (they sit under sqrt(eta) in denominators).
  const bool with_dispersion = eta >= kEtaMin;
  const double q_scale = with_dispersion ? qinv / (sqrt_l * std::sqrt(eta)) : 0.0;

  coeffs.a_mat.resize(static_cast<std::size_t>(n_users));
  for (int j = 0; j < n_users; ++j) {
    if (j == k)
      coeffs.a_mat[static_cast<std::size_t>(j)] = s_inv * hg[static_cast<std::size_t>(j)];
    else
      coeffs.a_mat[static_cast<std::size_t>(j)] =
          q_scale * (t_inv * hg[static_cast<std::size_t>(j)]);
  }
  coeffs.b_mat = hermitize(q_scale * (t_inv * s * t_inv) + s_inv - t_inv);

  coeffs.a = shannon - trace_real(s_inv * w);
  if (with_dispersion)
    coeffs.a -= qinv * (eta + 2.0 * n_streams) / (2.0 * sqrt_l * std::sqrt(eta));

  return recalibrate_constant(std::move(coeffs), point, fbl);
}

SurrogateCoeffs recalibrate_constant(SurrogateCoeffs coeffs, const ExpansionPoint& point,
                                     const FBLParams& fbl) {
  const ComplexMatrix& h = point.channels[static_cast<std::size_t>(coeffs.user)];
  const double at_point = eval_bound_in_gamma(coeffs, h, point.gammas, fbl.noise_power);
  const double offset = coeffs.expansion_rate - at_point;
  coeffs.a += offset;
  coeffs.recal_offset += offset;
  return coeffs;
}

double eval_bound_in_gamma(const SurrogateCoeffs& coeffs, const ComplexMatrix& h_k,
                           const BeamformerSet& gammas, double sigma2) {
  if (static_cast<int>(coeffs.a_mat.size()) != gammas.users())
    throw DimensionError("SurrogateCoeffs", "coefficient/user count mismatch");
  const Eigen::Index nu = h_k.rows();
  double value = coeffs.a - sigma2 * trace_real(coeffs.b_mat);
  for (int j = 0; j < gammas.users(); ++j) {
    const ComplexMatrix hg = h_k * gammas.gamma[static_cast<std::size_t>(j)];
    value += 2.0 * (coeffs.a_mat[static_cast<std::size_t>(j)].cwiseProduct(hg.conjugate()))
                       .sum()
                       .real();
    value -= (hg.adjoint() * coeffs.b_mat * hg).trace().real();
  }
  if (nu != coeffs.b_mat.rows()) throw DimensionError("H_k", "row count must match b_mat");
  return value;
}

double eval_bound_in_theta(const SurrogateCoeffs& coeffs, const BeamformerSet& gammas_fixed,
                           const LinkSet& links, const RISProfile& ris, double sigma2) {
  const ComplexMatrix h = compose_channel(links, ris, coeffs.user);
  return eval_bound_in_gamma(coeffs, h, gammas_fixed, sigma2);
}

double QuadraticSurrogate::value(const RealVector& x) const {
  return constant + 2.0 * linear.dot(x) - x.dot(quad * x);
}

RealVector QuadraticSurrogate::gradient(const RealVector& x) const {
  return 2.0 * linear - 2.0 * (quad * x);
}

QuadraticSurrogate gamma_surrogate_form(const SurrogateCoeffs& coeffs, const ComplexMatrix& h_k,
                                        double sigma2, int n_bs, int n_streams, int n_users) {
  const int block = 2 * n_bs * n_streams;
  QuadraticSurrogate form;
  form.constant = coeffs.a - sigma2 * trace_real(coeffs.b_mat);
  form.linear = RealVector::Zero(static_cast<Eigen::Index>(block) * n_users);
  form.quad = RealMatrix::Zero(form.linear.size(), form.linear.size());

  const ComplexMatrix core = hermitize(h_k.adjoint() * coeffs.b_mat * h_k);
  const RealMatrix block_quad = realify_form(kron_identity_left(n_streams, core));
  for (int j = 0; j < n_users; ++j) {
    form.linear.segment(static_cast<Eigen::Index>(j) * block, block) =
        realify_vec(h_k.adjoint() * coeffs.a_mat[static_cast<std::size_t>(j)]);
    form.quad.block(static_cast<Eigen::Index>(j) * block, static_cast<Eigen::Index>(j) * block,
                    block, block) = block_quad;
  }
  return form;
}

QuadraticSurrogate theta_surrogate_form(const SurrogateCoeffs& coeffs,
                                        const BeamformerSet& gammas_fixed, const LinkSet& links,
                                        int k, double sigma2) {
  const int m = static_cast<int>(links.g.rows());
  const ComplexMatrix& fk = links.f[static_cast<std::size_t>(k)];
  const ComplexMatrix& dk = links.d[static_cast<std::size_t>(k)];
  const int n_users = gammas_fixed.users();

  // Everything is expressed through the affine channel H(theta) = D + F diag(theta) G
  // of the user's own side; the other side never enters.
  ComplexMatrix r_sum = ComplexMatrix::Zero(links.g.cols(), links.g.cols());
  ComplexMatrix c_sum = ComplexMatrix::Zero(fk.rows(), links.g.cols());
  for (int j = 0; j < n_users; ++j) {
    const ComplexMatrix& gj = gammas_fixed.gamma[static_cast<std::size_t>(j)];
    r_sum += gj * gj.adjoint();
    c_sum += coeffs.a_mat[static_cast<std::size_t>(j)] * gj.adjoint();
  }
  r_sum = hermitize(r_sum);

  // Complex quadratic in the side's theta:  2 Re(theta^H v1) - 2 Re(theta^T w) - theta^H Mq theta.
  ComplexVector v1(m), w_vec(m);
  const ComplexMatrix rd_b = r_sum * dk.adjoint() * coeffs.b_mat;  // N_BS x N_u
  for (int e = 0; e < m; ++e) {
    const ComplexVector f_col = fk.col(e);
    const Eigen::RowVectorXcd g_row = links.g.row(e);
    v1(e) = (f_col.adjoint() * c_sum * g_row.conjugate().transpose())(0, 0);
    w_vec(e) = (g_row * rd_b * f_col)(0, 0);
  }
  const ComplexMatrix mq =
      (fk.adjoint() * coeffs.b_mat * fk)
          .cwiseProduct((links.g * r_sum * links.g.adjoint()).transpose());

  const double const_term = coeffs.a + 2.0 * (c_sum.cwiseProduct(dk.conjugate())).sum().real() -
                            sigma2 * trace_real(coeffs.b_mat) -
                            (dk.adjoint() * coeffs.b_mat * dk * r_sum).trace().real();

  // Embed the side-specific form into the full stacked vector [theta_r; theta_t].
  const int offset = links.side[static_cast<std::size_t>(k)] == Side::Reflection ? 0 : m;
  ComplexVector v1_full = ComplexVector::Zero(2 * m), w_full = ComplexVector::Zero(2 * m);
  ComplexMatrix mq_full = ComplexMatrix::Zero(2 * m, 2 * m);
  v1_full.segment(offset, m) = v1;
  w_full.segment(offset, m) = w_vec;
  mq_full.block(offset, offset, m, m) = mq;

  QuadraticSurrogate form;
  form.constant = const_term;
  form.linear = RealVector::Zero(4 * m);
  form.linear.head(2 * m) = (v1_full - w_full).real();
  form.linear.tail(2 * m) = (v1_full + w_full).imag();
  form.quad = realify_form(mq_full);
  return form;
}

std::string MinorizationReport::to_string() const {
  std::ostringstream os;
  os << "minorization check: " << (pass ? "PASS" : "FAIL") << "\n"
     << "  precoder samples          " << samples_gamma << "\n"
     << "  surface samples           " << samples_theta << "\n"
     << "  max(bound - rate), precoder " << max_excess_gamma << " (tol " << tol_excess << ")\n"
     << "  max(bound - rate), surface  " << max_excess_theta << " (tol " << tol_excess << ")\n"
     << "  gradient mismatch at point  " << max_gradient_mismatch << " (tol " << tol_gradient
     << ")\n"
     << "  tangency error at point     " << tangency_error << "\n";
  return os.str();
}

namespace {

RISProfile perturb_ris(const RISProfile& base, double radius, StreamRng& rng) {
  RISProfile out = base;
  const int m = base.elements();
  for (int e = 0; e < m; ++e) {
    out.theta_r(e) += radius * rng.cnormal();
    out.theta_t(e) += radius * rng.cnormal();
  }
  if (base.mode == RisMode::ModeSwitching) {
    for (int e = 0; e < m; ++e) {
      if (e < base.m_g)
        out.theta_t(e) = 0.0;
      else
        out.theta_r(e) = 0.0;
    }
  }
  for (int e = 0; e < m; ++e) {
    const double energy = std::norm(out.theta_r(e)) + std::norm(out.theta_t(e));
    if (energy > 1.0) {
      const double scale = 1.0 / std::sqrt(energy);
      out.theta_r(e) *= scale;
      out.theta_t(e) *= scale;
    }
  }
  return out;
}

}  // namespace

MinorizationReport check_minorization(const ExpansionPoint& point, const LinkSet& links,
                                      const FBLParams& fbl, int n_samples, double radius,
                                      std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("check_minorization: n_samples must be >= 1");
  const int n_users = point.gammas.users();
  MinorizationReport report;

  std::vector<SurrogateCoeffs> coeffs;
  coeffs.reserve(static_cast<std::size_t>(n_users));
  for (int k = 0; k < n_users; ++k) coeffs.push_back(build_coeffs(point, fbl, k));

  for (int k = 0; k < n_users; ++k) {
    const double r = rate_fbl(point.channels[static_cast<std::size_t>(k)], point.gammas, k, fbl);
    const double rt = eval_bound_in_gamma(coeffs[static_cast<std::size_t>(k)],
                                          point.channels[static_cast<std::size_t>(k)],
                                          point.gammas, fbl.noise_power);
    report.tangency_error =
        std::max(report.tangency_error, std::abs(rt - r) / (1.0 + std::abs(r)));
  }

  // Precoder neighborhood.
  StreamRng rng_g(seed, "minorization/gamma");
  for (int s = 0; s < n_samples; ++s) {
    BeamformerSet perturbed = point.gammas;
    for (int j = 0; j < n_users; ++j) {
      ComplexMatrix noise(perturbed.gamma[static_cast<std::size_t>(j)].rows(),
                          perturbed.gamma[static_cast<std::size_t>(j)].cols());
      for (Eigen::Index c = 0; c < noise.cols(); ++c)
        for (Eigen::Index rr = 0; rr < noise.rows(); ++rr) noise(rr, c) = rng_g.cnormal();
      const double base_norm = perturbed.gamma[static_cast<std::size_t>(j)].norm();
      const double scale = (base_norm > 0 ? base_norm : 1.0) * radius / noise.norm();
      perturbed.gamma[static_cast<std::size_t>(j)] += scale * noise;
    }
    for (int k = 0; k < n_users; ++k) {
      const double r =
          rate_fbl(point.channels[static_cast<std::size_t>(k)], perturbed, k, fbl);
      const double rt = eval_bound_in_gamma(coeffs[static_cast<std::size_t>(k)],
                                            point.channels[static_cast<std::size_t>(k)],
                                            perturbed, fbl.noise_power);
      report.max_excess_gamma = std::max(report.max_excess_gamma, rt - r);
    }
    ++report.samples_gamma;
  }

  // Surface neighborhood (only meaningful when elements exist).
  if (point.ris.elements() > 0) {
    StreamRng rng_t(seed, "minorization/theta");
    for (int s = 0; s < n_samples; ++s) {
      const RISProfile perturbed = perturb_ris(point.ris, radius, rng_t);
      for (int k = 0; k < n_users; ++k) {
        const ComplexMatrix h = compose_channel(links, perturbed, k);
        const double r = rate_fbl(h, point.gammas, k, fbl);
        const double rh = eval_bound_in_theta(coeffs[static_cast<std::size_t>(k)], point.gammas,
                                              links, perturbed, fbl.noise_power);
        report.max_excess_theta = std::max(report.max_excess_theta, rh - r);
      }
      ++report.samples_theta;
    }
  }

  // First-order agreement at the point, against central differences of the
  // true rate in the stacked real precoder variables.
  const int n_bs = static_cast<int>(point.gammas.gamma[0].rows());
  const int n_streams = static_cast<int>(point.gammas.gamma[0].cols());
  const int block = 2 * n_bs * n_streams;
  RealVector x0(static_cast<Eigen::Index>(block) * n_users);
  for (int j = 0; j < n_users; ++j)
    x0.segment(static_cast<Eigen::Index>(j) * block, block) =
        realify_vec(point.gammas.gamma[static_cast<std::size_t>(j)]);

  auto rate_at = [&](const RealVector& x, int k) {
    BeamformerSet g = point.gammas;
    for (int j = 0; j < n_users; ++j)
      g.gamma[static_cast<std::size_t>(j)] =
          unrealify_vec(x.segment(static_cast<Eigen::Index>(j) * block, block), n_bs, n_streams);
    return rate_fbl(point.channels[static_cast<std::size_t>(k)], g, k, fbl);
  };

  const double step = 1e-5;
  for (int k = 0; k < n_users; ++k) {
    const QuadraticSurrogate form = gamma_surrogate_form(
        coeffs[static_cast<std::size_t>(k)], point.channels[static_cast<std::size_t>(k)],
        fbl.noise_power, n_bs, n_streams, n_users);
    const RealVector analytic = form.gradient(x0);
    RealVector fd(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      RealVector xp = x0, xm = x0;
      xp(i) += step;
      xm(i) -= step;
      fd(i) = (rate_at(xp, k) - rate_at(xm, k)) / (2.0 * step);
    }
    const double denom = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    report.max_gradient_mismatch =
        std::max(report.max_gradient_mismatch, (analytic - fd).cwiseAbs().maxCoeff() / denom);
  }

  report.pass = report.max_excess_gamma <= report.tol_excess &&
                report.max_excess_theta <= report.tol_excess &&
                report.max_gradient_mismatch <= report.tol_gradient &&
                report.tangency_error <= 1e-10;
  return report;
}

}  // namespace staree
