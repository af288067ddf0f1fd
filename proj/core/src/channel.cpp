#include "staree/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace staree {

void Dimensions::validate() const {
  if (n_bs < 1 || n_u < 1 || n_users < 1 || n_streams < 1)
    throw std::invalid_argument("Dimensions: antenna/user/stream counts must be >= 1");
  if (n_ris < 0) throw std::invalid_argument("Dimensions: n_ris must be >= 0");
  if (n_streams > std::min(n_bs, n_u))
    throw std::invalid_argument("Dimensions: n_streams must not exceed min(n_bs, n_u)");
}

void ScenarioConfig::validate() const {
  dims.validate();
  if (ricean_factor < 0) throw std::invalid_argument("ScenarioConfig: ricean_factor must be >= 0");
  if (noise_power <= 0) throw std::invalid_argument("ScenarioConfig: noise_power must be > 0");
  for (double e : pathloss_exponent)
    if (e <= 0) throw std::invalid_argument("ScenarioConfig: path-loss exponents must be > 0");
  if (static_cast<int>(user_positions.size()) != dims.n_users)
    throw std::invalid_argument("ScenarioConfig: user_positions must have n_users entries");
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  if (feasible()) {
    os << "feasible\n";
    return os.str();
  }
  for (const auto& v : violations)
    os << "element " << v.element << " " << v.kind << " violation, magnitude " << v.magnitude
       << "\n";
  return os.str();
}

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double pathloss_linear_gain(double distance_m, LinkClass cls, const ScenarioConfig& scenario) {
  if (!(distance_m > 0)) throw std::invalid_argument("pathloss_linear_gain: distance must be > 0");
  const auto i = static_cast<std::size_t>(cls);
  const double loss_db = scenario.pathloss_ref_db[i] +
                         10.0 * scenario.pathloss_exponent[i] * std::log10(distance_m) -
                         scenario.antenna_gain_db;
  return std::pow(10.0, -loss_db / 10.0);
}

ComplexMatrix compose_channel(const LinkSet& links, const RISProfile& ris, int k) {
  if (k < 0 || k >= links.users()) throw DimensionError("k", "user index out of range");
  const ComplexMatrix& fk = links.f[static_cast<std::size_t>(k)];
  const ComplexMatrix& dk = links.d[static_cast<std::size_t>(k)];
  const Eigen::Index m = links.g.rows();
  if (fk.cols() != m) throw DimensionError("F_k", "column count must equal surface element count");
  if (dk.rows() != fk.rows()) throw DimensionError("D_k", "row count must equal N_u of F_k");
  if (dk.cols() != links.g.cols()) throw DimensionError("D_k", "column count must equal N_BS of G");
  if (ris.theta_r.size() != m || ris.theta_t.size() != m)
    throw DimensionError("RISProfile", "coefficient vectors must have length M");

  const ComplexVector& theta =
      links.side[static_cast<std::size_t>(k)] == Side::Reflection ? ris.theta_r : ris.theta_t;
  return fk * theta.asDiagonal() * links.g + dk;
}

ValidationReport validate_ris(const RISProfile& ris, double tol_feas) {
  ValidationReport report;
  const int m = ris.elements();
  if (ris.theta_t.size() != m)
    throw DimensionError("RISProfile", "theta_r and theta_t must have equal length");
  for (int i = 0; i < m; ++i) {
    const double energy = std::norm(ris.theta_r(i)) + std::norm(ris.theta_t(i));
    if (energy > 1.0 + tol_feas)
      report.violations.push_back({i, "ball", energy - 1.0});
  }
  if (ris.mode == RisMode::ModeSwitching) {
    for (int i = 0; i < m; ++i) {
      const bool reflect_group = i < ris.m_g;
      const double off = reflect_group ? std::abs(ris.theta_t(i)) : std::abs(ris.theta_r(i));
      if (off > tol_feas) report.violations.push_back({i, "mask", off});
    }
  }
  return report;
}

namespace {

// Steering phases of a half-wavelength uniform linear array laid along the
// x-axis: per-element phase pi * n * (unit direction . x-axis).
ComplexVector steering(int n, const Position& from, const Position& to) {
  const double d = distance(from, to);
  const double cosine = (to.x - from.x) / d;
  ComplexVector a(n);
  for (int i = 0; i < n; ++i) {
    const double phase = std::numbers::pi * i * cosine;
    a(i) = Complex(std::cos(phase), std::sin(phase));
  }
  return a;
}

ComplexMatrix rician(int rows, int cols, const ComplexVector& a_rx, const ComplexVector& a_tx,
                     double kappa, double gain, StreamRng& rng) {
  const double w_los = std::sqrt(kappa / (1.0 + kappa));
  const double w_sct = std::sqrt(1.0 / (1.0 + kappa));
  ComplexMatrix h(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      h(r, c) = w_los * a_rx(r) * std::conj(a_tx(c)) + w_sct * rng.cnormal();
  return std::sqrt(gain) * h;
}

}  // namespace

Side side_of_user(const ScenarioConfig& scenario, int k) {
  const double plane_y = scenario.ris_position.y;
  const double bs_side = scenario.bs_position.y - plane_y;
  const double user_side = scenario.user_positions[static_cast<std::size_t>(k)].y - plane_y;
  // boundary users count as reflection-space
  return (bs_side * user_side >= 0.0) ? Side::Reflection : Side::Refraction;
}

LinkSet sample_links(const ScenarioConfig& scenario, std::uint64_t seed) {
  scenario.validate();
  const Dimensions& dims = scenario.dims;

  const double d_bs_ris = distance(scenario.bs_position, scenario.ris_position);
  if (dims.n_ris > 0 && d_bs_ris == 0.0)
    throw std::invalid_argument("sample_links: BS and surface positions coincide");

  LinkSet links;
  links.f.resize(static_cast<std::size_t>(dims.n_users));
  links.d.resize(static_cast<std::size_t>(dims.n_users));
  links.side.resize(static_cast<std::size_t>(dims.n_users));

  if (dims.n_ris > 0) {
    const double gain_g = pathloss_linear_gain(d_bs_ris, LinkClass::BsRis, scenario);
    const ComplexVector a_ris = steering(dims.n_ris, scenario.ris_position, scenario.bs_position);
    const ComplexVector a_bs = steering(dims.n_bs, scenario.bs_position, scenario.ris_position);
    StreamRng rng_g(seed, "links/G");
    links.g = rician(dims.n_ris, dims.n_bs, a_ris, a_bs, scenario.ricean_factor, gain_g, rng_g);
  } else {
    links.g = ComplexMatrix::Zero(0, dims.n_bs);
  }

  for (int k = 0; k < dims.n_users; ++k) {
    const Position& pu = scenario.user_positions[static_cast<std::size_t>(k)];
    const double d_direct = distance(scenario.bs_position, pu);
    if (d_direct == 0.0)
      throw std::invalid_argument("sample_links: BS and user positions coincide");
    links.side[static_cast<std::size_t>(k)] = side_of_user(scenario, k);

    double gain_d = pathloss_linear_gain(d_direct, LinkClass::Direct, scenario);
    if (links.side[static_cast<std::size_t>(k)] == Side::Refraction)
      gain_d *= std::pow(10.0, -scenario.blockage_db / 10.0);
    StreamRng rng_d(seed, "links/D[" + std::to_string(k) + "]");
    ComplexMatrix dk(dims.n_u, dims.n_bs);
    for (Eigen::Index c = 0; c < dk.cols(); ++c)
      for (Eigen::Index r = 0; r < dk.rows(); ++r) dk(r, c) = rng_d.cnormal();
    links.d[static_cast<std::size_t>(k)] = std::sqrt(gain_d) * dk;

    if (dims.n_ris > 0) {
      const double d_ris_user = distance(scenario.ris_position, pu);
      if (d_ris_user == 0.0)
        throw std::invalid_argument("sample_links: surface and user positions coincide");
      const double gain_f = pathloss_linear_gain(d_ris_user, LinkClass::RisUser, scenario);
      const ComplexVector a_user = steering(dims.n_u, pu, scenario.ris_position);
      const ComplexVector a_ris_tx = steering(dims.n_ris, scenario.ris_position, pu);
      StreamRng rng_f(seed, "links/F[" + std::to_string(k) + "]");
      links.f[static_cast<std::size_t>(k)] =
          rician(dims.n_u, dims.n_ris, a_user, a_ris_tx, scenario.ricean_factor, gain_f, rng_f);
    } else {
      links.f[static_cast<std::size_t>(k)] = ComplexMatrix::Zero(dims.n_u, 0);
    }
  }
  return links;
}

}  // namespace staree
