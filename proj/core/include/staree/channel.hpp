#pragma once

#include "staree/linalg.hpp"
#include "staree/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace staree {

struct Dimensions {
  int n_bs = 1;       // transmit antennas at the base station
  int n_u = 1;        // receive antennas per user
  int n_users = 1;    // users served in the broadcast channel
  int n_ris = 0;      // surface elements (0 means the surface is absent)
  int n_streams = 1;  // data streams per user, at most min(n_bs, n_u)

  void validate() const;
};

enum class RisMode { EnergySplitting, ModeSwitching };
enum class Side { Reflection, Refraction };

/// State of the transmissive-reflective surface: per-element reflection and
/// refraction coefficients, constrained by |theta_r|^2 + |theta_t|^2 <= 1.
struct RISProfile {
  RisMode mode = RisMode::EnergySplitting;
  ComplexVector theta_r;  // length M
  ComplexVector theta_t;  // length M
  int m_g = 0;            // ModeSwitching split: elements [0, m_g) reflect, [m_g, M) refract

  int elements() const { return static_cast<int>(theta_r.size()); }
};

struct RisViolation {
  int element = 0;
  std::string kind;  // "ball" or "mask"
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<RisViolation> violations;
  bool feasible() const { return violations.empty(); }
  std::string to_string() const;
};

/// One draw of all physical channels plus each user's side assignment.
struct LinkSet {
  ComplexMatrix g;                // M x N_BS, base station -> surface
  std::vector<ComplexMatrix> f;   // per user, N_u x M, surface -> user
  std::vector<ComplexMatrix> d;   // per user, N_u x N_BS, direct path
  std::vector<Side> side;

  int users() const { return static_cast<int>(f.size()); }
};

enum class LinkClass { Direct = 0, BsRis = 1, RisUser = 2 };

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct ScenarioConfig {
  Dimensions dims;
  Position bs_position{0.0, 0.0};
  Position ris_position{50.0, 10.0};
  std::vector<Position> user_positions;

  double ricean_factor = 3.0;  // linear, for the surface-involved links
  std::array<double, 3> pathloss_exponent{3.75, 2.2, 2.2};   // indexed by LinkClass
  std::array<double, 3> pathloss_ref_db{30.0, 30.0, 30.0};   // loss at 1 m
  double noise_power = 3.9810717055349693e-13;               // watts (-94 dBm)
  double antenna_gain_db = 0.0;
  double blockage_db = 0.0;  // extra direct-path loss for refraction-side users

  void validate() const;
};

/// 10^(-(ref_db + 10 e log10(d) - gain_db)/10); strictly decreasing in d.
double pathloss_linear_gain(double distance_m, LinkClass cls, const ScenarioConfig& scenario);

/// Effective channel of user k: H_k = F_k diag(theta) G + D_k, with theta
/// picked from the user's side.
ComplexMatrix compose_channel(const LinkSet& links, const RISProfile& ris, int k);

/// Lists every element violating the per-element energy ball or the
/// ModeSwitching mask. Empty report <=> feasible.
ValidationReport validate_ris(const RISProfile& ris, double tol_feas = 1e-8);

/// Draws one LinkSet: G and F_k Rician around the geometric line-of-sight
/// component, D_k Rayleigh, all scaled by sqrt of the link's path-loss gain.
/// Pure function of (scenario, seed).
LinkSet sample_links(const ScenarioConfig& scenario, std::uint64_t seed);

double distance(const Position& a, const Position& b);

/// A user sits in the reflection space iff it is on the same side of the
/// surface plane (the horizontal through ris_position) as the base station.
Side side_of_user(const ScenarioConfig& scenario, int k);

}  // namespace staree
