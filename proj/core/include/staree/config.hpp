#pragma once

#include "staree/channel.hpp"

#include <string>

namespace staree {

/// Everything a simulation run needs, loadable from a flat key = value file
/// (SI units throughout; decibel quantities carry a _db suffix).
struct RunConfig {
  Dimensions dims{2, 2, 6, 60, 2};

  // geometry, meters; users are drawn per trial inside a disc, half of them
  // mirrored across the surface plane into the refraction space
  Position bs_position{0.0, 0.0};
  Position ris_position{50.0, 10.0};
  double user_disc_x = 45.0;
  double user_disc_y = 0.0;
  double user_disc_radius = 10.0;

  // propagation
  double ricean_factor = 3.0;
  double pl_exp_direct = 3.75;
  double pl_exp_bs_ris = 2.2;
  double pl_exp_ris_user = 2.2;
  double pl_ref_db_direct = 30.0;
  double pl_ref_db_bs_ris = 30.0;
  double pl_ref_db_ris_user = 30.0;
  double antenna_gain_db = 0.0;
  double blockage_db = 0.0;
  double noise_power = 3.9810717055349693e-13;  // watts

  // coding
  int blocklength = 256;
  double epsilon = 1e-5;

  // power model
  double p_static = 0.1;
  double beta = 1.0;
  double p_budget = 1.0;
  double weight = 1.0;      // uniform per-user objective weight
  double rate_floor = 0.0;  // uniform per-user minimum rate, nats

  // optimizer
  int max_outer = 50;
  double tol_outer = 1e-4;
  int ms_split = -1;  // ModeSwitching split index; -1 means M/2
  int solver_max_inner = 5000;
  double solver_tol_kkt = -1.0;  // < 0: solver default
};

RunConfig default_config();

/// Parses `key = value` lines; '#' starts a comment; unknown keys are errors.
RunConfig load_config(const std::string& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Serialization that load_config round-trips.
std::string config_to_string(const RunConfig& config);

}  // namespace staree
