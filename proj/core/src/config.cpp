#include "staree/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace staree {

RunConfig default_config() { return RunConfig{}; }

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("config key '" + key + "': trailing junk in '" + v + "'");
  return out;
}

int parse_int(const std::string& v, const std::string& key) {
  const double d = parse_double(v, key);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + v + "'");
  return i;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_bs", [](RunConfig& c, const std::string& k, const std::string& v) { c.dims.n_bs = parse_int(v, k); }},
      {"n_u", [](RunConfig& c, const std::string& k, const std::string& v) { c.dims.n_u = parse_int(v, k); }},
      {"n_users", [](RunConfig& c, const std::string& k, const std::string& v) { c.dims.n_users = parse_int(v, k); }},
      {"n_ris", [](RunConfig& c, const std::string& k, const std::string& v) { c.dims.n_ris = parse_int(v, k); }},
      {"n_streams", [](RunConfig& c, const std::string& k, const std::string& v) { c.dims.n_streams = parse_int(v, k); }},
      {"bs_x", [](RunConfig& c, const std::string& k, const std::string& v) { c.bs_position.x = parse_double(v, k); }},
      {"bs_y", [](RunConfig& c, const std::string& k, const std::string& v) { c.bs_position.y = parse_double(v, k); }},
      {"ris_x", [](RunConfig& c, const std::string& k, const std::string& v) { c.ris_position.x = parse_double(v, k); }},
      {"ris_y", [](RunConfig& c, const std::string& k, const std::string& v) { c.ris_position.y = parse_double(v, k); }},
      {"user_disc_x", [](RunConfig& c, const std::string& k, const std::string& v) { c.user_disc_x = parse_double(v, k); }},
      {"user_disc_y", [](RunConfig& c, const std::string& k, const std::string& v) { c.user_disc_y = parse_double(v, k); }},
      {"user_disc_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.user_disc_radius = parse_double(v, k); }},
      {"ricean_factor", [](RunConfig& c, const std::string& k, const std::string& v) { c.ricean_factor = parse_double(v, k); }},
      {"pl_exp_direct", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_exp_direct = parse_double(v, k); }},
      {"pl_exp_bs_ris", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_exp_bs_ris = parse_double(v, k); }},
      {"pl_exp_ris_user", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_exp_ris_user = parse_double(v, k); }},
      {"pl_ref_db_direct", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_ref_db_direct = parse_double(v, k); }},
      {"pl_ref_db_bs_ris", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_ref_db_bs_ris = parse_double(v, k); }},
      {"pl_ref_db_ris_user", [](RunConfig& c, const std::string& k, const std::string& v) { c.pl_ref_db_ris_user = parse_double(v, k); }},
      {"antenna_gain_db", [](RunConfig& c, const std::string& k, const std::string& v) { c.antenna_gain_db = parse_double(v, k); }},
      {"blockage_db", [](RunConfig& c, const std::string& k, const std::string& v) { c.blockage_db = parse_double(v, k); }},
      {"noise_power", [](RunConfig& c, const std::string& k, const std::string& v) { c.noise_power = parse_double(v, k); }},
      {"blocklength", [](RunConfig& c, const std::string& k, const std::string& v) { c.blocklength = parse_int(v, k); }},
      {"epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.epsilon = parse_double(v, k); }},
      {"p_static", [](RunConfig& c, const std::string& k, const std::string& v) { c.p_static = parse_double(v, k); }},
      {"beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.beta = parse_double(v, k); }},
      {"p_budget", [](RunConfig& c, const std::string& k, const std::string& v) { c.p_budget = parse_double(v, k); }},
      {"weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.weight = parse_double(v, k); }},
      {"rate_floor", [](RunConfig& c, const std::string& k, const std::string& v) { c.rate_floor = parse_double(v, k); }},
      {"max_outer", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_outer = parse_int(v, k); }},
      {"tol_outer", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_outer = parse_double(v, k); }},
      {"ms_split", [](RunConfig& c, const std::string& k, const std::string& v) { c.ms_split = parse_int(v, k); }},
      {"solver_max_inner", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver_max_inner = parse_int(v, k); }},
      {"solver_tol_kkt", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver_tol_kkt = parse_double(v, k); }},
  };
  return table;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(config, key, trim(value));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  RunConfig config = default_config();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    apply_override(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return config;
}

std::string config_to_string(const RunConfig& c) {
  std::ostringstream os;
  os << "# dimensions\n"
     << "n_bs = " << c.dims.n_bs << "\n"
     << "n_u = " << c.dims.n_u << "\n"
     << "n_users = " << c.dims.n_users << "\n"
     << "n_ris = " << c.dims.n_ris << "\n"
     << "n_streams = " << c.dims.n_streams << "\n"
     << "\n# geometry (meters)\n"
     << "bs_x = " << fmt(c.bs_position.x) << "\n"
     << "bs_y = " << fmt(c.bs_position.y) << "\n"
     << "ris_x = " << fmt(c.ris_position.x) << "\n"
     << "ris_y = " << fmt(c.ris_position.y) << "\n"
     << "user_disc_x = " << fmt(c.user_disc_x) << "\n"
     << "user_disc_y = " << fmt(c.user_disc_y) << "\n"
     << "user_disc_radius = " << fmt(c.user_disc_radius) << "\n"
     << "\n# propagation\n"
     << "ricean_factor = " << fmt(c.ricean_factor) << "\n"
     << "pl_exp_direct = " << fmt(c.pl_exp_direct) << "\n"
     << "pl_exp_bs_ris = " << fmt(c.pl_exp_bs_ris) << "\n"
     << "pl_exp_ris_user = " << fmt(c.pl_exp_ris_user) << "\n"
     << "pl_ref_db_direct = " << fmt(c.pl_ref_db_direct) << "\n"
     << "pl_ref_db_bs_ris = " << fmt(c.pl_ref_db_bs_ris) << "\n"
     << "pl_ref_db_ris_user = " << fmt(c.pl_ref_db_ris_user) << "\n"
     << "antenna_gain_db = " << fmt(c.antenna_gain_db) << "\n"
     << "blockage_db = " << fmt(c.blockage_db) << "\n"
     << "noise_power = " << fmt(c.noise_power) << "\n"
     << "\n# finite-blocklength coding\n"
     << "blocklength = " << c.blocklength << "\n"
     << "epsilon = " << fmt(c.epsilon) << "\n"
     << "\n# power model\n"
     << "p_static = " << fmt(c.p_static) << "\n"
     << "beta = " << fmt(c.beta) << "\n"
     << "p_budget = " << fmt(c.p_budget) << "\n"
     << "weight = " << fmt(c.weight) << "\n"
     << "rate_floor = " << fmt(c.rate_floor) << "\n"
     << "\n# optimizer\n"
     << "max_outer = " << c.max_outer << "\n"
     << "tol_outer = " << fmt(c.tol_outer) << "\n"
     << "ms_split = " << c.ms_split << "\n"
     << "solver_max_inner = " << c.solver_max_inner << "\n"
     << "solver_tol_kkt = " << fmt(c.solver_tol_kkt) << "\n";
  return os.str();
}

}  // namespace staree
