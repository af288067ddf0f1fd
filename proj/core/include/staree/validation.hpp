#pragma once

#include "staree/ao.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace staree {

/// Self-contained random problem data for property checks: channels drawn
/// directly (no geometry), a feasible surface state, and precoders filling
/// the power budget.
struct SyntheticInstance {
  Dimensions dims;
  LinkSet links;
  RISProfile ris;
  BeamformerSet gammas;
  FBLParams fbl;
  PowerParams power;
};

SyntheticInstance random_synthetic_instance(std::uint64_t seed, int max_users = 4,
                                            int max_antennas = 2, int max_elements = 8);

struct SuiteResult {
  std::string name;
  bool pass = false;
  double metric = 0.0;  // worst observed value
  double tol = 0.0;
  std::string detail;
};

struct ValidationSummary {
  std::vector<SuiteResult> suites;
  std::string minorization_report;  // human-readable, from the worst instance

  bool all_pass() const;
  std::string to_string() const;
};

/// Bound-tangency, minorization, gradient-match, ascent, transform-exactness
/// and feasibility property suites over randomly drawn instances. The same
/// checks the test suite runs, packaged for the command line.
ValidationSummary run_validation_suites(int n_instances, int n_samples, std::uint64_t seed);

}  // namespace staree
