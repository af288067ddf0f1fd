#pragma once

#include "staree/channel.hpp"
#include "staree/fbl.hpp"
#include "staree/qcqp.hpp"
#include "staree/surrogate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace staree {

/// The five experimental method variants.
enum class Method { StarES, StarMS, RisReflective, RisRandom, NoRis };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct ProblemInstance {
  LinkSet links;
  Dimensions dims;
  FBLParams fbl;
  PowerParams power;
  Method mode = Method::StarES;

  void validate() const;
};

struct AOConfig {
  int max_outer = 50;
  double tol_outer = 1e-4;           // relative sum-EE improvement threshold
  SolverOptions solver;
  std::uint64_t seed = 0;            // drives the surface phase initialization
  int ms_split = -1;                 // ModeSwitching split index; -1 means M/2
  std::optional<RISProfile> initial_ris;  // overrides the seeded surface init
};

/// Auxiliary variables of the fractional transform.
struct FractionalState {
  RealVector zeta;
  RealVector gamma_aux;
};

struct IterationRecord {
  double sum_ee = 0.0;          // raw weighted sum, nats per joule
  RealVector rates;             // true per-user rates at the iterate
  RealVector rtilde;            // surrogate bound at the iterate
  double power_used = 0.0;
  double ris_residual = 0.0;    // worst surface ball/mask violation
  bool bf_ran = false, bf_applied = false;
  bool ris_ran = false, ris_applied = false;
  SolveStatus bf_status = SolveStatus::Converged;
  SolveStatus ris_status = SolveStatus::Converged;
  double qt_gap = 0.0;          // fractional-transform exactness gap at the point
};

struct SolveTrace {
  std::vector<IterationRecord> iterations;  // index 0 is the initial evaluation
  BeamformerSet final_gammas;
  RISProfile final_ris;
  bool infeasible = false;
  double wall_clock_s = 0.0;

  int outer_iterations() const { return static_cast<int>(iterations.size()) - 1; }
  double final_sum_ee() const { return iterations.empty() ? 0.0 : iterations.back().sum_ee; }
  std::string to_delimited() const;  // tab-separated per-iteration dump
};

struct AOState {
  BeamformerSet gammas;
  RISProfile ris;
};

/// zeta_k = sqrt(alpha_k max(r_k, 0)) / (P_s + beta tr(Gamma_k Gamma_k^H)).
RealVector zeta_update(const RealVector& rates, const BeamformerSet& gammas,
                       const PowerParams& power);

/// gamma_k = sqrt(alpha_k max(rtilde_k, 0)).
RealVector gamma_update(const RealVector& rtilde, const RealVector& weights);

/// Seeded initial iterate: matched-filter precoders at P/K per user, surface
/// phases drawn from the seed with mode-appropriate amplitudes.
AOState initial_state(const ProblemInstance& instance, const AOConfig& config);

struct BfStepResult {
  AOState state;
  FractionalState frac;
  SolveStatus status = SolveStatus::Converged;
  bool applied = false;
  double qt_gap = 0.0;
  RealVector rtilde_new;  // surrogate values at the returned precoders
};

/// One precoder block update: builds the minorizers at the current point,
/// refreshes the fractional multipliers, solves the concave subproblem, and
/// keeps the result only if the true sum EE did not decrease.
BfStepResult beamforming_step(const AOState& state, const ProblemInstance& instance,
                              const AOConfig& config);

struct RisStepResult {
  RISProfile ris;
  SolveStatus status = SolveStatus::Converged;
  bool applied = false;
};

/// One surface block update with the precoders held fixed. Must not be called
/// for NoRis/RisRandom.
RisStepResult ris_step(const AOState& state, const ProblemInstance& instance,
                       const AOConfig& config);

enum class RestoreStatus { NoOp, Restored, Infeasible };

/// Lifts min_k (rtilde_k - floor_k) until the true rates clear their floors,
/// via the same minorize-and-solve machinery; Infeasible when it stalls below.
RestoreStatus feasibility_restore(AOState& state, const ProblemInstance& instance,
                                  const AOConfig& config);

/// Full alternating optimization; pure function of (instance, config).
SolveTrace optimize(const ProblemInstance& instance, const AOConfig& config);

/// Dispatch per method: StarES/StarMS/RisReflective run the full alternation,
/// RisRandom fixes random surface coefficients and optimizes precoders only,
/// NoRis zeroes the surface.
SolveTrace run_baseline(Method kind, ProblemInstance instance, const AOConfig& config);

}  // namespace staree
