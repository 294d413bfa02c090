#pragma once

// Counterfactual readings of the ABL rule.
//
// A pre-selected ensemble |a> is split by a post-measurement B into
// subensembles E_i (weights w_i = |<b_i|a>|^2). Asking what a measurement of C,
// never actually performed in between, "would have" yielded in each subensemble
// and re-weighting gives
//
//   counterfactual_total = sum_i w_i P_ABL(c_1 | a, b_i)
//
// which generally differs from the unconditioned prediction |<c_1|a>|^2.
// This module computes that discrepancy, the cotenability condition under
// which the counterfactual reading is safe, and the possible-world table that
// puts the competing conditional probabilities side by side.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abl/abl_rule.hpp"

namespace abl::counterfactual {

/// Annotation for the unconditioned prediction column.
inline constexpr std::string_view kActualWorldTag = "actual-world counterfactual";
/// Annotation for the ABL-conditional column.
inline constexpr std::string_view kPossibleWorldTag = "possible-world conditional";

inline constexpr std::size_t kMinScanSteps = 2;
inline constexpr std::size_t kMaxScanSteps = 64;
inline constexpr std::size_t kMaxSphereScanSteps = 16;

struct SubensembleReport {
  std::string post_outcome;
  double weight = 0.0;
  /// Absent when the subensemble was skipped (weight below kNegligibleWeight).
  std::optional<OutcomeDistribution> abl_conditional;
};

struct DiscrepancyResult {
  std::string counterfactual_outcome;
  double counterfactual_total = 0.0;
  double qm_prediction = 0.0;
  double discrepancy = 0.0;  // counterfactual_total - qm_prediction
  bool special_case = false;
  std::vector<SubensembleReport> subensembles;

  std::vector<std::string> skipped_subensembles() const;
};

/// General form: every post_measurement outcome reachable from pre must be rank-1 (the b_i);
/// unreachable outcomes of any rank are skipped. Throws InvalidArgument otherwise.
DiscrepancyResult counterfactual_discrepancy(const StateVector& pre, const Observable& post_measurement,
                                             const Observable& counterfactual, std::string_view outcome);

/// Spin-1/2 case: pre-select up along a, post-measure sigma_b, ask about "up" along c.
DiscrepancyResult sharp_shanks(const BlochDirection& a, const BlochDirection& b, const BlochDirection& c);

struct ScanCell {
  BlochDirection b;
  BlochDirection c;
  DiscrepancyResult result;
};

struct ScanResult {
  std::size_t steps = 0;
  bool sphere = false;
  std::vector<ScanCell> cells;  // grid order, c varying fastest
  std::size_t argmax = 0;
  double max_abs_discrepancy = 0.0;

  const ScanCell& max_cell() const { return cells.at(argmax); }
};

/// a fixed at theta = 0; b and c swept over theta_i = i pi / steps, i < steps,
/// in the phi = 0 plane. steps in [2, 64].
ScanResult discrepancy_scan(std::size_t grid_steps);

/// Same, but b and c each sweep theta_i = i pi / steps and phi_j = 2 j pi / steps.
/// steps in [2, 16].
ScanResult discrepancy_scan_sphere(std::size_t grid_steps);

/// theta_b,theta_c,counterfactual_total,qm_prediction,discrepancy,special_case
/// (planar) or with phi_b/phi_c columns (sphere). Angles to 12 significant
/// digits, probabilities to 15.
void write_scan_csv(std::ostream& os, const ScanResult& scan);

struct CotenabilityVerdict {
  bool holds = true;
  std::optional<std::string> witness;
};

/// Holds iff every outcome reachable from |a> collapses it onto a state that
/// post-selects |b> with certainty. Otherwise the first failing outcome is the witness.
CotenabilityVerdict cotenability(const PrePostContext& ctx, const Observable& q);

struct World {
  std::string label;
  double eigenvalue = 0.0;
  double forward_weight = 0.0;  // P(q|a)
  /// P(b|q); undefined for an unreachable world of rank > 1.
  std::optional<double> standard_post_conditional;
  double joint = 0.0;  // P(q, b | a)
  /// P_ABL(q|a,b); absent when the set is undefined.
  std::optional<double> abl_conditional;
  double fixed_outcome_conditional = 1.0;
  /// |P(b|q) - 1| > kTolerance.
  bool unity_disagreement = false;
};

struct WorldSet {
  Observable observable;
  bool defined = true;  // false when sum of joints is below kNegligibleWeight
  std::vector<World> worlds;
};

std::vector<WorldSet> build_world_sets(const PrePostContext& ctx, std::span<const Observable> observables);

struct BoxReport {
  Observable observable;
  OutcomeDistribution abl;
  double forward_yes = 0.0;
  CotenabilityVerdict cotenability;
};

struct ThreeBoxReport {
  PrePostContext ctx;
  std::vector<BoxReport> boxes;  // box 1, box 2
};

/// pre (1,1,1)/sqrt3, post (1,1,-1)/sqrt3, yes/no observables for boxes 1 and 2.
ThreeBoxReport three_box();

}  // namespace abl::counterfactual
