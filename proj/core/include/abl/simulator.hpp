#pragma once

// Monte Carlo runs of prepare -> intervening measurements -> final measurement.
// Each trial starts in the pre-selected state, samples every measurement by
// its Born probability (cumulative inversion, outcomes in declaration order,
// one uniform per measurement) and collapses onto the sampled projector.
//
// Trials are grouped into chunks of kChunkSize; chunk i draws from a
// Xoshiro256StarStar seeded with chunk_seed(seed, i). Aggregate counts are
// therefore independent of how chunks are scheduled.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abl/abl_rule.hpp"
#include "abl/rng.hpp"

namespace abl::sim {

inline constexpr std::uint64_t kChunkSize = 65536;
inline constexpr std::uint64_t kMaxTrials = 100'000'000;
/// Post-selected subensembles smaller than this are flagged in comparisons.
inline constexpr std::uint64_t kLowCountThreshold = 30;

struct TrialRecord {
  std::vector<std::string> intermediate_outcomes;
  std::string post_outcome;
};

struct JointKey {
  std::vector<std::string> intermediate;
  std::string post;

  auto operator<=>(const JointKey&) const = default;
};

struct SimulationReport {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t chunk_size = kChunkSize;
  std::map<std::string, std::uint64_t> subensemble_counts;
  std::map<JointKey, std::uint64_t> joint_counts;
  /// Label of the final outcome whose rank-1 projector contains the post-selected state, if any.
  std::optional<std::string> postselected_outcome;
};

/// One trial driven by the supplied generator.
TrialRecord sample_trial(const StateVector& pre, const MeasurementSequence& seq, const Observable& final_obs,
                         Xoshiro256StarStar& rng);

/// Throws DimensionMismatch, or InvalidArgument when n is 0 or above kMaxTrials.
/// threads == 0 picks std::thread::hardware_concurrency().
SimulationReport run_trials(const PrePostContext& ctx, const MeasurementSequence& seq, const Observable& final_obs,
                            std::uint64_t n, std::uint64_t seed, unsigned threads = 0);

/// Exact probability, by path enumeration, that the final projection onto |b>
/// succeeds when seq is actually performed on |a>.
double postselection_survival(const PrePostContext& ctx, const MeasurementSequence& seq);

enum class RowFlag { kOk, kLowCount, kEmpty };

struct ComparisonRow {
  std::vector<std::string> intermediate;
  std::uint64_t count = 0;               // trials with this sequence and the post-selected outcome
  std::uint64_t postselected_count = 0;  // all post-selected trials
  double frequency = 0.0;
  double abl = 0.0;
  double standard_error = 0.0;  // sqrt(abl (1 - abl) / postselected_count)
  double z = 0.0;
  RowFlag flag = RowFlag::kOk;
};

struct ComparisonTable {
  std::string postselected_outcome;
  std::uint64_t postselected_count = 0;
  std::vector<ComparisonRow> rows;

  /// Largest |z| over unflagged rows.
  double max_abs_z() const noexcept;
  bool any_flagged() const noexcept;
};

/// Empirical conditional frequencies of each intermediate sequence given the
/// post-selected outcome, against exact ABL values. Requires
/// report.postselected_outcome. A zero post-selected count yields flagged rows.
ComparisonTable frequency_vs_abl(const SimulationReport& report, const PrePostContext& ctx,
                                 const MeasurementSequence& seq);

std::string_view to_string(RowFlag flag) noexcept;

}  // namespace abl::sim
