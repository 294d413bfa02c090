#pragma once

// Conditional outcome probabilities for measurements made between a
// pre-selection at t_a and a post-selection at t_b:
//
//   P(q_k | a, b) = |<b|Pi_k|a>|^2 / sum_j |<b|Pi_j|a>|^2
//
// and the multi-time generalization over ordered measurement sequences. Free
// evolution between measurements is the identity.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abl/quantum.hpp"

namespace abl {

inline constexpr std::size_t kMaxSequenceLength = 6;
inline constexpr std::size_t kMaxSequenceOutcomes = 4096;

class PrePostContext {
 public:
  using TimeLabels = std::pair<std::string, std::string>;

  PrePostContext(StateVector pre, StateVector post, std::optional<TimeLabels> time_labels = std::nullopt);

  const StateVector& pre() const noexcept { return pre_; }
  const StateVector& post() const noexcept { return post_; }
  const std::optional<TimeLabels>& time_labels() const noexcept { return time_labels_; }
  std::size_t dim() const noexcept { return pre_.dim(); }

 private:
  StateVector pre_;
  StateVector post_;
  std::optional<TimeLabels> time_labels_;
};

class MeasurementSequence {
 public:
  MeasurementSequence() = default;
  explicit MeasurementSequence(std::vector<Observable> observables);

  std::span<const Observable> observables() const noexcept { return observables_; }
  std::size_t size() const noexcept { return observables_.size(); }
  bool empty() const noexcept { return observables_.empty(); }

 private:
  std::vector<Observable> observables_;
};

struct DistributionEntry {
  std::vector<std::string> outcome;  // one label per measurement
  double probability;
};

class OutcomeDistribution {
 public:
  OutcomeDistribution(std::vector<DistributionEntry> entries, bool normalized);

  std::span<const DistributionEntry> entries() const noexcept { return entries_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double sum() const noexcept;

  /// Throws InvalidArgument when no entry has this outcome.
  double probability(std::string_view label) const;
  double probability(std::span<const std::string> outcome) const;

 private:
  std::vector<DistributionEntry> entries_;
  bool normalized_;
};

/// |<b|Pi_k|a>|^2 for each outcome k, in declaration order.
std::vector<double> joint_weights(const PrePostContext& ctx, const Observable& q);

/// Born distribution <a|Pi_k|a> of a single measurement.
OutcomeDistribution born_distribution(const StateVector& state, const Observable& q);

double abl_probability(const PrePostContext& ctx, const Observable& q, std::string_view label);
OutcomeDistribution abl_distribution(const PrePostContext& ctx, const Observable& q);

/// Distribution over every outcome-label sequence, first observable varying
/// slowest. An empty sequence yields the single empty outcome with probability 1.
OutcomeDistribution abl_sequence_distribution(const PrePostContext& ctx, const MeasurementSequence& seq);

/// Unnormalized |<b|Pi_{d_n} ... Pi_{d_1}|a>|^2 over all paths, same ordering as above.
std::vector<DistributionEntry> sequence_path_weights(const PrePostContext& ctx, const MeasurementSequence& seq);

PrePostContext time_reverse(const PrePostContext& ctx);

enum class SpecialCase {
  kNone,
  kPreEigenstate,   // Pi_k|a> = |a> for some k
  kPostEigenstate,  // Pi_k|b> = |b> for some k
  kUnclassified,    // commutes with a preparing observable but neither state is an eigenvector
};

std::string_view to_string(SpecialCase c) noexcept;

/// Whether |a> or |b> lies inside a single eigenspace of q.
bool is_special_case(const PrePostContext& ctx, const Observable& q);

struct PreparingObservables {
  const Observable* pre = nullptr;
  const Observable* post = nullptr;
};

/// Refines is_special_case: when the observables that prepared |a> or |b> are
/// supplied and q commutes with one of them without either state being a
/// q-eigenvector, the case is reported as unclassified rather than valid.
SpecialCase classify_special_case(const PrePostContext& ctx, const Observable& q,
                                  PreparingObservables preparing = {});

}  // namespace abl
