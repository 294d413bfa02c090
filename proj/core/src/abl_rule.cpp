#include "abl/abl_rule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace abl {

PrePostContext::PrePostContext(StateVector pre, StateVector post, std::optional<TimeLabels> time_labels)
    : pre_(std::move(pre)), post_(std::move(post)), time_labels_(std::move(time_labels)) {
  if (pre_.dim() != post_.dim()) throw DimensionMismatch(pre_.dim(), post_.dim(), "PrePostContext");
}

MeasurementSequence::MeasurementSequence(std::vector<Observable> observables) : observables_(std::move(observables)) {
  for (const auto& o : observables_) {
    if (o.dim() != observables_.front().dim()) {
      throw DimensionMismatch(observables_.front().dim(), o.dim(), "MeasurementSequence");
    }
  }
}

OutcomeDistribution::OutcomeDistribution(std::vector<DistributionEntry> entries, bool normalized)
    : entries_(std::move(entries)), normalized_(normalized) {
  for (const auto& e : entries_) {
    if (!(e.probability >= 0.0 && e.probability <= 1.0 + kTolerance)) {
      throw InvalidArgument("OutcomeDistribution: probability outside [0, 1]");
    }
  }
  if (normalized_ && std::abs(sum() - 1.0) > kTolerance) {
    throw InvalidArgument("OutcomeDistribution: normalized distribution does not sum to 1");
  }
}

double OutcomeDistribution::sum() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.probability;
  return s;
}

double OutcomeDistribution::probability(std::string_view label) const {
  for (const auto& e : entries_) {
    if (e.outcome.size() == 1 && e.outcome.front() == label) return e.probability;
  }
  throw InvalidArgument("OutcomeDistribution: no outcome '" + std::string(label) + "'");
}

double OutcomeDistribution::probability(std::span<const std::string> outcome) const {
  for (const auto& e : entries_) {
    if (std::equal(e.outcome.begin(), e.outcome.end(), outcome.begin(), outcome.end())) return e.probability;
  }
  throw InvalidArgument("OutcomeDistribution: no such outcome sequence");
}

namespace {

void check_compatible(const PrePostContext& ctx, const Observable& q, const char* where) {
  if (ctx.dim() != q.dim()) throw DimensionMismatch(ctx.dim(), q.dim(), where);
}

// Normalizes in place; throws when the total is negligible.
void normalize(std::vector<DistributionEntry>& entries) {
  double total = 0.0;
  for (const auto& e : entries) total += e.probability;
  if (total < kNegligibleWeight) throw ZeroDenominator(total);
  for (auto& e : entries) e.probability = std::clamp(e.probability / total, 0.0, 1.0);
}

bool is_eigenvector(const StateVector& x, const Observable& q) {
  return std::any_of(q.outcomes().begin(), q.outcomes().end(),
                     [&](const Outcome& o) { return born_probability(x, o.projector) >= 1.0 - kTolerance; });
}

}  // namespace

std::vector<double> joint_weights(const PrePostContext& ctx, const Observable& q) {
  check_compatible(ctx, q, "joint_weights");
  std::vector<double> w;
  w.reserve(q.size());
  for (const auto& o : q.outcomes()) {
    const auto projected = o.projector.matrix().apply(ctx.pre().amplitudes());
    w.push_back(std::norm(inner_product(ctx.post(), projected)));
  }
  return w;
}

OutcomeDistribution born_distribution(const StateVector& state, const Observable& q) {
  if (state.dim() != q.dim()) throw DimensionMismatch(state.dim(), q.dim(), "born_distribution");
  std::vector<DistributionEntry> entries;
  for (const auto& o : q.outcomes()) entries.push_back({{o.label}, born_probability(state, o.projector)});
  normalize(entries);
  return OutcomeDistribution(std::move(entries), true);
}

OutcomeDistribution abl_distribution(const PrePostContext& ctx, const Observable& q) {
  const auto w = joint_weights(ctx, q);
  std::vector<DistributionEntry> entries;
  entries.reserve(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) entries.push_back({{q.outcome(k).label}, w[k]});
  normalize(entries);
  return OutcomeDistribution(std::move(entries), true);
}

double abl_probability(const PrePostContext& ctx, const Observable& q, std::string_view label) {
  const std::size_t k = q.index_of(label);
  return abl_distribution(ctx, q).entries()[k].probability;
}

std::vector<DistributionEntry> sequence_path_weights(const PrePostContext& ctx, const MeasurementSequence& seq) {
  if (seq.empty()) return {{{}, std::norm(inner_product(ctx.post(), ctx.pre()))}};
  if (seq.size() > kMaxSequenceLength) {
    throw InvalidArgument("sequence length " + std::to_string(seq.size()) + " exceeds " +
                          std::to_string(kMaxSequenceLength));
  }
  std::size_t total = 1;
  for (const auto& q : seq.observables()) {
    check_compatible(ctx, q, "abl_sequence_distribution");
    total *= q.size();
  }
  if (total > kMaxSequenceOutcomes) {
    throw InvalidArgument("sequence has " + std::to_string(total) + " outcome paths, limit is " +
                          std::to_string(kMaxSequenceOutcomes));
  }

  // Depth-first over paths; stack[d] holds Pi_{d} ... Pi_{1}|a>.
  std::vector<DistributionEntry> out;
  out.reserve(total);
  std::vector<std::string> labels(seq.size());
  std::vector<std::vector<Complex>> stack(seq.size() + 1);
  stack[0].assign(ctx.pre().amplitudes().begin(), ctx.pre().amplitudes().end());

  auto descend = [&](auto&& self, std::size_t depth) -> void {
    if (depth == seq.size()) {
      out.push_back({labels, std::norm(inner_product(ctx.post(), stack[depth]))});
      return;
    }
    for (const auto& o : seq.observables()[depth].outcomes()) {
      labels[depth] = o.label;
      stack[depth + 1] = o.projector.matrix().apply(stack[depth]);
      self(self, depth + 1);
    }
  };
  descend(descend, 0);
  return out;
}

OutcomeDistribution abl_sequence_distribution(const PrePostContext& ctx, const MeasurementSequence& seq) {
  if (seq.empty()) return OutcomeDistribution({{{}, 1.0}}, true);
  auto entries = sequence_path_weights(ctx, seq);
  normalize(entries);
  return OutcomeDistribution(std::move(entries), true);
}

PrePostContext time_reverse(const PrePostContext& ctx) {
  std::optional<PrePostContext::TimeLabels> labels;
  if (ctx.time_labels()) labels = PrePostContext::TimeLabels{ctx.time_labels()->second, ctx.time_labels()->first};
  return PrePostContext(ctx.post(), ctx.pre(), std::move(labels));
}

std::string_view to_string(SpecialCase c) noexcept {
  switch (c) {
    case SpecialCase::kNone: return "none";
    case SpecialCase::kPreEigenstate: return "pre-eigenstate";
    case SpecialCase::kPostEigenstate: return "post-eigenstate";
    case SpecialCase::kUnclassified: return "unclassified";
  }
  return "unknown";
}

bool is_special_case(const PrePostContext& ctx, const Observable& q) {
  check_compatible(ctx, q, "is_special_case");
  return is_eigenvector(ctx.pre(), q) || is_eigenvector(ctx.post(), q);
}

SpecialCase classify_special_case(const PrePostContext& ctx, const Observable& q, PreparingObservables preparing) {
  check_compatible(ctx, q, "classify_special_case");
  if (is_eigenvector(ctx.pre(), q)) return SpecialCase::kPreEigenstate;
  if (is_eigenvector(ctx.post(), q)) return SpecialCase::kPostEigenstate;
  for (const Observable* prep : {preparing.pre, preparing.post}) {
    if (prep != nullptr && commute(*prep, q)) return SpecialCase::kUnclassified;
  }
  return SpecialCase::kNone;
}

}  // namespace abl
