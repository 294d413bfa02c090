#include "abl/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace abl::sim {

namespace {

// Flattened measurement chain: seq followed by the final observable.
class TrialKernel {
 public:
  TrialKernel(const StateVector& pre, const MeasurementSequence& seq, const Observable& final_obs)
      : dim_(pre.dim()), pre_(pre.amplitudes().begin(), pre.amplitudes().end()) {
    for (const auto& q : seq.observables()) add(q);
    add(final_obs);
    path_count_ = 1;
    for (const auto& m : measurements_) path_count_ *= m.size();
  }

  std::size_t measurement_count() const noexcept { return measurements_.size(); }
  std::size_t outcome_count(std::size_t m) const noexcept { return measurements_[m].size(); }
  std::size_t path_count() const noexcept { return path_count_; }

  /// Runs one trial, writing the sampled outcome index per measurement.
  void run(Xoshiro256StarStar& rng, std::span<std::size_t> picks) {
    psi_ = pre_;
    for (std::size_t m = 0; m < measurements_.size(); ++m) {
      const auto& projectors = measurements_[m];
      const double u = rng.uniform();
      double total = 0.0;
      for (std::size_t k = 0; k < projectors.size(); ++k) {
        project(projectors[k], branches_[k]);
        weights_[k] = norm2(branches_[k]);
        total += weights_[k];
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw Error("simulation aborted: outcome probabilities sum to " + std::to_string(total));
      }
      std::size_t pick = projectors.size();
      double cumulative = 0.0;
      for (std::size_t k = 0; k < projectors.size(); ++k) {
        cumulative += weights_[k];
        if (u < cumulative) {
          pick = k;
          break;
        }
      }
      if (pick == projectors.size()) {
        // u landed in the rounding gap above the cumulative sum: take the last reachable outcome.
        pick = projectors.size() - 1;
        while (weights_[pick] <= 0.0) --pick;
      }
      const double scale = 1.0 / std::sqrt(weights_[pick]);
      for (std::size_t i = 0; i < dim_; ++i) psi_[i] = branches_[pick][i] * scale;
      picks[m] = pick;
    }
  }

  /// Mixed-radix path code, first measurement most significant.
  std::size_t encode(std::span<const std::size_t> picks) const noexcept {
    std::size_t code = 0;
    for (std::size_t m = 0; m < measurements_.size(); ++m) code = code * measurements_[m].size() + picks[m];
    return code;
  }

  void decode(std::size_t code, std::span<std::size_t> picks) const noexcept {
    for (std::size_t m = measurements_.size(); m-- > 0;) {
      picks[m] = code % measurements_[m].size();
      code /= measurements_[m].size();
    }
  }

 private:
  void add(const Observable& q) {
    std::vector<std::vector<Complex>> projectors;
    for (const auto& o : q.outcomes()) {
      const auto d = o.projector.matrix().data();
      projectors.emplace_back(d.begin(), d.end());
    }
    branches_.resize(std::max(branches_.size(), projectors.size()), std::vector<Complex>(dim_));
    weights_.resize(branches_.size());
    measurements_.push_back(std::move(projectors));
  }

  void project(const std::vector<Complex>& p, std::vector<Complex>& out) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      Complex acc{};
      for (std::size_t c = 0; c < dim_; ++c) acc += p[r * dim_ + c] * psi_[c];
      out[r] = acc;
    }
  }

  static double norm2(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return s;
  }

  std::size_t dim_;
  std::vector<Complex> pre_;
  std::vector<std::vector<std::vector<Complex>>> measurements_;
  std::size_t path_count_ = 1;
  std::vector<Complex> psi_;
  std::vector<std::vector<Complex>> branches_;
  std::vector<double> weights_;
};

void check_inputs(const PrePostContext& ctx, const MeasurementSequence& seq, const Observable& final_obs) {
  for (const auto& q : seq.observables()) {
    if (q.dim() != ctx.dim()) throw DimensionMismatch(ctx.dim(), q.dim(), "run_trials");
  }
  if (final_obs.dim() != ctx.dim()) throw DimensionMismatch(ctx.dim(), final_obs.dim(), "run_trials");
  if (seq.size() > kMaxSequenceLength) {
    throw InvalidArgument("run_trials: sequence length exceeds " + std::to_string(kMaxSequenceLength));
  }
}

std::optional<std::string> find_postselected(const StateVector& post, const Observable& final_obs) {
  for (const auto& o : final_obs.outcomes()) {
    if (o.projector.rank() == 1 && born_probability(post, o.projector) >= 1.0 - kTolerance) return o.label;
  }
  return std::nullopt;
}

}  // namespace

TrialRecord sample_trial(const StateVector& pre, const MeasurementSequence& seq, const Observable& final_obs,
                         Xoshiro256StarStar& rng) {
  check_inputs(PrePostContext(pre, pre), seq, final_obs);
  TrialKernel kernel(pre, seq, final_obs);
  std::vector<std::size_t> picks(kernel.measurement_count());
  kernel.run(rng, picks);
  TrialRecord record;
  for (std::size_t m = 0; m < seq.size(); ++m) {
    record.intermediate_outcomes.push_back(seq.observables()[m].outcome(picks[m]).label);
  }
  record.post_outcome = final_obs.outcome(picks.back()).label;
  return record;
}

SimulationReport run_trials(const PrePostContext& ctx, const MeasurementSequence& seq, const Observable& final_obs,
                            std::uint64_t n, std::uint64_t seed, unsigned threads) {
  check_inputs(ctx, seq, final_obs);
  if (n == 0) throw InvalidArgument("run_trials: trial count must be positive");
  if (n > kMaxTrials) throw InvalidArgument("run_trials: trial count exceeds " + std::to_string(kMaxTrials));

  const TrialKernel prototype(ctx.pre(), seq, final_obs);
  const std::uint64_t chunks = (n + kChunkSize - 1) / kChunkSize;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));

  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(prototype.path_count()));
  std::atomic<std::uint64_t> next_chunk{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&](unsigned t) {
    try {
      TrialKernel kernel = prototype;
      std::vector<std::size_t> picks(kernel.measurement_count());
      auto& counts = partial[t];
      for (std::uint64_t c = next_chunk++; c < chunks && !failed; c = next_chunk++) {
        Xoshiro256StarStar rng(chunk_seed(seed, c));
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t end = std::min(n, begin + kChunkSize);
        for (std::uint64_t i = begin; i < end; ++i) {
          kernel.run(rng, picks);
          ++counts[kernel.encode(picks)];
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  if (failure) std::rethrow_exception(failure);

  SimulationReport report;
  report.trials = n;
  report.seed = seed;
  report.chunk_size = kChunkSize;
  report.postselected_outcome = find_postselected(ctx.post(), final_obs);
  for (const auto& o : final_obs.outcomes()) report.subensemble_counts[o.label] = 0;

  std::vector<std::size_t> picks(prototype.measurement_count());
  for (std::size_t code = 0; code < prototype.path_count(); ++code) {
    std::uint64_t total = 0;
    for (const auto& counts : partial) total += counts[code];
    if (total == 0) continue;
    prototype.decode(code, picks);
    JointKey key;
    for (std::size_t m = 0; m < seq.size(); ++m) key.intermediate.push_back(seq.observables()[m].outcome(picks[m]).label);
    key.post = final_obs.outcome(picks.back()).label;
    report.subensemble_counts[key.post] += total;
    report.joint_counts[std::move(key)] += total;
  }
  return report;
}

double postselection_survival(const PrePostContext& ctx, const MeasurementSequence& seq) {
  const auto paths = sequence_path_weights(ctx, seq);
  double total = 0.0;
  for (const auto& p : paths) total += p.probability;
  return std::clamp(total, 0.0, 1.0);
}

double ComparisonTable::max_abs_z() const noexcept {
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.flag == RowFlag::kOk) worst = std::max(worst, std::abs(r.z));
  }
  return worst;
}

bool ComparisonTable::any_flagged() const noexcept {
  return std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.flag != RowFlag::kOk; });
}

ComparisonTable frequency_vs_abl(const SimulationReport& report, const PrePostContext& ctx,
                                 const MeasurementSequence& seq) {
  if (!report.postselected_outcome) {
    throw InvalidArgument("frequency_vs_abl: final observable has no rank-1 outcome matching the post-selected state");
  }
  ComparisonTable table;
  table.postselected_outcome = *report.postselected_outcome;
  if (auto it = report.subensemble_counts.find(table.postselected_outcome); it != report.subensemble_counts.end()) {
    table.postselected_count = it->second;
  }

  // Exact ABL values for every intermediate path; undefined when the
  // post-selection is unreachable, in which case no trial can be post-selected either.
  std::optional<OutcomeDistribution> exact;
  try {
    exact = abl_sequence_distribution(ctx, seq);
  } catch (const ZeroDenominator&) {
  }

  const auto paths = sequence_path_weights(ctx, seq);
  for (const auto& path : paths) {
    ComparisonRow row;
    row.intermediate = path.outcome;
    row.postselected_count = table.postselected_count;
    if (auto it = report.joint_counts.find(JointKey{path.outcome, table.postselected_outcome});
        it != report.joint_counts.end()) {
      row.count = it->second;
    }
    row.abl = exact ? exact->probability(std::span<const std::string>(path.outcome)) : 0.0;
    if (row.postselected_count == 0) {
      row.flag = RowFlag::kEmpty;
      table.rows.push_back(std::move(row));
      continue;
    }
    row.frequency = static_cast<double>(row.count) / static_cast<double>(row.postselected_count);
    row.standard_error = std::sqrt(row.abl * (1.0 - row.abl) / static_cast<double>(row.postselected_count));
    const double diff = row.frequency - row.abl;
    if (row.standard_error > 0.0) {
      row.z = diff / row.standard_error;
    } else {
      row.z = std::abs(diff) <= kTolerance ? 0.0 : std::copysign(INFINITY, diff);
    }
    if (row.postselected_count < kLowCountThreshold) row.flag = RowFlag::kLowCount;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string_view to_string(RowFlag flag) noexcept {
  switch (flag) {
    case RowFlag::kOk: return "ok";
    case RowFlag::kLowCount: return "low-count";
    case RowFlag::kEmpty: return "empty";
  }
  return "unknown";
}

}  // namespace abl::sim
