#include "abl/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "abl/serialization.hpp"
#include "support/oracle.hpp"

using namespace abl;
using namespace abl::sim;

namespace {

constexpr double kPi = std::numbers::pi;
const BlochDirection kZ(0.0, 0.0);
const BlochDirection kX(kPi / 2, 0.0);
const BlochDirection kC45(kPi / 4, 0.0);

PrePostContext up_z_up_x() { return PrePostContext(spin_state(kZ), spin_state(kX)); }

double four_sigma(double p, double n) { return 4.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(Rng, SplitMixReferenceOutputs) {
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(splitmix64(s), 0x06c45d188009454fULL);
}

TEST(Rng, XoshiroReferenceOutputs) {
  // Frozen from an independent Python implementation of xoshiro256** seeded by splitmix64(42).
  Xoshiro256StarStar rng(42);
  EXPECT_EQ(rng(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(rng(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(rng(), 0xae17533239e499a1ULL);
  EXPECT_EQ(rng(), 0xecb8ad4703b360a1ULL);
}

TEST(Rng, ChunkSeeds) {
  EXPECT_EQ(chunk_seed(42, 0), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(chunk_seed(42, 1), 0x28efe333b266f103ULL);
}

TEST(Rng, UniformInUnitInterval) {
  Xoshiro256StarStar rng(1);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(RunTrials, NoInterveningMeasurementSplitsEvenly) {
  const auto report = run_trials(up_z_up_x(), MeasurementSequence{}, spin_observable(kX), 1'000'000, 2024);
  const double n = 1e6;
  EXPECT_NEAR(report.subensemble_counts.at("up") / n, 0.5, four_sigma(0.5, n));
  EXPECT_NEAR(report.subensemble_counts.at("down") / n, 0.5, four_sigma(0.5, n));
  EXPECT_EQ(report.postselected_outcome, "up");
}

TEST(RunTrials, FortyFiveDegreeConditionalAndSurvival) {
  const MeasurementSequence seq({spin_observable(kC45)});
  const auto report = run_trials(up_z_up_x(), seq, spin_observable(kX), 1'000'000, 42);
  const double n = 1e6;
  const double post = report.subensemble_counts.at("up");
  // Exact survival 0.75 by path enumeration (0.728553 + 0.021447).
  EXPECT_NEAR(post / n, 0.75, four_sigma(0.75, n));
  const double abl_up = abl_probability(up_z_up_x(), spin_observable(kC45), "up");
  const double freq = report.joint_counts.at(JointKey{{"up"}, "up"}) / post;
  EXPECT_NEAR(freq, abl_up, four_sigma(abl_up, post));
}

TEST(RunTrials, DeterministicAcrossRunsAndThreadCounts) {
  const MeasurementSequence seq({spin_observable(kC45), spin_observable(BlochDirection(1.0, 2.0))});
  const auto a = run_trials(up_z_up_x(), seq, spin_observable(kX), 300'000, 9, 1);
  const auto b = run_trials(up_z_up_x(), seq, spin_observable(kX), 300'000, 9, 1);
  const auto c = run_trials(up_z_up_x(), seq, spin_observable(kX), 300'000, 9, 4);
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(c).dump());
  const auto d = run_trials(up_z_up_x(), seq, spin_observable(kX), 300'000, 10, 1);
  EXPECT_NE(nlohmann::json(a).dump(), nlohmann::json(d).dump());
}

TEST(RunTrials, CountConservation) {
  const MeasurementSequence seq({spin_observable(kC45), spin_observable(kZ)});
  const auto r = run_trials(up_z_up_x(), seq, spin_observable(kX), 100'001, 5);
  std::uint64_t joint_total = 0;
  std::map<std::string, std::uint64_t> marginal;
  for (const auto& [key, count] : r.joint_counts) {
    joint_total += count;
    marginal[key.post] += count;
    EXPECT_EQ(key.intermediate.size(), 2u);
  }
  EXPECT_EQ(joint_total, r.trials);
  for (const auto& [label, count] : r.subensemble_counts) EXPECT_EQ(marginal[label], count);
}

TEST(RunTrials, Errors) {
  EXPECT_THROW(run_trials(up_z_up_x(), MeasurementSequence{}, spin_observable(kX), 0, 1), InvalidArgument);
  EXPECT_THROW(run_trials(up_z_up_x(), MeasurementSequence{}, spin_observable(kX), kMaxTrials + 1, 1),
               InvalidArgument);
  const std::size_t zero[] = {0};
  EXPECT_THROW(run_trials(up_z_up_x(), MeasurementSequence{}, projector_observable(Projector::basis(3, zero), "b"), 10, 1),
               DimensionMismatch);
}

TEST(SampleTrial, RecordMatchesConfiguredShape) {
  Xoshiro256StarStar rng(3);
  const MeasurementSequence seq({spin_observable(kC45), spin_observable(kZ)});
  const auto rec = sample_trial(spin_state(kZ), seq, spin_observable(kX), rng);
  EXPECT_EQ(rec.intermediate_outcomes.size(), 2u);
  EXPECT_TRUE(rec.post_outcome == "up" || rec.post_outcome == "down");
}

TEST(SampleTrial, CollapseMakesRepeatedMeasurementAgree) {
  Xoshiro256StarStar rng(8);
  const auto q = spin_observable(kC45);
  for (int i = 0; i < 1000; ++i) {
    const auto rec = sample_trial(spin_state(kX), MeasurementSequence({q}), q, rng);
    EXPECT_EQ(rec.intermediate_outcomes[0], rec.post_outcome);
  }
}

TEST(PostselectionSurvival, Examples) {
  EXPECT_NEAR(postselection_survival(up_z_up_x(), MeasurementSequence{}), 0.5, 1e-12);
  EXPECT_NEAR(postselection_survival(up_z_up_x(), MeasurementSequence({spin_observable(kZ)})), 0.5, 1e-12);
  EXPECT_NEAR(postselection_survival(up_z_up_x(), MeasurementSequence({spin_observable(kX)})), 0.5, 1e-12);

  const auto a = oracle::range_vector(oracle::pauli_projector(oracle::unit(0, 0), +1));
  const auto b = oracle::range_vector(oracle::pauli_projector(oracle::unit(kPi / 2, 0), +1));
  const auto c = oracle::unit(kPi / 4, 0);
  const auto w = oracle::path_weights(a, b, {{oracle::pauli_projector(c, +1), oracle::pauli_projector(c, -1)}});
  EXPECT_NEAR(w[0] + w[1], 0.75, 1e-12);
  EXPECT_NEAR(postselection_survival(up_z_up_x(), MeasurementSequence({spin_observable(kC45)})), 0.75, 1e-12);
}

TEST(PostselectionSurvival, EmptySequenceIsBornOfPreProjector) {
  const PrePostContext ctx(spin_state(BlochDirection(0.3, 1.0)), spin_state(BlochDirection(2.0, 5.0)));
  EXPECT_NEAR(postselection_survival(ctx, MeasurementSequence{}), born_probability(ctx.post(), Projector::onto(ctx.pre())),
              1e-12);
}

TEST(FrequencyVsAbl, CertaintyCaseIsExact) {
  const MeasurementSequence seq({spin_observable(kX)});
  const auto report = run_trials(up_z_up_x(), seq, spin_observable(kX), 50'000, 77);
  const auto table = frequency_vs_abl(report, up_z_up_x(), seq);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].intermediate, std::vector<std::string>{"up"});
  EXPECT_EQ(table.rows[0].frequency, 1.0);
  EXPECT_EQ(table.rows[0].z, 0.0);
  EXPECT_EQ(table.rows[1].frequency, 0.0);
}

TEST(FrequencyVsAbl, RarePostselectionIsFlagged) {
  const PrePostContext ctx(spin_state(kZ), spin_state(BlochDirection::from_degrees(176)));
  const MeasurementSequence seq({spin_observable(BlochDirection::from_degrees(2))});
  const auto report = run_trials(ctx, seq, spin_observable(BlochDirection::from_degrees(176)), 100, 11);
  const auto table = frequency_vs_abl(report, ctx, seq);
  EXPECT_TRUE(table.any_flagged());
  for (const auto& r : table.rows) EXPECT_NE(r.flag, RowFlag::kOk);
}

TEST(FrequencyVsAbl, LargeRunWithinFourSigma) {
  const MeasurementSequence seq({spin_observable(kC45)});
  const auto report = run_trials(up_z_up_x(), seq, spin_observable(kX), 1'000'000, 42);
  const auto table = frequency_vs_abl(report, up_z_up_x(), seq);
  EXPECT_FALSE(table.any_flagged());
  EXPECT_LE(table.max_abs_z(), 4.0);
}

TEST(FrequencyVsAbl, RequiresMatchingFinalOutcome) {
  const auto report = run_trials(up_z_up_x(), MeasurementSequence{}, spin_observable(kC45), 100, 1);
  EXPECT_FALSE(report.postselected_outcome.has_value());
  EXPECT_THROW(frequency_vs_abl(report, up_z_up_x(), MeasurementSequence{}), InvalidArgument);
}

TEST(SimulationReportJson, FieldsAndArrowKeys) {
  const MeasurementSequence seq({spin_observable(kC45, "c")});
  const auto report = run_trials(up_z_up_x(), seq, spin_observable(kX), 1000, 1);
  const nlohmann::json j = report;
  EXPECT_EQ(j.at("trials"), 1000);
  EXPECT_EQ(j.at("seed"), 1);
  EXPECT_EQ(j.at("chunk_size"), 65536);
  EXPECT_TRUE(j.at("subensemble_counts").contains("up"));
  EXPECT_TRUE(j.at("joint_counts").contains("up\xE2\x86\x92up"));
}
