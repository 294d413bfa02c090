#pragma once

// JSON views of reports. Maps are emitted with sorted keys so dumps are
// byte-stable for identical inputs.

#include <nlohmann/json.hpp>

#include "abl/abl_rule.hpp"
#include "abl/counterfactual.hpp"
#include "abl/simulator.hpp"

namespace abl {

/// Separator for joined outcome-label sequences (U+2192 RIGHTWARDS ARROW).
inline constexpr std::string_view kSequenceSeparator = "\xE2\x86\x92";

std::string join_labels(std::span<const std::string> labels);

void to_json(nlohmann::json& j, const OutcomeDistribution& d);
void to_json(nlohmann::json& j, SpecialCase c);

namespace sim {
/// {trials, seed, chunk_size, subensemble_counts, joint_counts[, postselected_outcome]}.
/// Joint keys are the intermediate labels followed by the final label, joined by U+2192.
void to_json(nlohmann::json& j, const SimulationReport& r);
void to_json(nlohmann::json& j, const ComparisonTable& t);
}  // namespace sim

namespace counterfactual {
void to_json(nlohmann::json& j, const DiscrepancyResult& r);
void to_json(nlohmann::json& j, const WorldSet& s);
void to_json(nlohmann::json& j, const CotenabilityVerdict& v);
void to_json(nlohmann::json& j, const ThreeBoxReport& r);
}  // namespace counterfactual

}  // namespace abl
