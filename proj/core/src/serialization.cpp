#include "abl/serialization.hpp"

#include <cmath>

namespace abl {

using nlohmann::json;

std::string join_labels(std::span<const std::string> labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += kSequenceSeparator;
    out += labels[i];
  }
  return out;
}

void to_json(json& j, const OutcomeDistribution& d) {
  j = json::object();
  j["normalized"] = d.normalized();
  json entries = json::array();
  for (const auto& e : d.entries()) {
    entries.push_back({{"outcome", join_labels(e.outcome)}, {"probability", e.probability}});
  }
  j["entries"] = std::move(entries);
}

void to_json(json& j, SpecialCase c) { j = std::string(to_string(c)); }

namespace sim {

void to_json(json& j, const SimulationReport& r) {
  j = json::object();
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["chunk_size"] = r.chunk_size;
  j["subensemble_counts"] = r.subensemble_counts;
  json joint = json::object();
  for (const auto& [key, count] : r.joint_counts) {
    std::vector<std::string> labels = key.intermediate;
    labels.push_back(key.post);
    joint[join_labels(labels)] = count;
  }
  j["joint_counts"] = std::move(joint);
  if (r.postselected_outcome) j["postselected_outcome"] = *r.postselected_outcome;
}

void to_json(json& j, const ComparisonTable& t) {
  j = json::object();
  j["postselected_outcome"] = t.postselected_outcome;
  j["postselected_count"] = t.postselected_count;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"intermediate", join_labels(r.intermediate)},
                {"count", r.count},
                {"frequency", r.frequency},
                {"abl", r.abl},
                {"standard_error", r.standard_error},
                {"flag", std::string(to_string(r.flag))}};
    // JSON has no infinity.
    row["z"] = std::isfinite(r.z) ? json(r.z) : json(nullptr);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
}

}  // namespace sim

namespace counterfactual {

void to_json(json& j, const DiscrepancyResult& r) {
  j = json::object();
  j["counterfactual_outcome"] = r.counterfactual_outcome;
  j["counterfactual_total"] = r.counterfactual_total;
  j["qm_prediction"] = r.qm_prediction;
  j["discrepancy"] = r.discrepancy;
  j["special_case"] = r.special_case;
  j["modes"] = {{"qm_prediction", kActualWorldTag}, {"counterfactual_total", kPossibleWorldTag}};
  json subs = json::array();
  for (const auto& s : r.subensembles) {
    json sub = {{"post_outcome", s.post_outcome}, {"weight", s.weight}};
    sub["abl_conditional"] = s.abl_conditional ? json(*s.abl_conditional) : json(nullptr);
    subs.push_back(std::move(sub));
  }
  j["subensembles"] = std::move(subs);
  j["skipped_subensembles"] = r.skipped_subensembles();
}

void to_json(json& j, const WorldSet& s) {
  j = json::object();
  j["observable"] = s.observable.name();
  j["defined"] = s.defined;
  json worlds = json::array();
  for (const auto& w : s.worlds) {
    json row = {{"outcome", w.label},
                {"eigenvalue", w.eigenvalue},
                {"forward_weight", w.forward_weight},
                {"joint", w.joint},
                {"fixed_outcome_conditional", w.fixed_outcome_conditional},
                {"unity_disagreement", w.unity_disagreement}};
    row["standard_post_conditional"] = w.standard_post_conditional ? json(*w.standard_post_conditional) : json(nullptr);
    row["abl_conditional"] = w.abl_conditional ? json(*w.abl_conditional) : json(nullptr);
    worlds.push_back(std::move(row));
  }
  j["worlds"] = std::move(worlds);
}

void to_json(json& j, const CotenabilityVerdict& v) {
  j = json::object();
  j["holds"] = v.holds;
  j["witness"] = v.witness ? json(*v.witness) : json(nullptr);
}

void to_json(json& j, const ThreeBoxReport& r) {
  j = json::object();
  json boxes = json::array();
  for (const auto& b : r.boxes) {
    boxes.push_back({{"observable", b.observable.name()},
                     {"abl", b.abl},
                     {"forward_yes", b.forward_yes},
                     {"cotenability", b.cotenability}});
  }
  j["boxes"] = std::move(boxes);
}

}  // namespace counterfactual

}  // namespace abl
