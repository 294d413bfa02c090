#pragma once

// Scenario files: JSON documents describing a pre/post-selected system.
//
//   {
//     "name": "spin-45",
//     "dim": 2,
//     "pre":  {"bloch": {"theta_deg": 0, "phi_deg": 0}},
//     "post": {"amplitudes": [[1, 0], [1, 0]], "normalize": true},
//     "observables": [
//       {"name": "sigma_c", "spin": {"theta_deg": 45}},
//       {"name": "box1", "projector": [0]},
//       {"name": "custom", "outcomes": [{"label": "a", "eigenvalue": 1, "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}, ...]}
//     ],
//     "sequence": ["sigma_c"],
//     "final": "sigma_x",
//     "trials": 1000000,
//     "seed": 42
//   }
//
// Angles are degrees (radians = degrees * pi / 180). Amplitudes and matrix
// entries are [re, im] pairs. Unknown keys are rejected so that a parsed
// config re-serializes to a document equal to its source.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "abl/abl_rule.hpp"

namespace abl::cli {

/// Parse or validation failure. where() is "line:col" for syntax errors and a
/// JSON pointer for validation errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error(where + ": " + message), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct BlochSpec {
  double theta_deg = 0.0;
  std::optional<double> phi_deg;
};

struct AmplitudeSpec {
  std::vector<Complex> amplitudes;
  std::optional<bool> normalize;
};

struct StateSpec {
  std::variant<BlochSpec, AmplitudeSpec> form;
  std::optional<std::string> label;
};

struct ExplicitOutcomeSpec {
  std::string label;
  double eigenvalue = 0.0;
  std::vector<std::vector<Complex>> matrix;
};

struct ObservableSpec {
  std::string name;
  std::variant<BlochSpec, std::vector<std::size_t>, std::vector<ExplicitOutcomeSpec>> form;
};

struct ScenarioConfig {
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::size_t dim = 2;
  StateSpec pre;
  StateSpec post;
  std::vector<ObservableSpec> observables;
  std::optional<std::vector<std::string>> sequence;
  std::optional<std::string> final_observable;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::pair<std::string, std::string>> time_labels;
};

/// Built quantum objects for a validated config.
struct Scenario {
  PrePostContext ctx;
  std::vector<Observable> observables;
  MeasurementSequence sequence;
  /// The declared final observable, or yes/no on the post-selected state.
  Observable final_observable;

  /// Throws ConfigError on an unknown name.
  const Observable& observable(std::string_view name) const;
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);

/// Runs every quantum-core constructor; failures become ConfigError with a pointer.
Scenario build_scenario(const ScenarioConfig& config);

/// 64-bit FNV-1a over the compact dump of the canonical (sorted-key) JSON.
std::uint64_t config_digest(const ScenarioConfig& config);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string to_hex(std::uint64_t value);

}  // namespace abl::cli
