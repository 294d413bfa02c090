#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace abl::cli {

inline constexpr std::string_view kToolName = "abl-lab";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kSeedEnvVar = "ABL_LAB_SEED";
inline constexpr std::uint64_t kDefaultSeed = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitZeroDenominator = 3,
};

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool json = false;
  std::optional<std::string> observable;
  std::optional<std::uint64_t> trials;
  std::size_t steps = 16;
  bool sphere = false;
  unsigned threads = 0;
};

struct RunManifest {
  std::string command;
  std::optional<std::string> config_digest;
  std::optional<std::uint64_t> seed;
  std::string tool_version{kToolVersion};
  std::vector<std::string> outputs;
};

nlohmann::json to_json(const RunManifest& m);

/// --seed, then the config's "seed", then ABL_LAB_SEED, then kDefaultSeed.
/// Throws ConfigError when the environment value is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config,
                           const char* env_value);

/// Runs one subcommand; all errors are mapped to exit codes and reported on err.
int run_command(std::string_view command, const Options& options, std::ostream& out, std::ostream& err);

}  // namespace abl::cli
