#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdiff/pointset.hpp"

namespace rdiff {

struct CommandResult {
  nlohmann::json report;
  /// Output files (name, contents); report.json is always first.
  std::vector<std::pair<std::string, std::string>> files;
  /// Human-readable summary for standard output.
  std::string text;
  bool pass = false;
};

struct CommandOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  int threads = 1;
  bool timestamps = true;
};

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Parses a point set description and returns it with the fully resolved description.
std::pair<PointSet, nlohmann::json> pointset_from_json(const nlohmann::json& j, std::uint64_t default_seed);

/// Runs one command entirely in memory. Throws Error with ErrorCode::Config on
/// malformed configuration; nothing is written by this function.
CommandResult run_command(const std::string& command, const nlohmann::json& config, const CommandOptions& opt);

}  // namespace rdiff
