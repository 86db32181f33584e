#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "nlirf/model.hpp"

namespace nlirf {

inline constexpr const char* kToolVersion = "0.1.0";

struct ExperimentConfig {
  std::string command;
  nlohmann::json doc;  // the validated config, overrides applied
  std::uint64_t seed = 0;
  std::size_t replicates = 10000;
  unsigned workers = 1;
  std::optional<std::filesystem::path> input;
  std::filesystem::path output_dir;
};

/// Validates the top-level layout; throws SchemaError with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              std::optional<std::uint64_t> seed_override = std::nullopt,
                              std::optional<std::filesystem::path> out_override = std::nullopt);

struct RunResult {
  std::vector<std::string> artifacts;  // file names relative to the output directory
  std::string summary;                 // printed to stdout
};

/// Dispatches the command, writes artifacts and manifest.json.
RunResult run(const ExperimentConfig& config);

/// Maps exceptions to exit codes: 2 schema or input format, 3 numerical failure.
int run_and_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Header `t,<name>,...` with strictly consecutive integer t; throws ParseError with
/// the 1-based line number on ragged rows, missing or non-numeric cells and gaps in t.
Matrix ingest_csv(std::istream& in);
Matrix ingest_csv(const std::filesystem::path& path);

/// Human-readable JSON schema for every command.
std::string config_schema_help();

}  // namespace nlirf
