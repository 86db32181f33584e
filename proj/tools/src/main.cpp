#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "nlirf/errors.hpp"
#include "nlirf/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nlirf: nonlinear impulse responses, innovations and identification diagnostics"};
  app.footer(nlirf::config_schema_help());
  app.set_version_flag("--version", nlirf::kToolVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  run->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override mc.seed");
  run->add_option("--out", out_dir, "Override io.output_dir");

  auto* schema = app.add_subcommand("schema", "Print the config schema");

  CLI11_PARSE(app, argc, argv);

  if (schema->parsed()) {
    std::cout << nlirf::config_schema_help();
    return 0;
  }

  nlohmann::json doc;
  {
    std::ifstream f(config_path);
    try {
      doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "schema error at $: invalid JSON: " << e.what() << '\n';
      return 2;
    }
  }
  nlirf::ExperimentConfig config;
  try {
    std::optional<std::filesystem::path> out;
    if (out_dir) out = *out_dir;
    config = nlirf::parse_config(doc, seed, out);
  } catch (const nlirf::SchemaError& e) {
    std::cerr << "schema error at " << e.path() << ": " << e.what() << '\n';
    return 2;
  }
  return nlirf::run_and_report(config, std::cout, std::cerr);
}
