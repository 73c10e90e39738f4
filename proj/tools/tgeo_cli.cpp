#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "tgeo/commands.hpp"
#include "tgeo/config.hpp"

namespace {

int fail(const tgeo::Error& e) {
  std::cerr << tgeo::error_json(e).dump() << '\n';
  return tgeo::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator for geodesic equations on circle diffeomorphisms, with conformal welding"};
  std::string verb;
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  std::vector<std::string> overrides;

  app.add_option("verb", verb, "simulate | weld | verify | certify | reproduce-paper")
      ->required()
      ->check(CLI::IsMember(tgeo::command_verbs()));
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed of the verification generator (overrides verify.seed)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--override", overrides, "dotted key=value, e.g. simulation.dt=5e-5 (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(tgeo::validation_error("UsageError", e.what()));
  }

  if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
  if (seed >= 0) overrides.push_back("verify.seed=" + std::to_string(seed));

  try {
    const tgeo::ExperimentConfig config =
        config_path.empty() ? tgeo::parse_config("", overrides) : tgeo::load_config(config_path, overrides);
    const tgeo::CommandOutcome outcome = tgeo::run_command(verb, config);
    std::cout << outcome.manifest.dump(2) << '\n';
    return outcome.exit_code;
  } catch (const tgeo::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(tgeo::numeric_error("InternalError", e.what()));
  }
}
