#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "tgeo/config.hpp"
#include "tgeo/errors.hpp"

namespace tgeo {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// simulate, weld, verify, certify, reproduce-paper.
std::vector<std::string> command_verbs();

struct CommandOutcome {
  int exit_code = kExitSuccess;
  /// Contents of manifest.json: verb, config hash, per-file SHA-256 and the
  /// verb's verdict.
  nlohmann::json manifest;
};

/// Runs a verb and writes its artifacts plus manifest.json into
/// config.output_dir. Module errors propagate as tgeo::Error.
CommandOutcome run_command(const std::string& verb, const ExperimentConfig& config);

/// {"error": {"code", "category", "message"}}
nlohmann::json error_json(const Error& e);
int exit_code_for(const Error& e);

std::string sha256_hex(std::string_view data);

/// Reads a `theta,u,eta,eta_theta` grid CSV back into a Lagrangian state.
LagrangianState read_grid_csv(std::istream& in);

}  // namespace tgeo
