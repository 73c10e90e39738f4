#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tgeo/dynamics.hpp"
#include "tgeo/fourier_field.hpp"
#include "tgeo/inertia.hpp"
#include "tgeo/welding.hpp"

namespace tgeo {

/// Validated experiment description. Documents are INI-style with dotted
/// addressing (`simulation.dt`); see README for the key list.
struct ExperimentConfig {
  OperatorKind equation = OperatorKind::Wunsch;
  /// Initial velocity as trig modes, or a coefficient CSV (`n,re,im`).
  std::vector<TrigMode> modes;
  std::filesystem::path initial_csv;

  int band_limit = 256;
  int lagrangian_points = 512;
  double dt = 1e-4;
  double t_fin = 0.5;
  int sample_every = 10;
  std::vector<double> snapshot_times;

  double slope_threshold = 1e-3;
  double tail_threshold = 0.01;
  int refine_levels = 2;
  bool continue_past_blowup = false;

  bool weld = false;
  /// "normalized" (i / 4 pi) or "bare" (i / 2).
  std::string prefactor = "normalized";
  double slope_floor = 1e-3;
  /// Grid CSVs (`theta,u,eta,eta_theta`) to weld; empty means simulate first.
  std::vector<std::filesystem::path> weld_inputs;
  /// Perturbation modes of eta - id for a synthetic diffeomorphism.
  std::vector<TrigMode> eta_modes;

  std::uint64_t seed = 0;
  int verify_trials = 100;
  int verify_max_band = 32;

  std::filesystem::path output_dir = "out";
  bool svg = true;

  /// Canonical key=value rendering; its hash identifies the configuration.
  std::string canonical() const;

  FourierField initial_velocity() const;
  SimulationConfig simulation() const;
  WeldingOptions welding() const;
  /// Throws ValidationError.
  void validate() const;
};

/// Parses a document, applies `key=value` overrides (dotted keys), fills
/// defaults and validates. Relative paths resolve against `base_dir`.
/// Throws ParseError (with line number) or ValidationError.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// "2 1 sin, 3 0.5 cos, 4 0.2 0.3" -> modes (phase given as sin, cos or radians).
std::vector<TrigMode> parse_modes(const std::string& text);

}  // namespace tgeo
