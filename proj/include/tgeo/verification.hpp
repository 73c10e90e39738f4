#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tgeo/fourier_field.hpp"

namespace tgeo {

/// Seeded source of random real trig polynomials
///   f = sum_{n=1}^{N} a_n cos(n theta) + b_n sin(n theta),  a_n, b_n ~ U[-1, 1],
/// with N ~ U{1..max_band}. Never returns the zero field.
class FieldGenerator {
 public:
  explicit FieldGenerator(std::uint64_t seed, int max_band = 32);

  FourierField next();
  /// Same distribution with a fixed band limit.
  FourierField next(int band);
  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi);
  int max_band() const { return max_band_; }

 private:
  std::mt19937_64 rng_;
  int max_band_;
};

/// Outcome of one property checked over many random fields.
struct PropertyResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  /// Largest error (or most negative slack) seen, and the threshold used.
  double worst = 0.0;
  double tolerance = 0.0;
  std::string first_failure;

  bool passed() const { return failures == 0 && trials > 0; }
};

struct SuiteReport {
  std::uint64_t seed = 0;
  int trials = 0;
  int max_band = 0;
  std::vector<PropertyResult> properties;

  bool passed() const;
  const PropertyResult* find(const std::string& name) const;
};

/// Property names understood by run_property_suite.
std::vector<std::string> property_names();

/// Runs the named properties (all when empty) on `trials` random fields each.
/// F_integral comparisons use `integral_points` angles per field.
SuiteReport run_property_suite(std::uint64_t seed, int trials, int max_band = 32,
                               const std::vector<std::string>& only = {}, int integral_points = 8);

}  // namespace tgeo
