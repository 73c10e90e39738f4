#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "tgeo/fourier_field.hpp"

namespace tgeo {

struct LagrangianState;

/// Kernel prefactor that makes the welding of a Moebius boundary map the
/// unit circle: i / (4 pi), so that the two cotangent integrals reduce to
/// (i/2)(H - conjugated H).
inline const cplx kNormalizedPrefactor{0.0, 1.0 / (4.0 * kPi)};
/// The bare (i/2) form with no 1/(2 pi) on the cotangent integrals.
inline const cplx kBarePrefactor{0.0, 0.5};

struct WeldingOptions {
  cplx prefactor = kNormalizedPrefactor;
  /// Diffeomorphisms with eta' at or below this floor are refused.
  double slope_floor = 1e-3;
  double condition_limit = 1e12;
  /// Largest admissible fraction of interior-map energy in modes n < 0.
  double holomorphy_tolerance = 1e-6;
  double scale_tolerance = 1e-12;
};

/// Circle diffeomorphism sampled on theta_j = 2 pi j / M as a lift
/// eta(theta + 2 pi) = eta(theta) + 2 pi, with derivative samples.
/// The trigonometric interpolant of eta - id gives off-grid values.
class CircleDiffeo {
 public:
  /// Throws SlopeCollapse if the lift is not strictly increasing or eta' <= 0.
  CircleDiffeo(std::vector<double> eta, std::vector<double> eta_prime);

  static CircleDiffeo identity(int m);
  static CircleDiffeo rotation(int m, double alpha);
  static CircleDiffeo from_function(int m, const std::function<double(double)>& eta,
                                    const std::function<double(double)>& eta_prime);
  static CircleDiffeo from_lagrangian(const LagrangianState& lag);

  int size() const { return static_cast<int>(eta_.size()); }
  double theta(int j) const { return kTwoPi * j / size(); }
  const std::vector<double>& eta() const { return eta_; }
  const std::vector<double>& eta_prime() const { return eta_prime_; }

  /// Interpolated eta and eta' at an arbitrary angle.
  double value(double theta) const;
  double derivative(double theta) const;
  void value_and_derivative(std::span<const double> thetas, std::span<double> values,
                            std::span<double> derivatives) const;
  /// max |spectral derivative of the samples - eta'|.
  double consistency_defect() const;
  /// Preimage of psi under the interpolant (monotone bracketing + Newton).
  double preimage(double psi) const;

 private:
  std::vector<double> eta_;
  std::vector<double> eta_prime_;
  FourierField periodic_;
};

/// Samples of eta^{-1} and (eta^{-1})' = 1 / eta'(eta^{-1}). Throws
/// SlopeCollapse when eta' <= slope_floor anywhere.
CircleDiffeo invert_circle_diffeo(const CircleDiffeo& eta, const WeldingOptions& opts = {});
/// max_j |eta(eta^{-1}(theta_j)) - theta_j| using the interpolant of eta.
double composition_residual(const CircleDiffeo& eta, const CircleDiffeo& inverse);

/// Nystrom matrix of the welding operator K with trapezoid weights,
///   K_jk = p (2 pi / M) [cot((theta_j - psi_k)/2) - a'(psi_k) cot((a(theta_j) - a(psi_k))/2)],
/// a = eta^{-1}, and diagonal p (2 pi / M) a''/a'.
Eigen::MatrixXcd welding_matrix(const CircleDiffeo& eta, const WeldingOptions& opts = {});

struct WeldingSolution {
  /// W(psi_j): boundary values of the exterior map on the uniform grid.
  std::vector<cplx> boundary;
  CircleDiffeo diffeo;
  CircleDiffeo inverse;
  /// max |(I + K) W - e^{i theta}|.
  double residual = 0.0;
  /// Reciprocal condition estimate of I + K.
  double rcond = 0.0;
};

/// Solves (I + K) W = e^{i theta} by LU. Throws IllConditioned.
WeldingSolution solve_welding(const CircleDiffeo& eta, const WeldingOptions& opts = {});

/// Fourier coefficients a_n, n = -M/2 .. M/2 - 1, of the interior boundary
/// values W(eta(theta)).
struct InteriorCoefficients {
  std::vector<cplx> coeffs;
  double negative_energy_fraction = 0.0;

  int size() const { return static_cast<int>(coeffs.size()); }
  cplx operator()(int n) const;
};

/// Throws HolomorphyViolation when the n < 0 energy fraction exceeds tolerance.
InteriorCoefficients interior_coefficients(const WeldingSolution& sol, const WeldingOptions& opts = {});

struct NormalizedCurve {
  /// (W(psi_j) - a0) / a1.
  std::vector<cplx> points;
  InteriorCoefficients coefficients;
  cplx translation;  // a0 before normalization
  cplx scale;        // a1 before normalization
};

/// Interior map normalized to a0 = 0, a1 = 1. Throws DegenerateScale.
NormalizedCurve normalize_curve(const WeldingSolution& sol, const InteriorCoefficients& a,
                                const WeldingOptions& opts = {});

struct WeldingDefect {
  /// Integral-equation residual at grid midpoints, relative to the right side.
  double equation = 0.0;
  /// n < 0 energy fraction of the curve composed with eta on a doubled grid.
  double holomorphy = 0.0;
  double total() const { return std::max(equation, holomorphy); }
};
WeldingDefect welding_defect(const NormalizedCurve& curve, const CircleDiffeo& eta, const WeldingOptions& opts = {});
/// Round-trip defect: welding_defect(...).total().
double welding_residual(const NormalizedCurve& curve, const CircleDiffeo& eta, const WeldingOptions& opts = {});

/// Disc automorphism z -> e^{i alpha} (z - a) / (1 - conj(a) z), |a| < 1.
struct MobiusMap {
  double alpha = 0.0;
  cplx a{};

  cplx operator()(cplx z) const;
  /// Lifted boundary map theta -> arg(phi(e^{i theta})) sampled on m points.
  CircleDiffeo boundary_diffeo(int m) const;
};

/// The automorphism taking e^{i sources[k]} to e^{i targets[k]}. Throws
/// OrderMismatch if the triples have opposite cyclic orientation.
MobiusMap mobius_from_triple(const std::array<double, 3>& sources, const std::array<double, 3>& targets);

/// One-stop welding: solve, interior coefficients, normalization, defect.
struct WeldingResult {
  WeldingSolution solution;
  NormalizedCurve curve;
  WeldingDefect defect;
};
WeldingResult weld(const CircleDiffeo& eta, const WeldingOptions& opts = {});

}  // namespace tgeo
