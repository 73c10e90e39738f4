#pragma once

#include <span>
#include <string>
#include <vector>

#include "tgeo/fourier_field.hpp"

namespace tgeo {

struct TrajectoryRecord;

/// F = -u u'' - H(u H u''), the nonlocal force in the slope equations.
/// The result is exact for band-limited u (its band is at most N - 1).
FourierField compute_F(const FourierField& u);

/// F = 2 sum_{n>=1} (2n - 1) |phi_n|^2 with phi_n = sum_{m>=n} c_m e^{i m theta},
/// summed pointwise on a grid and analyzed back to a field of band N.
FourierField F_series(const FourierField& u);

/// Quadrature used by F_integral: trapezoid in psi on the circle, and
/// Gauss-Legendre in radius times trapezoid in angle on the disc.
struct DiscQuadrature {
  int circle_nodes = 256;
  int radial_nodes = 64;
  int angular_nodes = 256;
};

/// F(theta) from the difference-quotient representation
///   (1/pi) int |Y(e^{i theta}, e^{i psi})|^2 dpsi + (4/pi) int_D |dY/dw(w, e^{i theta})|^2 dA,
/// Y(w, z) = (Phi(w) - Phi(z)) / (w - z), Phi(z) = sum_{n>=1} c_n z^n.
double F_integral(const FourierField& u, double theta, const DiscQuadrature& q = {});
/// Batched form; the disc samples of Phi are shared between angles.
std::vector<double> F_integral(const FourierField& u, std::span<const double> thetas,
                               const DiscQuadrature& q = {});

/// G = H (1 + d^2)^{-1} [2 u' H u' - u'' H u'']. Band 2N (exact).
/// ResonantModes propagates from the restricted Helmholtz inverse.
FourierField compute_G(const FourierField& u);

/// h_k = sum_{n=1}^{k-1} n (k - n) f_n f_{k-n} for k = 0..2N (h_0 = h_1 = 0),
/// so that H(f' H f') = 2 Re sum_{k>=2} h_k e^{i k theta}.
std::vector<cplx> transfer_coefficients(const FourierField& f);

struct SeminormTriple {
  double half = 0.0;
  double one = 0.0;
  double three_halves = 0.0;
};
SeminormTriple seminorms(const FourierField& u);

/// Outcome of checking a computed sup-norm against an analytic bound.
struct BoundReport {
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  SeminormTriple seminorms;
  /// Growth-rate constant; only set by growth_monitor.
  double constant = 0.0;

  bool passed(double tol = 0.0) const { return slack >= -tol; }
};

/// max F <= (1/pi) |u|^2_{3/2} + (pi/2) |u|^2_1. Throws BoundViolated when the
/// slack is below -tol * max(1, bound).
BoundReport bound_F(const FourierField& u, double tol = 1e-9);
/// |G|_inf <= 8 pi |u|^2_{1/2} + 4 pi |u|^2_{3/2}.
BoundReport bound_G(const FourierField& u, double tol = 1e-9);

/// A point where u0' < 0 and omega0 = H u0' = 0; the Wunsch solution from
/// u0 breaks along the trajectory starting there.
struct BlowupCertificate {
  double theta0 = 0.0;
  double u0_slope = 0.0;
  double omega0_value = 0.0;
  double tolerance = 0.0;
};

/// theta0 is the global maximizer of H u0 (a critical point of H u0 is a
/// zero of omega0). Throws CertificateFailed if u0'(theta0) >= 0.
BlowupCertificate certify_blowup(const FourierField& u0);

/// Rate constant C in d/dt |u_theta|_inf <= C E0 for EWP representatives
/// (modes |n| >= 2): 1/pi + (pi/2)(2/3) + 8 pi (1/3) + 4 pi.
double growth_constant();

/// Checks |u_theta(t)|_inf <= |u0'|_inf + C E0 t on every sample of an EWP
/// record. The reported value/bound are taken at the sample of least slack.
BoundReport growth_monitor(const TrajectoryRecord& record, double E0);

}  // namespace tgeo
