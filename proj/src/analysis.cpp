#include "tgeo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>

#include "tgeo/dynamics.hpp"
#include "tgeo/errors.hpp"
#include "tgeo/fft.hpp"
#include "tgeo/inertia.hpp"

namespace tgeo {
namespace {

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    x[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + z);
    w[static_cast<std::size_t>(i)] = 0.5 * wt;
    w[static_cast<std::size_t>(n - 1 - i)] = 0.5 * wt;
  }
}

// Phi and its first three derivatives at z by Horner's rule.
struct PhiValues {
  cplx f, d1, d2, d3;
};

PhiValues phi_at(std::span<const cplx> c, cplx z) {
  // c[n] for n = 0..N with c[0] = 0.
  PhiValues v{};
  for (std::size_t n = c.size(); n-- > 0;) {
    v.d3 = v.d3 * z + 3.0 * v.d2;
    v.d2 = v.d2 * z + 2.0 * v.d1;
    v.d1 = v.d1 * z + v.f;
    v.f = v.f * z + c[n];
  }
  return v;
}

constexpr double kDiagonalCutoff = 1e-6;

}  // namespace

FourierField compute_F(const FourierField& u) {
  const FourierField upp = differentiate(u, 2);
  const FourierField a = multiply(u, upp);
  const FourierField b = hilbert_transform(multiply(u, hilbert_transform(upp)));
  return -(a + b);
}

FourierField F_series(const FourierField& u) {
  // Pointwise sums and the analysis are both carried in long double: F is a
  // sum of up to N positive terms of size |u|_1^2 and is an oracle for
  // compute_F, so it should not share its roundoff.
  using lcplx = std::complex<long double>;
  const int band = u.band_limit();
  const int m = 2 * band + 2;
  std::vector<long double> values(static_cast<std::size_t>(m));
  std::vector<lcplx> terms(static_cast<std::size_t>(band + 1));
  for (int j = 0; j < m; ++j) {
    const long double theta = 2.0L * std::numbers::pi_v<long double> * j / m;
    for (int n = 1; n <= band; ++n)
      terms[static_cast<std::size_t>(n)] = lcplx(u.coeff(n)) * std::polar(1.0L, n * theta);
    lcplx tail{};
    long double sum = 0.0L;
    for (int n = band; n >= 1; --n) {
      tail += terms[static_cast<std::size_t>(n)];
      sum += (2.0L * n - 1.0L) * std::norm(tail);
    }
    values[static_cast<std::size_t>(j)] = 2.0L * sum;
  }
  std::vector<cplx> c(static_cast<std::size_t>(band) + 1);
  for (int k = 0; k <= band; ++k) {
    lcplx acc{};
    for (int j = 0; j < m; ++j)
      acc += values[static_cast<std::size_t>(j)] * std::polar(1.0L, -2.0L * std::numbers::pi_v<long double> * k * j / m);
    c[static_cast<std::size_t>(k)] = cplx(acc / static_cast<long double>(m));
  }
  return FourierField::from_nonnegative(band, c);
}

std::vector<double> F_integral(const FourierField& u, std::span<const double> thetas,
                               const DiscQuadrature& q) {
  std::vector<cplx> c(static_cast<std::size_t>(u.band_limit() + 1));
  for (int n = 1; n <= u.band_limit(); ++n) c[static_cast<std::size_t>(n)] = u.coeff(n);

  std::vector<double> rx, rw;
  gauss_legendre(q.radial_nodes, rx, rw);
  struct DiscNode {
    cplx w;
    double weight;
    cplx f, d1;
  };
  std::vector<DiscNode> disc;
  disc.reserve(static_cast<std::size_t>(q.radial_nodes * q.angular_nodes));
  const double dphi = kTwoPi / q.angular_nodes;
  for (int i = 0; i < q.radial_nodes; ++i) {
    for (int l = 0; l < q.angular_nodes; ++l) {
      const cplx w = std::polar(rx[static_cast<std::size_t>(i)], l * dphi);
      const PhiValues v = phi_at(c, w);
      disc.push_back({w, rw[static_cast<std::size_t>(i)] * rx[static_cast<std::size_t>(i)] * dphi, v.f, v.d1});
    }
  }
  std::vector<cplx> circle_pts(static_cast<std::size_t>(q.circle_nodes));
  std::vector<cplx> circle_phi(circle_pts.size());
  for (int k = 0; k < q.circle_nodes; ++k) {
    circle_pts[static_cast<std::size_t>(k)] = std::polar(1.0, kTwoPi * k / q.circle_nodes);
    circle_phi[static_cast<std::size_t>(k)] = phi_at(c, circle_pts[static_cast<std::size_t>(k)]).f;
  }

  std::vector<double> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    const cplx z = std::polar(1.0, theta);
    const PhiValues pz = phi_at(c, z);

    double boundary = 0.0;
    for (std::size_t k = 0; k < circle_pts.size(); ++k) {
      const cplx d = circle_pts[k] - z;
      const cplx y = std::abs(d) < kDiagonalCutoff ? pz.d1 + 0.5 * pz.d2 * d : (circle_phi[k] - pz.f) / d;
      boundary += std::norm(y);
    }
    boundary *= (kTwoPi / q.circle_nodes) / kPi;

    double interior = 0.0;
    for (const auto& node : disc) {
      const cplx d = node.w - z;
      const cplx dy = std::abs(d) < kDiagonalCutoff ? 0.5 * pz.d2 + pz.d3 * d / 3.0
                                                     : (node.d1 * d - (node.f - pz.f)) / (d * d);
      interior += node.weight * std::norm(dy);
    }
    interior *= 4.0 / kPi;
    out.push_back(boundary + interior);
  }
  return out;
}

double F_integral(const FourierField& u, double theta, const DiscQuadrature& q) {
  return F_integral(u, std::span(&theta, 1), q).front();
}

FourierField compute_G(const FourierField& u) {
  const int band = 2 * u.band_limit();
  const FourierField up = differentiate(u, 1);
  const FourierField upp = differentiate(u, 2);
  const FourierField interior =
      2.0 * multiply(up, hilbert_transform(up), band) - multiply(upp, hilbert_transform(upp), band);
  return hilbert_transform(helmholtz_inverse_restricted(interior));
}

std::vector<cplx> transfer_coefficients(const FourierField& f) {
  const int band = f.band_limit();
  std::vector<cplx> h(static_cast<std::size_t>(2 * band + 1));
  for (int k = 2; k <= 2 * band; ++k) {
    cplx s{};
    for (int n = std::max(1, k - band); n <= std::min(k - 1, band); ++n)
      s += static_cast<double>(n) * (k - n) * f.coeff(n) * f.coeff(k - n);
    h[static_cast<std::size_t>(k)] = s;
  }
  return h;
}

SeminormTriple seminorms(const FourierField& u) {
  return {seminorm_sq(u, Seminorm::Half), seminorm_sq(u, Seminorm::One), seminorm_sq(u, Seminorm::ThreeHalves)};
}

namespace {

BoundReport check_bound(std::string name, double value, double bound, const SeminormTriple& s, double tol) {
  BoundReport r{std::move(name), value, bound, bound - value, s, 0.0};
  if (r.slack < -tol * std::max(1.0, bound)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: value %.12g exceeds bound %.12g", r.quantity.c_str(), value, bound);
    throw numeric_error("BoundViolated", buf);
  }
  return r;
}

}  // namespace

BoundReport bound_F(const FourierField& u, double tol) {
  const SeminormTriple s = seminorms(u);
  const double value = max_value(compute_F(u)).value;
  return check_bound("F", value, s.three_halves / kPi + 0.5 * kPi * s.one, s, tol);
}

BoundReport bound_G(const FourierField& u, double tol) {
  const SeminormTriple s = seminorms(u);
  const double value = sup_norm(compute_G(u));
  return check_bound("G", value, 8.0 * kPi * s.half + 4.0 * kPi * s.three_halves, s, tol);
}

BlowupCertificate certify_blowup(const FourierField& u0) {
  if (std::abs(u0.coeff(0)) > kDefaultGateTolerance * std::max(1.0, u0.max_abs_coeff()))
    throw validation_error("PreconditionViolated", "certify_blowup needs a mean-zero field");
  if (u0.with_modes_zeroed(std::vector<int>{0}).is_zero())
    throw validation_error("PreconditionViolated", "certify_blowup needs a non-constant field");

  const FourierField g = hilbert_transform(u0);       // harmonic conjugate on the circle
  const FourierField omega0 = differentiate(g, 1);    // g' = H u0'
  const FourierField domega0 = differentiate(omega0, 1);
  const FourierField du0 = differentiate(u0, 1);

  const int m = std::max(8 * u0.band_limit(), 16);
  const auto gv = g.synthesize(m);
  const double h = kTwoPi / m;
  const double gmax = *std::max_element(gv.begin(), gv.end());
  const double gmin = *std::min_element(gv.begin(), gv.end());
  double omega_scale = 0.0;
  for (int n = 1; n <= omega0.band_limit(); ++n) omega_scale += 2.0 * std::abs(omega0.coeff(n));
  const double tolerance = 1e-10 * std::max(omega_scale, 1e-300);

  // Near-ties between local maxima are all refined; the best refined value wins.
  double best_value = -1e300;
  double best_theta = 0.0;
  for (int j = 0; j < m; ++j) {
    const double prev = gv[static_cast<std::size_t>((j + m - 1) % m)];
    const double next = gv[static_cast<std::size_t>((j + 1) % m)];
    const double gj = gv[static_cast<std::size_t>(j)];
    if (gj < prev || gj < next) continue;
    if (gj < gmax - 0.05 * (gmax - gmin)) continue;
    // Safeguarded Newton for omega0 = 0 on [theta_{j-1}, theta_{j+1}], where
    // omega0 goes from >= 0 to <= 0 at a local maximum of g.
    double lo = (j - 1) * h, hi = (j + 1) * h;
    double flo = evaluate_at(omega0, lo), fhi = evaluate_at(omega0, hi);
    double x = j * h;
    if (flo >= 0.0 && fhi <= 0.0) {
      for (int it = 0; it < 100; ++it) {
        const double fx = evaluate_at(omega0, x);
        if (std::abs(fx) <= 1e-3 * tolerance) break;
        if (fx > 0.0) lo = x; else hi = x;
        const double dfx = evaluate_at(domega0, x);
        double nx = dfx != 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) < 1e-15) { x = nx; break; }
        x = nx;
      }
    }
    const double gx = evaluate_at(g, x);
    if (gx > best_value) {
      best_value = gx;
      best_theta = x;
    }
  }
  BlowupCertificate cert;
  cert.theta0 = std::fmod(best_theta + 2.0 * kTwoPi, kTwoPi);
  cert.u0_slope = evaluate_at(du0, cert.theta0);
  cert.omega0_value = evaluate_at(omega0, cert.theta0);
  cert.tolerance = tolerance;
  if (!(cert.u0_slope < 0.0) || std::abs(cert.omega0_value) > tolerance) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "no certificate at theta0 = %.15g: u0' = %.3e, omega0 = %.3e",
                  cert.theta0, cert.u0_slope, cert.omega0_value);
    throw numeric_error("CertificateFailed", buf);
  }
  return cert;
}

double growth_constant() { return 1.0 / kPi + 0.5 * kPi * (2.0 / 3.0) + 8.0 * kPi / 3.0 + 4.0 * kPi; }

BoundReport growth_monitor(const TrajectoryRecord& record, double E0) {
  if (record.kind != OperatorKind::EWP)
    throw validation_error("PreconditionViolated", "growth monitor applies to EWP trajectories only");
  if (record.samples.empty()) throw validation_error("PreconditionViolated", "empty trajectory record");
  const double C = growth_constant();
  const double initial = record.samples.front().max_abs_u_theta;
  BoundReport r;
  r.quantity = "growth_monitor";
  r.seminorms = seminorms(record.initial_velocity);
  r.constant = C;
  bool first = true;
  for (const auto& s : record.samples) {
    const double bound = initial + C * E0 * s.t;
    const double slack = bound - s.max_abs_u_theta;
    if (first || slack < r.slack) {
      r.value = s.max_abs_u_theta;
      r.bound = bound;
      r.slack = slack;
      first = false;
    }
  }
  return r;
}

}  // namespace tgeo
