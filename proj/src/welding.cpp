#include "tgeo/welding.hpp"

#include <algorithm>
#include <cmath>

#include "tgeo/dynamics.hpp"
#include "tgeo/errors.hpp"
#include "tgeo/fft.hpp"

namespace tgeo {
namespace {

constexpr double kNewtonTol = 1e-15;

// Trigonometric interpolant of real samples on the uniform grid. For even M
// the Nyquist coefficient is split evenly between +-M/2 so the interpolant
// passes through every sample.
FourierField real_interpolant(std::span<const double> samples) {
  const int m = static_cast<int>(samples.size());
  const auto half = fft::forward_real(samples);
  const int band = m / 2;
  std::vector<cplx> c(static_cast<std::size_t>(band) + 1);
  for (int k = 0; k <= band; ++k) c[static_cast<std::size_t>(k)] = half[static_cast<std::size_t>(k)] / double(m);
  if (m % 2 == 0) c[static_cast<std::size_t>(band)] *= 0.5;
  return FourierField::from_nonnegative(band, c);
}

// Spectral derivative of periodic samples; the Nyquist mode is dropped.
std::vector<double> spectral_derivative(std::span<const double> samples) {
  const int m = static_cast<int>(samples.size());
  auto half = fft::forward_real(samples);
  for (std::size_t k = 0; k < half.size(); ++k) half[k] *= cplx(0.0, double(k)) / double(m);
  if (m % 2 == 0) half.back() = 0.0;
  return fft::backward_real(half, m);
}

// Complex trigonometric interpolant: coefficients for n = -M/2 .. M/2 with
// the even-M Nyquist term split between the two ends.
struct ComplexInterpolant {
  std::vector<cplx> c;  // index n + M/2, size 2*(M/2)+1
  int half = 0;

  explicit ComplexInterpolant(std::span<const cplx> samples) {
    const int m = static_cast<int>(samples.size());
    half = m / 2;
    const auto spec = fft::dft(samples, -1);
    c.assign(static_cast<std::size_t>(2 * half + 1), cplx{});
    for (int k = 0; k < m; ++k) {
      const cplx v = spec[static_cast<std::size_t>(k)] / double(m);
      if (m % 2 == 0 && k == half) {
        c[0] += 0.5 * v;
        c[static_cast<std::size_t>(2 * half)] += 0.5 * v;
      } else {
        const int n = k <= half ? k : k - m;
        c[static_cast<std::size_t>(n + half)] += v;
      }
    }
  }

  cplx operator()(double theta) const {
    cplx sum{};
    cplx z = std::polar(1.0, theta);
    cplx power{};
    for (int i = 0; i <= 2 * half; ++i) {
      if (i % 64 == 0) power = std::polar(1.0, double(i - half) * theta);
      sum += c[static_cast<std::size_t>(i)] * power;
      power *= z;
    }
    return sum;
  }
};

// Coefficients n = -M/2 .. M/2 - 1 of uniform complex samples.
std::vector<cplx> complex_coefficients(std::span<const cplx> samples) {
  const int m = static_cast<int>(samples.size());
  const int half = m / 2;
  const auto spec = fft::dft(samples, -1);
  std::vector<cplx> out(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const int n = k < m - half ? k : k - m;
    out[static_cast<std::size_t>(n + half)] = spec[static_cast<std::size_t>(k)] / double(m);
  }
  return out;
}

double negative_fraction(std::span<const cplx> coeffs, int half) {
  double neg = 0.0, total = 0.0;
  for (int i = 0; i < static_cast<int>(coeffs.size()); ++i) {
    const double e = std::norm(coeffs[static_cast<std::size_t>(i)]);
    total += e;
    if (i < half) neg += e;
  }
  return total > 0.0 ? neg / total : 0.0;
}

double cot_half(double x) { return 1.0 / std::tan(0.5 * x); }

}  // namespace

CircleDiffeo::CircleDiffeo(std::vector<double> eta, std::vector<double> eta_prime)
    : eta_(std::move(eta)), eta_prime_(std::move(eta_prime)) {
  const int m = static_cast<int>(eta_.size());
  if (m < 4 || eta_prime_.size() != eta_.size())
    throw validation_error("InvalidDiffeo", "circle diffeomorphism needs matching eta/eta' samples, M >= 4");
  for (int j = 0; j < m; ++j) {
    if (!std::isfinite(eta_[j]) || !std::isfinite(eta_prime_[j]))
      throw validation_error("InvalidDiffeo", "non-finite diffeomorphism sample");
  }
  for (int j = 0; j < m; ++j) {
    const double next = j + 1 < m ? eta_[j + 1] : eta_[0] + kTwoPi;
    if (!(next > eta_[j]) || !(eta_prime_[j] > 0.0))
      throw numeric_error("SlopeCollapse", "lift is not strictly increasing at sample " + std::to_string(j));
  }
  std::vector<double> periodic(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) periodic[j] = eta_[j] - theta(j);
  periodic_ = real_interpolant(periodic);
}

CircleDiffeo CircleDiffeo::identity(int m) { return rotation(m, 0.0); }

CircleDiffeo CircleDiffeo::rotation(int m, double alpha) {
  return from_function(m, [alpha](double t) { return t + alpha; }, [](double) { return 1.0; });
}

CircleDiffeo CircleDiffeo::from_function(int m, const std::function<double(double)>& eta,
                                         const std::function<double(double)>& eta_prime) {
  if (m < 4) throw validation_error("InvalidDiffeo", "circle diffeomorphism needs M >= 4");
  std::vector<double> v(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double t = kTwoPi * j / m;
    v[j] = eta(t);
    d[j] = eta_prime(t);
  }
  return CircleDiffeo(std::move(v), std::move(d));
}

CircleDiffeo CircleDiffeo::from_lagrangian(const LagrangianState& lag) {
  return CircleDiffeo(lag.eta, lag.eta_theta);
}

double CircleDiffeo::value(double theta) const { return theta + evaluate_at(periodic_, theta); }

double CircleDiffeo::derivative(double theta) const {
  double v = 0.0, d = 0.0;
  evaluate_with_derivative(periodic_, std::span<const double>(&theta, 1), std::span<double>(&v, 1),
                           std::span<double>(&d, 1));
  return 1.0 + d;
}

void CircleDiffeo::value_and_derivative(std::span<const double> thetas, std::span<double> values,
                                        std::span<double> derivatives) const {
  evaluate_with_derivative(periodic_, thetas, values, derivatives);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    values[i] += thetas[i];
    derivatives[i] += 1.0;
  }
}

double CircleDiffeo::consistency_defect() const {
  const int m = size();
  std::vector<double> periodic(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) periodic[j] = eta_[j] - theta(j);
  const auto d = spectral_derivative(periodic);
  double worst = 0.0;
  for (int j = 0; j < m; ++j) worst = std::max(worst, std::abs(1.0 + d[j] - eta_prime_[j]));
  return worst;
}

double CircleDiffeo::preimage(double psi) const {
  const int m = size();
  const double q = std::floor((psi - eta_[0]) / kTwoPi);
  const double s = psi - kTwoPi * q;
  // eta_[j] <= s < eta_[j+1], with eta_[m] = eta_[0] + 2 pi.
  const auto it = std::upper_bound(eta_.begin(), eta_.end(), s);
  const int j = static_cast<int>(it - eta_.begin()) - 1;
  double lo = theta(j);
  double hi = j + 1 < m ? theta(j + 1) : kTwoPi;
  const double flo = eta_[j] - s;
  const double fhi = (j + 1 < m ? eta_[j + 1] : eta_[0] + kTwoPi) - s;
  double x = fhi > flo ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
  for (int iter = 0; iter < 100; ++iter) {
    double v = 0.0, d = 0.0;
    value_and_derivative(std::span<const double>(&x, 1), std::span<double>(&v, 1), std::span<double>(&d, 1));
    const double f = v - s;
    if (f == 0.0) break;
    (f > 0.0 ? hi : lo) = x;
    double next = x - f / d;
    if (!(d > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - x) <= kNewtonTol * std::max(1.0, std::abs(x)) || hi - lo <= 1e-16;
    x = next;
    if (done) break;
  }
  return x + kTwoPi * q;
}

CircleDiffeo invert_circle_diffeo(const CircleDiffeo& eta, const WeldingOptions& opts) {
  const int m = eta.size();
  const auto slope_check = [&](double d, double where) {
    if (!(d > opts.slope_floor))
      throw numeric_error("SlopeCollapse", "eta' = " + std::to_string(d) + " at theta = " + std::to_string(where) +
                                               " is below the slope floor");
  };
  for (int j = 0; j < m; ++j) slope_check(eta.eta_prime()[j], eta.theta(j));

  std::vector<double> a(static_cast<std::size_t>(m)), ap(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) a[j] = eta.preimage(eta.theta(j));
  std::vector<double> v(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m));
  eta.value_and_derivative(a, v, d);
  for (int j = 0; j < m; ++j) {
    slope_check(d[j], a[j]);
    ap[j] = 1.0 / d[j];
  }
  return CircleDiffeo(std::move(a), std::move(ap));
}

double composition_residual(const CircleDiffeo& eta, const CircleDiffeo& inverse) {
  const int m = inverse.size();
  std::vector<double> v(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m));
  eta.value_and_derivative(inverse.eta(), v, d);
  double worst = 0.0;
  for (int j = 0; j < m; ++j) worst = std::max(worst, std::abs(v[j] - inverse.theta(j)));
  return worst;
}

namespace {

Eigen::MatrixXcd assemble(const CircleDiffeo& inv, cplx prefactor) {
  const int m = inv.size();
  const auto& a = inv.eta();
  const auto& ap = inv.eta_prime();
  const auto app = spectral_derivative(ap);
  const cplx w = prefactor * (kTwoPi / m);
  Eigen::MatrixXcd k(m, m);
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < m; ++l) {
      if (j == l) {
        k(j, l) = w * (app[j] / ap[j]);
      } else {
        k(j, l) = w * (cot_half(inv.theta(j) - inv.theta(l)) - ap[l] * cot_half(a[j] - a[l]));
      }
    }
  }
  return k;
}

}  // namespace

Eigen::MatrixXcd welding_matrix(const CircleDiffeo& eta, const WeldingOptions& opts) {
  return assemble(invert_circle_diffeo(eta, opts), opts.prefactor);
}

WeldingSolution solve_welding(const CircleDiffeo& eta, const WeldingOptions& opts) {
  const int m = eta.size();
  CircleDiffeo inv = invert_circle_diffeo(eta, opts);
  Eigen::MatrixXcd a = assemble(inv, opts.prefactor);
  a += Eigen::MatrixXcd::Identity(m, m);
  Eigen::VectorXcd rhs(m);
  for (int j = 0; j < m; ++j) rhs(j) = std::polar(1.0, eta.theta(j));

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond * opts.condition_limit > 1.0))
    throw numeric_error("IllConditioned", "welding system condition estimate " + std::to_string(1.0 / rcond) +
                                              " exceeds " + std::to_string(opts.condition_limit));
  const Eigen::VectorXcd w = lu.solve(rhs);

  WeldingSolution sol{std::vector<cplx>(w.data(), w.data() + m), eta, std::move(inv),
                      (a * w - rhs).cwiseAbs().maxCoeff(), rcond};
  return sol;
}

cplx InteriorCoefficients::operator()(int n) const {
  const int half = size() / 2;
  const int i = n + half;
  if (i < 0 || i >= size()) return {};
  return coeffs[static_cast<std::size_t>(i)];
}

InteriorCoefficients interior_coefficients(const WeldingSolution& sol, const WeldingOptions& opts) {
  const int m = static_cast<int>(sol.boundary.size());
  const ComplexInterpolant w(sol.boundary);
  std::vector<cplx> inner(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) inner[j] = w(sol.diffeo.eta()[j]);

  InteriorCoefficients out;
  out.coeffs = complex_coefficients(inner);
  out.negative_energy_fraction = negative_fraction(out.coeffs, m / 2);
  if (out.negative_energy_fraction > opts.holomorphy_tolerance)
    throw numeric_error("HolomorphyViolation", "interior map has negative-mode energy fraction " +
                                                   std::to_string(out.negative_energy_fraction));
  return out;
}

NormalizedCurve normalize_curve(const WeldingSolution& sol, const InteriorCoefficients& a,
                                const WeldingOptions& opts) {
  const cplx a0 = a(0);
  const cplx a1 = a(1);
  double scale = 0.0;
  for (const cplx& c : a.coeffs) scale = std::max(scale, std::abs(c));
  if (!(std::abs(a1) > opts.scale_tolerance * std::max(1.0, scale)))
    throw numeric_error("DegenerateScale", "interior map has vanishing derivative at the origin");

  NormalizedCurve out;
  out.translation = a0;
  out.scale = a1;
  out.points.reserve(sol.boundary.size());
  for (const cplx& w : sol.boundary) out.points.push_back((w - a0) / a1);
  out.coefficients = a;
  for (cplx& c : out.coefficients.coeffs) c /= a1;
  const int half = a.size() / 2;
  out.coefficients.coeffs[static_cast<std::size_t>(half)] = 0.0;
  out.coefficients.coeffs[static_cast<std::size_t>(half + 1)] = 1.0;
  return out;
}

WeldingDefect welding_defect(const NormalizedCurve& curve, const CircleDiffeo& eta, const WeldingOptions& opts) {
  const int m = eta.size();
  if (static_cast<int>(curve.points.size()) != m)
    throw validation_error("SizeMismatch", "curve and diffeomorphism sample counts differ");
  WeldingDefect out;
  const ComplexInterpolant c(curve.points);

  // (I + K) C = (e^{i theta} - a0) / a1 at the grid midpoints.
  const CircleDiffeo inv = invert_circle_diffeo(eta, opts);
  const auto& ak = inv.eta();
  const auto& apk = inv.eta_prime();
  const cplx w = opts.prefactor * (kTwoPi / m);
  double worst = 0.0, rhs_scale = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = eta.theta(j) + kPi / m;
    const double at = eta.preimage(t);
    cplx kc{};
    for (int l = 0; l < m; ++l)
      kc += (cot_half(t - inv.theta(l)) - apk[l] * cot_half(at - ak[l])) * curve.points[static_cast<std::size_t>(l)];
    const cplx rhs = (std::polar(1.0, t) - curve.translation) / curve.scale;
    worst = std::max(worst, std::abs(c(t) + w * kc - rhs));
    rhs_scale = std::max(rhs_scale, std::abs(rhs));
  }
  out.equation = worst / std::max(rhs_scale, 1e-300);

  // Holomorphy of C o eta on a doubled grid.
  const int m2 = 2 * m;
  std::vector<double> t2(static_cast<std::size_t>(m2)), v(static_cast<std::size_t>(m2)), d(static_cast<std::size_t>(m2));
  for (int j = 0; j < m2; ++j) t2[j] = kTwoPi * j / m2;
  eta.value_and_derivative(t2, v, d);
  std::vector<cplx> inner(static_cast<std::size_t>(m2));
  for (int j = 0; j < m2; ++j) inner[j] = c(v[j]);
  out.holomorphy = negative_fraction(complex_coefficients(inner), m);
  return out;
}

double welding_residual(const NormalizedCurve& curve, const CircleDiffeo& eta, const WeldingOptions& opts) {
  return welding_defect(curve, eta, opts).total();
}

cplx MobiusMap::operator()(cplx z) const {
  return std::polar(1.0, alpha) * (z - a) / (1.0 - std::conj(a) * z);
}

CircleDiffeo MobiusMap::boundary_diffeo(int m) const {
  if (m < 4) throw validation_error("InvalidDiffeo", "circle diffeomorphism needs M >= 4");
  std::vector<double> eta(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m));
  const double r = 1.0 - std::norm(a);
  for (int j = 0; j < m; ++j) {
    const double t = kTwoPi * j / m;
    const cplx z = std::polar(1.0, t);
    const double angle = std::arg((*this)(z));
    eta[j] = j == 0 ? angle : eta[j - 1] + std::remainder(angle - eta[j - 1], kTwoPi);
    d[j] = r / std::norm(1.0 - std::conj(a) * z);
  }
  return CircleDiffeo(std::move(eta), std::move(d));
}

MobiusMap mobius_from_triple(const std::array<double, 3>& sources, const std::array<double, 3>& targets) {
  const auto wrap = [](double x) {
    const double r = std::fmod(x, kTwoPi);
    return r < 0.0 ? r + kTwoPi : r;
  };
  const auto check_distinct = [&](const std::array<double, 3>& s, const char* which) {
    for (int i = 0; i < 3; ++i) {
      const double gap = wrap(s[(i + 1) % 3] - s[i]);
      if (!std::isfinite(s[i]) || gap < 1e-12 || gap > kTwoPi - 1e-12)
        throw validation_error("InvalidTriple", std::string(which) + " angles must be finite and distinct");
    }
  };
  check_distinct(sources, "source");
  check_distinct(targets, "target");
  const auto ccw = [&](const std::array<double, 3>& s) { return wrap(s[1] - s[0]) < wrap(s[2] - s[0]); };
  if (ccw(sources) != ccw(targets))
    throw validation_error("OrderMismatch", "source and target triples have opposite cyclic order");

  // T maps (p0, p1, p2) to (0, 1, inf); phi = T_w^{-1} o T_z.
  using Mat = std::array<cplx, 4>;
  const auto cross = [](const std::array<double, 3>& s) {
    const cplx p0 = std::polar(1.0, s[0]), p1 = std::polar(1.0, s[1]), p2 = std::polar(1.0, s[2]);
    return Mat{p1 - p2, -p0 * (p1 - p2), p1 - p0, -p2 * (p1 - p0)};
  };
  const Mat tz = cross(sources);
  const Mat tw = cross(targets);
  const Mat adj{tw[3], -tw[1], -tw[2], tw[0]};
  const Mat phi{adj[0] * tz[0] + adj[1] * tz[2], adj[0] * tz[1] + adj[1] * tz[3],
                adj[2] * tz[0] + adj[3] * tz[2], adj[2] * tz[1] + adj[3] * tz[3]};

  MobiusMap out;
  out.a = -phi[1] / phi[0];
  if (!(std::abs(out.a) < 1.0)) throw numeric_error("OrderMismatch", "triples do not define a disc automorphism");
  const cplx z0 = std::polar(1.0, sources[0]);
  out.alpha = std::arg(std::polar(1.0, targets[0]) * (1.0 - std::conj(out.a) * z0) / (z0 - out.a));
  return out;
}

WeldingResult weld(const CircleDiffeo& eta, const WeldingOptions& opts) {
  WeldingSolution sol = solve_welding(eta, opts);
  const InteriorCoefficients a = interior_coefficients(sol, opts);
  NormalizedCurve curve = normalize_curve(sol, a, opts);
  const WeldingDefect defect = welding_defect(curve, eta, opts);
  return WeldingResult{std::move(sol), std::move(curve), defect};
}

}  // namespace tgeo
