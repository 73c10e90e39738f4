#include "tgeo/fourier_field.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tgeo/errors.hpp"
#include "tgeo/fft.hpp"

namespace tgeo {
namespace {

std::size_t idx(int band, int n) { return static_cast<std::size_t>(band + n); }

void check_band(int band) {
  if (band < 0) throw validation_error("InvalidField", "band limit must be nonnegative");
}

}  // namespace

FourierField::FourierField() : FourierField(1) {}

FourierField::FourierField(int band_limit) : band_(band_limit) {
  check_band(band_limit);
  c_.assign(static_cast<std::size_t>(2 * band_limit + 1), cplx{});
}

FourierField::FourierField(int band_limit, std::vector<cplx> coeffs, Trusted)
    : band_(band_limit), c_(std::move(coeffs)) {}

FourierField::FourierField(int band_limit, std::vector<cplx> coeffs) : band_(band_limit) {
  check_band(band_limit);
  if (coeffs.size() != static_cast<std::size_t>(2 * band_limit + 1))
    throw validation_error("InvalidField", "coefficient count must be 2N+1");
  double scale = 0.0;
  for (const auto& c : coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw validation_error("InvalidField", "non-finite Fourier coefficient");
    scale = std::max(scale, std::abs(c));
  }
  for (int n = 0; n <= band_limit; ++n) {
    const cplx p = coeffs[idx(band_limit, n)];
    const cplx m = coeffs[idx(band_limit, -n)];
    if (std::abs(m - std::conj(p)) > 1e-11 * scale)
      throw validation_error("InvalidField",
                             "coefficients are not conjugate symmetric at mode " + std::to_string(n));
    const cplx sym = 0.5 * (p + std::conj(m));
    coeffs[idx(band_limit, n)] = sym;
    coeffs[idx(band_limit, -n)] = std::conj(sym);
  }
  c_ = std::move(coeffs);
}

FourierField FourierField::from_nonnegative(int band_limit, std::span<const cplx> c) {
  check_band(band_limit);
  std::vector<cplx> full(static_cast<std::size_t>(2 * band_limit + 1));
  for (int n = 0; n <= band_limit && n < static_cast<int>(c.size()); ++n) {
    const cplx v = n == 0 ? cplx(c[0].real(), 0.0) : c[static_cast<std::size_t>(n)];
    full[idx(band_limit, n)] = v;
    full[idx(band_limit, -n)] = std::conj(v);
  }
  return FourierField(band_limit, std::move(full));
}

FourierField FourierField::from_modes(int band_limit, std::span<const TrigMode> modes) {
  std::vector<cplx> c(static_cast<std::size_t>(band_limit + 1));
  for (const auto& m : modes) {
    const int n = std::abs(m.mode);
    if (n > band_limit)
      throw validation_error("InvalidField", "mode " + std::to_string(m.mode) + " exceeds band limit");
    // cos(n t + p) = (e^{i(nt+p)} + e^{-i(nt+p)}) / 2; a negative mode flips the phase.
    const double phase = m.mode < 0 ? -m.phase : m.phase;
    if (n == 0)
      c[0] += m.amplitude * std::cos(phase);
    else
      c[static_cast<std::size_t>(n)] += 0.5 * m.amplitude * std::polar(1.0, phase);
  }
  return from_nonnegative(band_limit, c);
}

FourierField FourierField::constant(int band_limit, double value) {
  FourierField f(band_limit);
  f.c_[idx(band_limit, 0)] = value;
  return f;
}

FourierField FourierField::cos_mode(int band_limit, int n, double amplitude) {
  const TrigMode m{n, amplitude, 0.0};
  return from_modes(band_limit, std::span(&m, 1));
}

FourierField FourierField::sin_mode(int band_limit, int n, double amplitude) {
  const TrigMode m{n, amplitude, -0.5 * kPi};
  return from_modes(band_limit, std::span(&m, 1));
}

FourierField FourierField::from_samples(std::span<const double> samples, int band_limit) {
  const int m = static_cast<int>(samples.size());
  if (m < 2 * band_limit + 1)
    throw validation_error("InvalidField", "grid too coarse for requested band limit");
  const auto half = fft::forward_real(samples);
  std::vector<cplx> full(static_cast<std::size_t>(2 * band_limit + 1));
  const double inv = 1.0 / m;
  for (int n = 0; n <= band_limit; ++n) {
    cplx v = half[static_cast<std::size_t>(n)] * inv;
    if (n == 0) v.imag(0.0);
    full[idx(band_limit, n)] = v;
    full[idx(band_limit, -n)] = std::conj(v);
  }
  return FourierField(band_limit, std::move(full), Trusted{});
}

cplx FourierField::coeff(int n) const noexcept {
  if (n < -band_ || n > band_) return {};
  return c_[idx(band_, n)];
}

double FourierField::max_abs_coeff() const noexcept {
  double m = 0.0;
  for (const auto& c : c_) m = std::max(m, std::abs(c));
  return m;
}

std::vector<double> FourierField::synthesize(int m) const {
  if (m < 2 * band_ + 1) throw validation_error("InvalidField", "grid too coarse for synthesis");
  std::vector<cplx> half(static_cast<std::size_t>(m / 2 + 1));
  for (int n = 0; n <= band_; ++n) half[static_cast<std::size_t>(n)] = c_[idx(band_, n)];
  return fft::backward_real(half, m);
}

FourierField FourierField::resized(int band_limit) const {
  check_band(band_limit);
  std::vector<cplx> out(static_cast<std::size_t>(2 * band_limit + 1));
  const int keep = std::min(band_limit, band_);
  for (int n = -keep; n <= keep; ++n) out[idx(band_limit, n)] = c_[idx(band_, n)];
  return FourierField(band_limit, std::move(out), Trusted{});
}

FourierField FourierField::rotated(double shift) const {
  return map_modes([shift](int n) { return std::polar(1.0, -n * shift); });
}

FourierField FourierField::with_modes_zeroed(std::span<const int> modes) const {
  FourierField out = *this;
  for (int n : modes) {
    if (std::abs(n) > band_) continue;
    out.c_[idx(band_, n)] = 0.0;
    out.c_[idx(band_, -n)] = 0.0;
  }
  return out;
}

FourierField& FourierField::operator+=(const FourierField& other) {
  if (other.band_ > band_) *this = resized(other.band_);
  for (int n = -other.band_; n <= other.band_; ++n) c_[idx(band_, n)] += other.c_[idx(other.band_, n)];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  if (other.band_ > band_) *this = resized(other.band_);
  for (int n = -other.band_; n <= other.band_; ++n) c_[idx(band_, n)] -= other.c_[idx(other.band_, n)];
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  for (auto& c : c_) c *= s;
  return *this;
}

double coeff_distance(const FourierField& a, const FourierField& b) {
  const int band = std::max(a.band_limit(), b.band_limit());
  double d = 0.0;
  for (int n = -band; n <= band; ++n) d = std::max(d, std::abs(a.coeff(n) - b.coeff(n)));
  return d;
}

FourierField hilbert_transform(const FourierField& f) {
  return f.map_modes([](int n) { return n == 0 ? cplx{} : cplx(0.0, -1.0); });
}

FourierField differentiate(const FourierField& f, int order) {
  if (order < 1) throw validation_error("InvalidArgument", "derivative order must be positive");
  return f.map_modes([order](int n) { return std::pow(cplx(0.0, n), order); });
}

FourierField multiply(const FourierField& f, const FourierField& g, int out_band) {
  const int nf = f.band_limit();
  const int ng = g.band_limit();
  const int band = out_band < 0 ? std::max(nf, ng) : out_band;
  // A product mode k aliases onto k - M; retained modes stay exact when
  // M > nf + ng + band.
  const int m = fft::good_size(std::max({nf + ng + band + 1, 2 * std::max({nf, ng, band}) + 1, 4}));
  auto a = f.synthesize(m);
  const auto b = g.synthesize(m);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= b[j];
  return FourierField::from_samples(a, band);
}

void evaluate_with_derivative(const FourierField& f, std::span<const double> points,
                              std::span<double> values, std::span<double> derivatives) {
  const std::size_t np = points.size();
  const int band = f.band_limit();
  std::vector<double> br(np), bi(np), zr(np), zi(np);
  const double c0 = f.coeff(0).real();
  for (std::size_t j = 0; j < np; ++j) {
    br[j] = std::cos(points[j]);
    bi[j] = std::sin(points[j]);
    zr[j] = 1.0;
    zi[j] = 0.0;
    values[j] = c0;
    if (!derivatives.empty()) derivatives[j] = 0.0;
  }
  const bool with_d = !derivatives.empty();
  for (int n = 1; n <= band; ++n) {
    const cplx c = f.coeff(n);
    const double cr = 2.0 * c.real();
    const double ci = 2.0 * c.imag();
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < np; ++j) {
      const double r = zr[j] * br[j] - zi[j] * bi[j];
      const double i = zr[j] * bi[j] + zi[j] * br[j];
      zr[j] = r;
      zi[j] = i;
      values[j] += cr * r - ci * i;
      if (with_d) derivatives[j] -= dn * (cr * i + ci * r);
    }
    // Re-seed periodically so the power recurrence does not drift.
    if (n % 64 == 0) {
      for (std::size_t j = 0; j < np; ++j) {
        zr[j] = std::cos((n)*points[j]);
        zi[j] = std::sin((n)*points[j]);
      }
    }
  }
}

std::vector<double> evaluate_at(const FourierField& f, std::span<const double> points) {
  std::vector<double> v(points.size());
  evaluate_with_derivative(f, points, v, {});
  return v;
}

double evaluate_at(const FourierField& f, double theta) {
  double v = 0.0;
  evaluate_with_derivative(f, std::span(&theta, 1), std::span(&v, 1), {});
  return v;
}

double seminorm_sq(const FourierField& f, Seminorm r) {
  double sum = 0.0;
  for (int n = 1; n <= f.band_limit(); ++n) {
    const double a = static_cast<double>(n);
    double w = 0.0;
    switch (r) {
      case Seminorm::Half: w = a; break;
      case Seminorm::One: w = a * a; break;
      case Seminorm::ThreeHalves: w = a * (a * a - 1.0); break;
    }
    sum += w * std::norm(f.coeff(n));
  }
  // Both signs of n contribute equally.
  return kTwoPi * 2.0 * sum;
}

namespace {

// Second derivative and first derivative at a point by direct summation.
void derivatives_at(const FourierField& f, double theta, double& d1, double& d2) {
  d1 = 0.0;
  d2 = 0.0;
  for (int n = 1; n <= f.band_limit(); ++n) {
    const cplx z = 2.0 * f.coeff(n) * std::polar(1.0, n * theta);
    d1 -= n * z.imag();
    d2 -= static_cast<double>(n) * n * z.real();
  }
}

Extremum extremum(const FourierField& f, double sign) {
  const int m = std::max(8 * f.band_limit(), 16);
  const auto v = f.synthesize(m);
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (sign * v[j] > sign * v[best]) best = j;
  const double h = kTwoPi / m;
  Extremum e{h * static_cast<double>(best), v[best]};
  // Newton on f' within one grid cell of the discrete extremum; the polished
  // point is kept only if it improves the value.
  const double lo = e.theta - h, hi = e.theta + h;
  double t = e.theta;
  for (int it = 0; it < 30; ++it) {
    double d1 = 0.0, d2 = 0.0;
    derivatives_at(f, t, d1, d2);
    if (!(sign * d2 < 0.0)) break;
    const double next = t - d1 / d2;
    if (!(next >= lo && next <= hi)) break;
    const bool done = std::abs(next - t) < 1e-15 * std::max(1.0, std::abs(t));
    t = next;
    if (done) break;
  }
  const double val = evaluate_at(f, t);
  if (sign * val > sign * e.value) e = {t, val};
  e.theta = std::fmod(e.theta + kTwoPi, kTwoPi);
  return e;
}

}  // namespace

Extremum max_value(const FourierField& f) { return extremum(f, 1.0); }
Extremum min_value(const FourierField& f) { return extremum(f, -1.0); }

double sup_norm(const FourierField& f) {
  return std::max(std::abs(max_value(f).value), std::abs(min_value(f).value));
}

void write_csv(std::ostream& out, const FourierField& f) {
  out << "n,re,im\n";
  char buf[96];
  for (int n = -f.band_limit(); n <= f.band_limit(); ++n) {
    const cplx c = f.coeff(n);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", n, c.real(), c.imag());
    out << buf;
  }
}

std::string to_csv(const FourierField& f) {
  std::ostringstream os;
  write_csv(os, f);
  return os.str();
}

FourierField read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("InvalidFieldCsv", "empty field CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,re,im") throw validation_error("InvalidFieldCsv", "expected header n,re,im");
  std::vector<int> ns;
  std::vector<cplx> cs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
      throw validation_error("InvalidFieldCsv", "line " + std::to_string(lineno) + ": expected 3 columns");
    try {
      ns.push_back(std::stoi(a));
      cs.emplace_back(std::stod(b), std::stod(c));
    } catch (const std::exception&) {
      throw validation_error("InvalidFieldCsv", "line " + std::to_string(lineno) + ": not a number");
    }
  }
  if (ns.empty() || ns.size() % 2 == 0)
    throw validation_error("InvalidFieldCsv", "expected rows n = -N..N");
  const int band = static_cast<int>(ns.size() / 2);
  for (std::size_t k = 0; k < ns.size(); ++k)
    if (ns[k] != static_cast<int>(k) - band)
      throw validation_error("InvalidFieldCsv", "rows must list n = -N..N in order");
  return FourierField(band, std::move(cs));
}

}  // namespace tgeo
