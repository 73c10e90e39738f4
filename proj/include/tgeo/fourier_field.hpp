#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tgeo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// One real Fourier mode, amplitude * cos(mode * theta + phase).
struct TrigMode {
  int mode = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// A real 2*pi-periodic trigonometric polynomial
///   f(theta) = sum_{n=-N}^{N} c_n e^{i n theta},  c_{-n} = conj(c_n).
///
/// The full coefficient range is stored. Construction checks the conjugate
/// symmetry and finiteness of the input and then symmetrizes exactly, so every
/// instance represents a real-valued function.
class FourierField {
 public:
  /// The zero field with band limit 1.
  FourierField();
  /// The zero field with the given band limit.
  explicit FourierField(int band_limit);
  /// Coefficients for n = -N..N (size 2N+1). Throws InvalidField when the
  /// sequence is not conjugate symmetric to roundoff or has non-finite entries.
  FourierField(int band_limit, std::vector<cplx> coeffs);

  /// Builds the field from c_0..c_N; negative modes are the conjugates.
  static FourierField from_nonnegative(int band_limit, std::span<const cplx> c);
  /// Sum of amplitude * cos(mode * theta + phase) terms.
  static FourierField from_modes(int band_limit, std::span<const TrigMode> modes);
  static FourierField constant(int band_limit, double value);
  static FourierField cos_mode(int band_limit, int n, double amplitude = 1.0);
  static FourierField sin_mode(int band_limit, int n, double amplitude = 1.0);
  /// Analysis of samples on the uniform grid theta_j = 2 pi j / M, keeping
  /// modes |n| <= band_limit. Requires M >= 2 * band_limit + 1.
  static FourierField from_samples(std::span<const double> samples, int band_limit);

  int band_limit() const noexcept { return band_; }
  /// Coefficient of e^{i n theta}; zero outside the band.
  cplx coeff(int n) const noexcept;
  std::span<const cplx> coeffs() const noexcept { return c_; }
  double max_abs_coeff() const noexcept;
  bool is_zero() const noexcept { return max_abs_coeff() == 0.0; }

  /// Values on the uniform grid of m >= 2N+1 points.
  std::vector<double> synthesize(int m) const;
  /// Zero-pads or truncates to a new band limit.
  FourierField resized(int band_limit) const;
  /// f(theta - shift).
  FourierField rotated(double shift) const;
  /// Same field with the listed modes (and their mirrors) set to zero.
  FourierField with_modes_zeroed(std::span<const int> modes) const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(double s);

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(FourierField a, double s) { return a *= s; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }
  friend FourierField operator-(FourierField a) { return a *= -1.0; }

  /// Applies a Fourier multiplier given on n >= 0; the value at -n is taken
  /// as the conjugate so the result stays real.
  template <class Symbol>
  FourierField map_modes(Symbol&& symbol) const {
    std::vector<cplx> out(c_.size());
    for (int n = 0; n <= band_; ++n) {
      const cplx v = symbol(n) * c_[static_cast<std::size_t>(band_ + n)];
      out[static_cast<std::size_t>(band_ + n)] = v;
      out[static_cast<std::size_t>(band_ - n)] = std::conj(v);
    }
    return FourierField(band_, std::move(out), Trusted{});
  }

 private:
  struct Trusted {};
  FourierField(int band_limit, std::vector<cplx> coeffs, Trusted);

  int band_;
  std::vector<cplx> c_;
};

/// Max |a_n - b_n| over the union of both bands.
double coeff_distance(const FourierField& a, const FourierField& b);

/// H e^{in theta} = -i sgn(n) e^{in theta}.
FourierField hilbert_transform(const FourierField& f);
/// Coefficient n multiplied by (i n)^order.
FourierField differentiate(const FourierField& f, int order = 1);

/// Dealiased product. The result has band limit `out_band` (default: the
/// larger input band); the grid is large enough that every retained mode is
/// the exact convolution coefficient.
FourierField multiply(const FourierField& f, const FourierField& g, int out_band = -1);

/// Direct mode summation at arbitrary angles.
std::vector<double> evaluate_at(const FourierField& f, std::span<const double> points);
double evaluate_at(const FourierField& f, double theta);
/// Values and first derivatives in a single pass.
void evaluate_with_derivative(const FourierField& f, std::span<const double> points,
                              std::span<double> values, std::span<double> derivatives);

enum class Seminorm { Half, One, ThreeHalves };

/// 2 pi sum_n w(n) |c_n|^2 with w = |n|, n^2, |n|(n^2-1).
double seminorm_sq(const FourierField& f, Seminorm r);

/// Location and value of an extremum found on a grid of 8N points and
/// polished by Newton iteration on f' inside one grid cell.
struct Extremum {
  double theta = 0.0;
  double value = 0.0;
};
Extremum max_value(const FourierField& f);
Extremum min_value(const FourierField& f);
double sup_norm(const FourierField& f);

/// CSV with header `n,re,im` and rows n = -N..N.
void write_csv(std::ostream& out, const FourierField& f);
std::string to_csv(const FourierField& f);
FourierField read_csv(std::istream& in);

}  // namespace tgeo
