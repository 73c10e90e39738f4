#include "tgeo/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "tgeo/analysis.hpp"
#include "tgeo/errors.hpp"
#include "tgeo/inertia.hpp"

namespace tgeo {

FieldGenerator::FieldGenerator(std::uint64_t seed, int max_band) : rng_(seed), max_band_(max_band) {
  if (max_band < 1) throw validation_error("InvalidArgument", "generator band must be at least 1");
}

double FieldGenerator::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

FourierField FieldGenerator::next() {
  return next(std::uniform_int_distribution<int>(1, max_band_)(rng_));
}

FourierField FieldGenerator::next(int band) {
  std::vector<cplx> c(static_cast<std::size_t>(band) + 1);
  for (;;) {
    bool nonzero = false;
    for (int n = 1; n <= band; ++n) {
      const double a = uniform(-1.0, 1.0);
      const double b = uniform(-1.0, 1.0);
      c[static_cast<std::size_t>(n)] = cplx(0.5 * a, -0.5 * b);
      nonzero = nonzero || a != 0.0 || b != 0.0;
    }
    if (nonzero) return FourierField::from_nonnegative(band, c);
  }
}

bool SuiteReport::passed() const {
  return !properties.empty() &&
         std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed(); });
}

const PropertyResult* SuiteReport::find(const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

struct Check {
  double error = 0.0;
  double tolerance = 0.0;
};

// Sum of |c_n|: a bound on the sup-norm, used to scale roundoff thresholds.
double abs_sum(const FourierField& f, int derivative = 0) {
  double s = 0.0;
  for (int n = -f.band_limit(); n <= f.band_limit(); ++n)
    s += std::pow(std::abs(double(n)), derivative) * std::abs(f.coeff(n));
  return s;
}

FourierField direct_product(const FourierField& f, const FourierField& g) {
  const int nf = f.band_limit(), ng = g.band_limit(), band = nf + ng;
  std::vector<cplx> c(static_cast<std::size_t>(2 * band + 1));
  for (int p = -nf; p <= nf; ++p)
    for (int q = -ng; q <= ng; ++q) c[static_cast<std::size_t>(p + q + band)] += f.coeff(p) * g.coeff(q);
  return FourierField(band, std::move(c));
}

using Property = std::function<Check(const FourierField&, FieldGenerator&, int)>;

struct NamedProperty {
  const char* name;
  Property check;
};

std::vector<NamedProperty> registry() {
  std::vector<NamedProperty> out;

  out.push_back({"hilbert_involution", [](const FourierField& f, FieldGenerator&, int) {
                   const FourierField hh = hilbert_transform(hilbert_transform(f));
                   return Check{coeff_distance(hh, -f), 1e-14 * std::max(1.0, f.max_abs_coeff())};
                 }});

  out.push_back({"hilbert_product", [](const FourierField& f, FieldGenerator&, int) {
                   const int b = 2 * f.band_limit();
                   const FourierField hf = hilbert_transform(f);
                   const FourierField lhs = 2.0 * hilbert_transform(multiply(f, hf, b));
                   const FourierField rhs = multiply(hf, hf, b) - multiply(f, f, b);
                   const double a = abs_sum(f);
                   return Check{coeff_distance(lhs, rhs), 1e-13 * a * a};
                 }});

  out.push_back({"fhf_low_modes", [](const FourierField& f, FieldGenerator&, int) {
                   const FourierField p = multiply(f, hilbert_transform(f), 2 * f.band_limit());
                   const double a = abs_sum(f);
                   return Check{std::max(std::abs(p.coeff(0)), std::abs(p.coeff(1))), 1e-13 * a * a};
                 }});

  out.push_back({"multiply_oracle", [](const FourierField& f, FieldGenerator& gen, int) {
                   const FourierField g = gen.next();
                   const FourierField fg = multiply(f, g, f.band_limit() + g.band_limit());
                   return Check{coeff_distance(fg, direct_product(f, g)), 1e-13 * abs_sum(f) * abs_sum(g)};
                 }});

  out.push_back({"seminorm_rotation", [](const FourierField& f, FieldGenerator& gen, int) {
                   const FourierField r = f.rotated(gen.uniform(0.0, kTwoPi));
                   double worst = 0.0;
                   for (Seminorm s : {Seminorm::Half, Seminorm::One, Seminorm::ThreeHalves}) {
                     const double a = seminorm_sq(f, s), b = seminorm_sq(r, s);
                     worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
                   }
                   return Check{worst, 1e-13};
                 }});

  out.push_back({"inertia_roundtrip", [](const FourierField& f, FieldGenerator&, int) {
                   double worst = 0.0;
                   for (OperatorKind k : {OperatorKind::Wunsch, OperatorKind::EWP, OperatorKind::CLM}) {
                     const InertiaOperator op(k);
                     const FourierField back = invert_inertia(op, apply_inertia(op, f));
                     worst = std::max(worst, coeff_distance(back, project_representative(op, f)));
                   }
                   return Check{worst, 1e-14 * std::max(1.0, f.max_abs_coeff())};
                 }});

  out.push_back({"F_series", [](const FourierField& f, FieldGenerator&, int) {
                   return Check{sup_norm(compute_F(f) - F_series(f)), 1e-10};
                 }});

  out.push_back({"F_integral", [](const FourierField& f, FieldGenerator& gen, int points) {
                   std::vector<double> thetas(static_cast<std::size_t>(points));
                   for (double& t : thetas) t = gen.uniform(0.0, kTwoPi);
                   const auto quad = F_integral(f, thetas);
                   const auto exact = evaluate_at(compute_F(f), thetas);
                   double worst = 0.0;
                   for (std::size_t i = 0; i < thetas.size(); ++i) worst = std::max(worst, std::abs(quad[i] - exact[i]));
                   return Check{worst, 1e-3};
                 }});

  out.push_back({"F_positive", [](const FourierField& f, FieldGenerator&, int) {
                   return Check{-min_value(compute_F(f)).value, 1e-10};
                 }});

  out.push_back({"bound_F", [](const FourierField& f, FieldGenerator&, int) {
                   const BoundReport r = bound_F(f, 1e300);
                   return Check{-r.slack, 0.0};
                 }});

  out.push_back({"bound_G", [](const FourierField& f, FieldGenerator&, int) {
                   const BoundReport r = bound_G(f, 1e300);
                   return Check{-r.slack, 0.0};
                 }});

  out.push_back({"transfer_coefficients", [](const FourierField& f, FieldGenerator&, int) {
                   const auto h = transfer_coefficients(f);
                   const FourierField fp = differentiate(f);
                   const FourierField direct =
                       hilbert_transform(multiply(fp, hilbert_transform(fp), 2 * f.band_limit()));
                   const FourierField series = FourierField::from_nonnegative(2 * f.band_limit(), h);
                   const double a = abs_sum(f, 1);
                   const double err = std::max({coeff_distance(direct, series), std::abs(h[0]), std::abs(h[1])});
                   return Check{err, 1e-13 * a * a};
                 }});

  out.push_back({"blowup_certificate", [](const FourierField& f, FieldGenerator&, int) {
                   const BlowupCertificate c = certify_blowup(f);
                   return Check{c.u0_slope < 0.0 ? 0.0 : 1.0, 0.0};
                 }});
  return out;
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> out;
  for (const auto& p : registry()) out.emplace_back(p.name);
  return out;
}

SuiteReport run_property_suite(std::uint64_t seed, int trials, int max_band, const std::vector<std::string>& only,
                               int integral_points) {
  if (trials < 1) throw validation_error("InvalidArgument", "verification needs at least one trial");
  const auto all = registry();
  for (const auto& name : only) {
    if (std::none_of(all.begin(), all.end(), [&](const NamedProperty& p) { return name == p.name; }))
      throw validation_error("UnknownProperty", "unknown property '" + name + "'");
  }

  SuiteReport report;
  report.seed = seed;
  report.trials = trials;
  report.max_band = max_band;
  std::uint64_t stream = 0;
  for (const auto& prop : all) {
    ++stream;
    if (!only.empty() && std::find(only.begin(), only.end(), prop.name) == only.end()) continue;
    // Each property draws from its own stream so subsets reproduce the full run.
    FieldGenerator gen(seed * 0x9E3779B97F4A7C15ULL + stream, max_band);
    PropertyResult r;
    r.name = prop.name;
    r.worst = -1e300;
    for (int t = 0; t < trials; ++t) {
      const FourierField f = gen.next();
      Check c;
      std::string failure;
      try {
        c = prop.check(f, gen, integral_points);
        if (!(c.error <= c.tolerance)) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "trial %d (N = %d): error %.3e exceeds %.3e", t, f.band_limit(), c.error,
                        c.tolerance);
          failure = buf;
        }
      } catch (const Error& e) {
        c.error = 1e300;
        failure = "trial " + std::to_string(t) + ": " + e.code() + ": " + e.what();
      }
      ++r.trials;
      if (c.error > r.worst || r.trials == 1) {
        r.worst = c.error;
        r.tolerance = c.tolerance;
      }
      if (!failure.empty()) {
        ++r.failures;
        if (r.first_failure.empty()) r.first_failure = failure;
      }
    }
    report.properties.push_back(std::move(r));
  }
  return report;
}

}  // namespace tgeo
