#include "tgeo/inertia.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "tgeo/errors.hpp"

namespace tgeo {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Wunsch: return "wunsch";
    case OperatorKind::EWP: return "ewp";
    case OperatorKind::CLM: return "clm";
  }
  return "unknown";
}

OperatorKind parse_operator_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "wunsch") return OperatorKind::Wunsch;
  if (s == "ewp") return OperatorKind::EWP;
  if (s == "clm") return OperatorKind::CLM;
  throw validation_error("UnknownEquation", "unknown equation '" + name + "' (expected wunsch, ewp or clm)");
}

double InertiaOperator::symbol(int n) const noexcept {
  const double a = std::abs(static_cast<double>(n));
  if (kind_ == OperatorKind::EWP) return a * (a * a - 1.0);
  return a;
}

std::vector<int> InertiaOperator::kernel_modes() const {
  if (kind_ == OperatorKind::EWP) return {-1, 0, 1};
  return {0};
}

bool InertiaOperator::in_kernel(int n) const noexcept {
  return n == 0 || (kind_ == OperatorKind::EWP && std::abs(n) == 1);
}

FourierField apply_inertia(const InertiaOperator& op, const FourierField& u) {
  return u.map_modes([&op](int n) { return cplx(op.symbol(n), 0.0); });
}

namespace {

void gate(const FourierField& f, int max_mode, double rel_tol, const char* code, const char* what) {
  const double limit = rel_tol * f.max_abs_coeff();
  for (int n = 0; n <= max_mode; ++n) {
    const double a = std::abs(f.coeff(n));
    if (a > limit) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: |coeff(%d)| = %.3e exceeds %.3e", what, n, a, limit);
      throw numeric_error(code, buf);
    }
  }
}

}  // namespace

FourierField invert_inertia(const InertiaOperator& op, const FourierField& m, double rel_tol) {
  gate(m, op.kind() == OperatorKind::EWP ? 1 : 0, rel_tol, "KernelContamination",
       "momentum has weight on the inertia kernel");
  return m.map_modes([&op](int n) { return op.in_kernel(n) ? cplx{} : cplx(1.0 / op.symbol(n), 0.0); });
}

FourierField project_representative(const InertiaOperator& op, const FourierField& u) {
  return u.with_modes_zeroed(op.kernel_modes());
}

FourierField helmholtz_inverse_restricted(const FourierField& f, double rel_tol) {
  gate(f, 1, rel_tol, "ResonantModes", "resonant modes |n| <= 1 are present");
  return f.map_modes([](int n) {
    return n <= 1 ? cplx{} : cplx(1.0 / (1.0 - static_cast<double>(n) * n), 0.0);
  });
}

}  // namespace tgeo
