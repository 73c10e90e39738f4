#pragma once

#include <string>
#include <vector>

#include "tgeo/fourier_field.hpp"

namespace tgeo {

enum class OperatorKind { Wunsch, EWP, CLM };

std::string to_string(OperatorKind kind);
/// Accepts "wunsch", "ewp", "clm" (case-insensitive).
OperatorKind parse_operator_kind(const std::string& name);

/// Default threshold of the kernel/resonance gates, relative to the largest
/// coefficient magnitude of the gated field.
inline constexpr double kDefaultGateTolerance = 1e-10;

/// Fourier-multiplier inertia operator of an Euler-Arnold equation.
///   Wunsch, CLM: |n|           kernel {0}
///   EWP:         |n|(n^2 - 1)  kernel {-1, 0, 1}
class InertiaOperator {
 public:
  explicit InertiaOperator(OperatorKind kind) : kind_(kind) {}

  OperatorKind kind() const noexcept { return kind_; }
  double symbol(int n) const noexcept;
  std::vector<int> kernel_modes() const;
  bool in_kernel(int n) const noexcept;

 private:
  OperatorKind kind_;
};

/// m = Lambda u.
FourierField apply_inertia(const InertiaOperator& op, const FourierField& u);

/// u = Lambda^{-1} m on the complement of the kernel. Throws
/// KernelContamination when a kernel-mode coefficient of m exceeds
/// rel_tol * max|m_n|.
FourierField invert_inertia(const InertiaOperator& op, const FourierField& m,
                            double rel_tol = kDefaultGateTolerance);

/// Quotient representative: kernel-mode coefficients zeroed.
FourierField project_representative(const InertiaOperator& op, const FourierField& u);

/// (1 + d^2/dtheta^2)^{-1} restricted to modes |n| >= 2. Throws ResonantModes
/// when a coefficient with |n| <= 1 exceeds rel_tol * max|f_n|.
FourierField helmholtz_inverse_restricted(const FourierField& f,
                                          double rel_tol = kDefaultGateTolerance);

}  // namespace tgeo
