#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgeo/fourier_field.hpp"
#include "tgeo/inertia.hpp"

namespace tgeo {

struct SimulationConfig {
  OperatorKind kind = OperatorKind::Wunsch;
  int band_limit = 256;
  /// Lagrangian grid size; 0 selects 2N.
  int lagrangian_points = 0;
  double dt = 1e-4;
  double t_fin = 0.5;
  /// Blowup is declared when min eta_theta drops below slope_threshold or the
  /// energy fraction in the top third of the modes exceeds tail_threshold.
  double slope_threshold = 1e-3;
  double tail_threshold = 0.01;
  /// Diagnostics are recorded every `sample_every` steps.
  int sample_every = 10;
  std::vector<double> snapshot_times;
  bool continue_past_blowup = false;
  /// Number of halvings of dt used to shrink the blowup bracket.
  int refine_levels = 2;

  void validate() const;
  int grid_points() const { return lagrangian_points > 0 ? lagrangian_points : 2 * band_limit; }
};

/// Momentum omega and its velocity u = Lambda^{-1} omega at time t.
struct SolutionState {
  double t = 0.0;
  FourierField omega;
  FourierField u;

  /// Projects u onto the quotient representative first.
  static SolutionState from_velocity(const InertiaOperator& op, const FourierField& u, double t = 0.0);
  static SolutionState from_momentum(const InertiaOperator& op, const FourierField& omega, double t = 0.0);
};

/// Lifted flow samples eta(theta_j) and eta_theta(theta_j), theta_j = 2 pi j / M.
struct LagrangianState {
  std::vector<double> theta;
  std::vector<double> eta;
  std::vector<double> eta_theta;

  static LagrangianState identity(int m);
  int size() const { return static_cast<int>(theta.size()); }
  double min_eta_theta() const;
};

struct Diagnostics {
  double t = 0.0;
  double energy = 0.0;
  double min_u_theta = 0.0;
  double max_abs_u_theta = 0.0;
  double max_abs_u = 0.0;
  double tail_fraction = 0.0;
  double min_eta_theta = 1.0;
};

struct Snapshot {
  SolutionState state;
  LagrangianState flow;
};

struct BlowupVerdict {
  bool detected = false;
  /// Last healthy and first unhealthy sample times.
  double t_healthy = 0.0;
  double t_unhealthy = 0.0;
  /// "slope" or "tail".
  std::string trigger;
  /// dt halvings actually applied to the bracket.
  int refinements = 0;
};

struct TrajectoryRecord {
  OperatorKind kind = OperatorKind::Wunsch;
  FourierField initial_velocity;
  std::vector<Diagnostics> samples;
  std::vector<Snapshot> snapshots;
  /// Requested snapshot times the run did not reach, with the reason.
  std::vector<std::pair<double, std::string>> missing_snapshots;
  /// Last healthy sample before the first unhealthy one, kept for refinement.
  std::optional<Snapshot> checkpoint;
  BlowupVerdict verdict;
  std::string termination;
};

/// d omega / dt for a given state.
using MomentumRhs = std::function<FourierField(const SolutionState&)>;

/// -(u omega_theta + 2 u_theta omega), dealiased, kernel modes projected out.
FourierField eulerian_rhs(const InertiaOperator& op, const SolutionState& state);
/// (H omega) omega, dealiased.
FourierField clm_rhs(const SolutionState& state);
/// eulerian_rhs for Wunsch/EWP, clm_rhs for CLM.
MomentumRhs momentum_rhs(const InertiaOperator& op);

/// Velocities of the four classical RK4 stages.
using StageVelocities = std::array<FourierField, 4>;

/// One classical RK4 step of omega; u is re-derived by invert_inertia.
/// Throws NonFiniteState.
SolutionState step_rk4(const MomentumRhs& rhs, const InertiaOperator& op, const SolutionState& state,
                       double dt, StageVelocities* stages = nullptr);

/// RK4 step of eta_t = u(eta), eta_theta_t = u_theta(eta) eta_theta with the
/// velocity of each stage supplied. With transport off eta is frozen (CLM).
LagrangianState advance_flow(const StageVelocities& stages, const LagrangianState& lag, double dt,
                             bool transport = true);
/// Flow step driven by the Eulerian RK4 stages of `state`.
LagrangianState advance_flow(const InertiaOperator& op, const SolutionState& state,
                             const LagrangianState& lag, double dt);

/// max_j |eta_theta^2 omega(t, eta) - omega0(theta_j)|.
double conservation_residual(const SolutionState& state, const LagrangianState& lag,
                             const FourierField& omega0);

/// omega0^2 / eta_theta^3 - F(eta) eta_theta. Throws DegenerateSlope.
double wunsch_lagrangian_accel(double omega0_at_theta, double eta_theta, double F_at_eta);

/// (-F + G)(eta(theta_j)), the rate of u_theta along particle paths for EWP.
std::vector<double> ewp_slope_rate(const InertiaOperator& op, const SolutionState& state,
                                   const LagrangianState& lag);

/// Energy-weighted fraction of modes |n| > 2N/3.
double tail_fraction(const InertiaOperator& op, const FourierField& u);
/// 2 pi sum symbol(n) |c_n|^2.
double energy(const InertiaOperator& op, const FourierField& u);
Diagnostics diagnose(const InertiaOperator& op, const SolutionState& state, const LagrangianState& lag);

/// Integrates from u0 to t_fin (or the first unhealthy sample) and calls
/// detect_blowup on the result.
TrajectoryRecord simulate(const SimulationConfig& config, const FourierField& u0);

/// Brackets the first unhealthy sample; refines by re-running from the
/// checkpoint with halved dt. Throws InconclusiveResolution when the tail
/// trigger fires without a downward slope trend.
BlowupVerdict detect_blowup(const TrajectoryRecord& record, const SimulationConfig& config);

/// `t,energy,min_u_theta,max_abs_u,tail_fraction,min_eta_theta`
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
/// `theta,u,eta,eta_theta`
void write_grid_csv(std::ostream& out, const Snapshot& snapshot);

}  // namespace tgeo
