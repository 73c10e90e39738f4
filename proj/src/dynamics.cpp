#include "tgeo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tgeo/analysis.hpp"
#include "tgeo/errors.hpp"
#include "tgeo/fft.hpp"

namespace tgeo {
namespace {

bool all_finite(const FourierField& f) {
  for (const auto& c : f.coeffs())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string fmt_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw validation_error("ValidationError", "dt must be positive");
  if (!(t_fin > 0.0)) throw validation_error("ValidationError", "t_fin must be positive");
  if (band_limit < 4) throw validation_error("ValidationError", "band limit N must be at least 4");
  if (!(slope_threshold > 0.0 && slope_threshold < 1.0))
    throw validation_error("ValidationError", "slope threshold must lie in (0,1)");
  if (!(tail_threshold > 0.0 && tail_threshold < 1.0))
    throw validation_error("ValidationError", "tail threshold must lie in (0,1)");
  if (sample_every < 1) throw validation_error("ValidationError", "sample_every must be at least 1");
  if (lagrangian_points < 0) throw validation_error("ValidationError", "Lagrangian grid size must be positive");
  if (refine_levels < 0) throw validation_error("ValidationError", "refine_levels must be nonnegative");
  for (double t : snapshot_times)
    if (t < 0.0 || t > t_fin) throw validation_error("ValidationError", "snapshot time outside [0, t_fin]");
}

SolutionState SolutionState::from_velocity(const InertiaOperator& op, const FourierField& u, double t) {
  SolutionState s;
  s.t = t;
  s.u = project_representative(op, u);
  s.omega = apply_inertia(op, s.u);
  return s;
}

SolutionState SolutionState::from_momentum(const InertiaOperator& op, const FourierField& omega, double t) {
  SolutionState s;
  s.t = t;
  s.omega = project_representative(op, omega);
  s.u = invert_inertia(op, omega);
  return s;
}

LagrangianState LagrangianState::identity(int m) {
  LagrangianState l;
  l.theta.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) l.theta[static_cast<std::size_t>(j)] = kTwoPi * j / m;
  l.eta = l.theta;
  l.eta_theta.assign(static_cast<std::size_t>(m), 1.0);
  return l;
}

double LagrangianState::min_eta_theta() const {
  return eta_theta.empty() ? 1.0 : *std::min_element(eta_theta.begin(), eta_theta.end());
}

FourierField eulerian_rhs(const InertiaOperator& op, const SolutionState& state) {
  const int band = std::max(state.omega.band_limit(), state.u.band_limit());
  const int m = fft::good_size(3 * band + 1);
  const auto u = state.u.synthesize(m);
  const auto ux = differentiate(state.u, 1).synthesize(m);
  const auto w = state.omega.synthesize(m);
  const auto wx = differentiate(state.omega, 1).synthesize(m);
  std::vector<double> r(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = -(u[j] * wx[j] + 2.0 * ux[j] * w[j]);
  return project_representative(op, FourierField::from_samples(r, band));
}

FourierField clm_rhs(const SolutionState& state) {
  return multiply(hilbert_transform(state.omega), state.omega);
}

MomentumRhs momentum_rhs(const InertiaOperator& op) {
  if (op.kind() == OperatorKind::CLM) return [](const SolutionState& s) { return clm_rhs(s); };
  return [op](const SolutionState& s) { return eulerian_rhs(op, s); };
}

SolutionState step_rk4(const MomentumRhs& rhs, const InertiaOperator& op, const SolutionState& state,
                       double dt, StageVelocities* stages) {
  if (!(dt > 0.0)) throw validation_error("ValidationError", "dt must be positive");
  const FourierField k1 = rhs(state);
  const SolutionState s2 = SolutionState::from_momentum(op, state.omega + (0.5 * dt) * k1, state.t + 0.5 * dt);
  const FourierField k2 = rhs(s2);
  const SolutionState s3 = SolutionState::from_momentum(op, state.omega + (0.5 * dt) * k2, state.t + 0.5 * dt);
  const FourierField k3 = rhs(s3);
  const SolutionState s4 = SolutionState::from_momentum(op, state.omega + dt * k3, state.t + dt);
  const FourierField k4 = rhs(s4);
  FourierField omega = state.omega + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(omega))
    throw numeric_error("NonFiniteState", "non-finite momentum at t = " + fmt_time(state.t + dt));
  if (stages) *stages = {state.u, s2.u, s3.u, s4.u};
  return SolutionState::from_momentum(op, omega, state.t + dt);
}

LagrangianState advance_flow(const StageVelocities& stages, const LagrangianState& lag, double dt,
                             bool transport) {
  const std::size_t m = lag.eta.size();
  std::vector<double> u(m), ux(m), eta(m), eta_th(m);
  std::array<std::vector<double>, 4> k_eta, k_slope;
  static constexpr double kStageFrac[4] = {0.0, 0.5, 0.5, 1.0};
  for (int s = 0; s < 4; ++s) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = kStageFrac[s] * dt;
      eta[j] = s == 0 ? lag.eta[j] : lag.eta[j] + a * k_eta[static_cast<std::size_t>(s - 1)][j];
      eta_th[j] = s == 0 ? lag.eta_theta[j] : lag.eta_theta[j] + a * k_slope[static_cast<std::size_t>(s - 1)][j];
    }
    evaluate_with_derivative(stages[static_cast<std::size_t>(s)], eta, u, ux);
    auto& ke = k_eta[static_cast<std::size_t>(s)];
    auto& ks = k_slope[static_cast<std::size_t>(s)];
    ke.resize(m);
    ks.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      ke[j] = transport ? u[j] : 0.0;
      ks[j] = ux[j] * eta_th[j];
    }
  }
  LagrangianState out = lag;
  for (std::size_t j = 0; j < m; ++j) {
    out.eta[j] += dt / 6.0 * (k_eta[0][j] + 2.0 * k_eta[1][j] + 2.0 * k_eta[2][j] + k_eta[3][j]);
    out.eta_theta[j] += dt / 6.0 * (k_slope[0][j] + 2.0 * k_slope[1][j] + 2.0 * k_slope[2][j] + k_slope[3][j]);
  }
  if (!all_finite(out.eta) || !all_finite(out.eta_theta))
    throw numeric_error("NonFiniteState", "non-finite Lagrangian flow");
  return out;
}

LagrangianState advance_flow(const InertiaOperator& op, const SolutionState& state,
                             const LagrangianState& lag, double dt) {
  StageVelocities stages;
  step_rk4(momentum_rhs(op), op, state, dt, &stages);
  return advance_flow(stages, lag, dt, op.kind() != OperatorKind::CLM);
}

double conservation_residual(const SolutionState& state, const LagrangianState& lag,
                             const FourierField& omega0) {
  const auto w = evaluate_at(state.omega, lag.eta);
  const auto w0 = evaluate_at(omega0, lag.theta);
  double r = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    r = std::max(r, std::abs(lag.eta_theta[j] * lag.eta_theta[j] * w[j] - w0[j]));
  return r;
}

double wunsch_lagrangian_accel(double omega0_at_theta, double eta_theta, double F_at_eta) {
  if (!(eta_theta > 0.0)) throw numeric_error("DegenerateSlope", "eta_theta must be positive");
  return omega0_at_theta * omega0_at_theta / (eta_theta * eta_theta * eta_theta) - F_at_eta * eta_theta;
}

std::vector<double> ewp_slope_rate(const InertiaOperator& op, const SolutionState& state,
                                   const LagrangianState& lag) {
  if (op.kind() != OperatorKind::EWP)
    throw validation_error("PreconditionViolated", "ewp_slope_rate requires the EWP operator");
  const auto f = evaluate_at(compute_F(state.u), lag.eta);
  auto g = evaluate_at(compute_G(state.u), lag.eta);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] -= f[j];
  return g;
}

double energy(const InertiaOperator& op, const FourierField& u) {
  double s = 0.0;
  for (int n = 1; n <= u.band_limit(); ++n) s += op.symbol(n) * std::norm(u.coeff(n));
  return 2.0 * kTwoPi * s;
}

double tail_fraction(const InertiaOperator& op, const FourierField& u) {
  const int band = u.band_limit();
  const int cutoff = (2 * band) / 3;
  double total = 0.0, tail = 0.0;
  for (int n = 1; n <= band; ++n) {
    const double e = op.symbol(n) * std::norm(u.coeff(n));
    total += e;
    if (n > cutoff) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

Diagnostics diagnose(const InertiaOperator& op, const SolutionState& state, const LagrangianState& lag) {
  Diagnostics d;
  d.t = state.t;
  d.energy = energy(op, state.u);
  const FourierField ux = differentiate(state.u, 1);
  const double lo = min_value(ux).value;
  const double hi = max_value(ux).value;
  d.min_u_theta = lo;
  d.max_abs_u_theta = std::max(std::abs(lo), std::abs(hi));
  d.max_abs_u = sup_norm(state.u);
  d.tail_fraction = tail_fraction(op, state.u);
  d.min_eta_theta = lag.min_eta_theta();
  return d;
}

namespace {

enum class Health { Healthy, Slope, Tail };

Health classify(double min_eta_theta, double tail, const SimulationConfig& c) {
  if (min_eta_theta < c.slope_threshold) return Health::Slope;
  if (tail > c.tail_threshold) return Health::Tail;
  return Health::Healthy;
}

// A slope trend is established when min eta_theta has at least halved and
// decreased strictly over the last three samples.
bool slope_trend(const std::vector<Diagnostics>& s, std::size_t i) {
  if (i < 2) return false;
  const double initial = s.front().min_eta_theta;
  return s[i].min_eta_theta <= 0.5 * initial && s[i].min_eta_theta < s[i - 1].min_eta_theta &&
         s[i - 1].min_eta_theta < s[i - 2].min_eta_theta;
}

}  // namespace

TrajectoryRecord simulate(const SimulationConfig& config, const FourierField& u0) {
  config.validate();
  const InertiaOperator op(config.kind);
  const MomentumRhs rhs = momentum_rhs(op);
  const bool transport = config.kind != OperatorKind::CLM;

  TrajectoryRecord rec;
  rec.kind = config.kind;
  SolutionState state = SolutionState::from_velocity(op, u0.resized(config.band_limit));
  rec.initial_velocity = state.u;
  LagrangianState lag = LagrangianState::identity(config.grid_points());

  const long nsteps = std::max(1L, std::lround(config.t_fin / config.dt));
  std::vector<std::pair<long, double>> snap_steps;
  for (double t : config.snapshot_times) snap_steps.emplace_back(std::lround(t / config.dt), t);
  std::sort(snap_steps.begin(), snap_steps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](long k) {
    while (next_snap < snap_steps.size() && snap_steps[next_snap].first == k) {
      rec.snapshots.push_back({state, lag});
      ++next_snap;
    }
  };

  rec.samples.push_back(diagnose(op, state, lag));
  rec.checkpoint = Snapshot{state, lag};
  take_snapshots(0);
  bool unhealthy_seen = classify(rec.samples.back().min_eta_theta, rec.samples.back().tail_fraction, config) !=
                        Health::Healthy;
  rec.termination = "completed";
  long k = 0;
  while (k < nsteps && !(unhealthy_seen && !config.continue_past_blowup)) {
    StageVelocities stages;
    try {
      SolutionState next = step_rk4(rhs, op, state, config.dt, &stages);
      lag = advance_flow(stages, lag, config.dt, transport);
      state = std::move(next);
    } catch (const Error& e) {
      if (e.code() != "NonFiniteState" || !unhealthy_seen) throw;
      rec.termination = "non-finite state after blowup at t = " + fmt_time(state.t + config.dt);
      break;
    }
    ++k;
    state.t = static_cast<double>(k) * config.dt;
    const bool snap_due = next_snap < snap_steps.size() && snap_steps[next_snap].first == k;
    if (k % config.sample_every == 0 || k == nsteps || snap_due) {
      rec.samples.push_back(diagnose(op, state, lag));
      const auto& d = rec.samples.back();
      if (!unhealthy_seen) {
        if (classify(d.min_eta_theta, d.tail_fraction, config) == Health::Healthy)
          rec.checkpoint = Snapshot{state, lag};
        else
          unhealthy_seen = true;
      }
    }
    take_snapshots(k);
  }
  if (unhealthy_seen && !config.continue_past_blowup) rec.termination = "halted at blowup";
  for (; next_snap < snap_steps.size(); ++next_snap)
    rec.missing_snapshots.emplace_back(snap_steps[next_snap].second, rec.termination);
  rec.verdict = detect_blowup(rec, config);
  return rec;
}

BlowupVerdict detect_blowup(const TrajectoryRecord& record, const SimulationConfig& config) {
  if (record.samples.empty()) throw validation_error("PreconditionViolated", "empty trajectory record");
  const auto& s = record.samples;
  BlowupVerdict v;
  std::size_t i = 0;
  Health h = Health::Healthy;
  for (; i < s.size(); ++i) {
    h = classify(s[i].min_eta_theta, s[i].tail_fraction, config);
    if (h != Health::Healthy) break;
  }
  if (i == s.size()) return v;
  if (h == Health::Tail && !slope_trend(s, i))
    throw numeric_error("InconclusiveResolution",
                        "spectral tail exceeded its threshold at t = " + fmt_time(s[i].t) +
                            " before any slope collapse trend; the run is under-resolved");
  v.detected = true;
  v.trigger = h == Health::Slope ? "slope" : "tail";
  v.t_unhealthy = s[i].t;
  v.t_healthy = i > 0 ? s[i - 1].t : s[i].t;
  if (i == 0 || !record.checkpoint || config.refine_levels == 0) return v;

  // Re-run from the checkpoint with a halved step, sampling every step.
  const InertiaOperator op(record.kind);
  const MomentumRhs rhs = momentum_rhs(op);
  const bool transport = record.kind != OperatorKind::CLM;
  Snapshot cp = *record.checkpoint;
  if (std::abs(cp.state.t - v.t_healthy) > 1e-12 * std::max(1.0, v.t_healthy)) return v;
  double dt = config.dt;
  for (int level = 1; level <= config.refine_levels; ++level) {
    dt *= 0.5;
    const double horizon = v.t_unhealthy + (v.t_unhealthy - v.t_healthy);
    const long max_steps = std::lround((horizon - cp.state.t) / dt);
    SolutionState state = cp.state;
    LagrangianState lag = cp.flow;
    Snapshot prev = cp;
    bool found = false;
    for (long k = 1; k <= max_steps; ++k) {
      StageVelocities stages;
      SolutionState next = step_rk4(rhs, op, state, dt, &stages);
      lag = advance_flow(stages, lag, dt, transport);
      state = std::move(next);
      state.t = cp.state.t + static_cast<double>(k) * dt;
      const Health hk = classify(lag.min_eta_theta(), tail_fraction(op, state.u), config);
      if (hk != Health::Healthy) {
        v.t_healthy = prev.state.t;
        v.t_unhealthy = state.t;
        v.trigger = hk == Health::Slope ? "slope" : "tail";
        v.refinements = level;
        cp = prev;
        found = true;
        break;
      }
      prev = Snapshot{state, lag};
    }
    if (!found) break;
  }
  return v;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << "t,energy,min_u_theta,max_abs_u,tail_fraction,min_eta_theta\n";
  char buf[256];
  for (const auto& d : record.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.energy, d.min_u_theta,
                  d.max_abs_u, d.tail_fraction, d.min_eta_theta);
    out << buf;
  }
}

void write_grid_csv(std::ostream& out, const Snapshot& snapshot) {
  out << "theta,u,eta,eta_theta\n";
  const auto u = evaluate_at(snapshot.state.u, snapshot.flow.theta);
  char buf[256];
  for (std::size_t j = 0; j < u.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", snapshot.flow.theta[j], u[j], snapshot.flow.eta[j],
                  snapshot.flow.eta_theta[j]);
    out << buf;
  }
}

}  // namespace tgeo
