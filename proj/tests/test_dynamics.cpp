#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "tgeo/analysis.hpp"
#include "tgeo/dynamics.hpp"
#include "tgeo/errors.hpp"
#include "tgeo/verification.hpp"

using namespace tgeo;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

FourierField breaking_u0(int band) {
  const TrigMode modes[] = {{2, 1.0, -0.5 * kPi}, {3, 0.5, 0.0}};
  return FourierField::from_modes(band, modes);
}

// Integrates to t_end with fixed dt and returns the final state.
SolutionState integrate(const InertiaOperator& op, const FourierField& u0, double dt, double t_end) {
  SolutionState s = SolutionState::from_velocity(op, u0);
  const long n = std::lround(t_end / dt);
  const MomentumRhs rhs = momentum_rhs(op);
  for (long k = 0; k < n; ++k) s = step_rk4(rhs, op, s, dt);
  return s;
}

double max_grid_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

SimulationConfig small_config(OperatorKind k, int band, double dt, double t_fin) {
  SimulationConfig c;
  c.kind = k;
  c.band_limit = band;
  c.dt = dt;
  c.t_fin = t_fin;
  return c;
}

}  // namespace

TEST_CASE("eulerian_rhs examples") {
  const InertiaOperator w(OperatorKind::Wunsch), e(OperatorKind::EWP);
  const FourierField c2 = FourierField::cos_mode(8, 2);
  CHECK(coeff_distance(eulerian_rhs(w, SolutionState::from_velocity(w, c2)), FourierField::sin_mode(8, 4, 6.0)) < 1e-14);
  CHECK(coeff_distance(eulerian_rhs(e, SolutionState::from_velocity(e, c2)), FourierField::sin_mode(8, 4, 18.0)) < 1e-13);
  for (const InertiaOperator& op : {w, e})
    CHECK(eulerian_rhs(op, SolutionState::from_velocity(op, FourierField(8))).max_abs_coeff() == 0.0);
}

TEST_CASE("clm_rhs examples") {
  const InertiaOperator c(OperatorKind::CLM);
  auto rhs_of = [&](const FourierField& w) { return clm_rhs(SolutionState::from_momentum(c, w)); };
  CHECK(coeff_distance(rhs_of(FourierField::cos_mode(4, 1)), FourierField::sin_mode(4, 2, 0.5)) < 1e-15);
  CHECK(coeff_distance(rhs_of(FourierField::sin_mode(4, 1)), FourierField::sin_mode(4, 2, -0.5)) < 1e-15);
  CHECK(rhs_of(FourierField(4)).max_abs_coeff() == 0.0);
}

TEST_CASE("step_rk4 with zero and linear right-hand sides") {
  const InertiaOperator w(OperatorKind::Wunsch);
  const SolutionState s = SolutionState::from_velocity(w, breaking_u0(8), 0.3);
  const SolutionState z = step_rk4([](const SolutionState& st) { return FourierField(st.omega.band_limit()); }, w, s, 0.01);
  CHECK(z.t == doctest::Approx(0.31));
  CHECK(coeff_distance(z.omega, s.omega) == 0.0);
  CHECK(coeff_distance(z.u, s.u) == 0.0);

  const SolutionState c = SolutionState::from_momentum(w, FourierField::cos_mode(4, 2));
  for (double dt : {0.1, 0.05}) {
    const SolutionState l = step_rk4([](const SolutionState& st) { return st.omega; }, w, c, dt);
    const double err = std::abs(2.0 * l.omega.coeff(2).real() - std::exp(dt));
    CHECK(err < dt * dt * dt * dt * dt / 100.0);
    CHECK(err > 0.0);
  }
  CHECK(code_of([&] { step_rk4(momentum_rhs(w), w, c, 0.0); }) == "ValidationError");
  FourierField huge = FourierField::cos_mode(4, 2, 1e300);
  CHECK(code_of([&] {
          step_rk4([](const SolutionState& st) { return 1e300 * st.omega; }, w, SolutionState::from_momentum(w, huge), 1.0);
        }) == "NonFiniteState");
}

TEST_CASE("RK4 self-convergence on a short Wunsch run") {
  const InertiaOperator w(OperatorKind::Wunsch);
  const FourierField u0 = FourierField::sin_mode(32, 2);
  const SolutionState ref = integrate(w, u0, 0.01 / 16, 0.1);
  const double e1 = coeff_distance(integrate(w, u0, 0.01, 0.1).omega, ref.omega);
  const double e2 = coeff_distance(integrate(w, u0, 0.005, 0.1).omega, ref.omega);
  const double order = std::log2(e1 / e2);
  INFO("errors " << e1 << " " << e2);
  CHECK(order > 3.8);
  CHECK(order < 4.2);
}

TEST_CASE("advance_flow with zero and constant velocity") {
  const LagrangianState id = LagrangianState::identity(16);
  StageVelocities zero{FourierField(4), FourierField(4), FourierField(4), FourierField(4)};
  const LagrangianState a = advance_flow(zero, id, 0.1);
  CHECK(a.eta == id.eta);
  CHECK(a.eta_theta == id.eta_theta);

  const FourierField c = FourierField::constant(4, 0.7);
  const LagrangianState b = advance_flow(StageVelocities{c, c, c, c}, id, 0.1);
  for (int j = 0; j < 16; ++j) {
    CHECK(b.eta[j] == doctest::Approx(id.theta[j] + 0.07).epsilon(1e-15));
    CHECK(b.eta_theta[j] == 1.0);
  }
  // Transport off keeps eta fixed while eta_theta still responds to u_theta.
  const FourierField s = FourierField::sin_mode(4, 1);
  const LagrangianState f = advance_flow(StageVelocities{s, s, s, s}, id, 0.1, false);
  CHECK(f.eta == id.eta);
  CHECK(f.eta_theta[0] == doctest::Approx(std::exp(0.1)).epsilon(1e-6));
}

TEST_CASE("flow along a steady velocity matches the exact characteristic") {
  // u = 0.3 sin(theta) is steady for the transport equation on its own; the
  // characteristic solves tan(eta/2) = tan(theta/2) e^{0.3 t}.
  const FourierField u = FourierField::sin_mode(4, 1, 0.3);
  LagrangianState l = LagrangianState::identity(12);
  const double dt = 0.01;
  for (int k = 0; k < 100; ++k) l = advance_flow(StageVelocities{u, u, u, u}, l, dt);
  for (int j = 1; j < 12; ++j) {
    if (j == 6) continue;
    const double exact = 2.0 * std::atan(std::tan(l.theta[j] / 2) * std::exp(0.3));
    const double lifted = exact + (l.theta[j] > kPi ? kTwoPi : 0.0);
    CHECK(std::abs(l.eta[j] - lifted) < 1e-9);
    const double slope = std::exp(0.3) * (1 + std::pow(std::tan(l.theta[j] / 2), 2)) /
                         (1 + std::pow(std::tan(l.theta[j] / 2) * std::exp(0.3), 2));
    CHECK(std::abs(l.eta_theta[j] - slope) < 1e-9);
  }
}

TEST_CASE("conservation residual examples") {
  const InertiaOperator w(OperatorKind::Wunsch);
  const FourierField u0 = FourierField::sin_mode(128, 2);
  SolutionState s = SolutionState::from_velocity(w, u0);
  LagrangianState l = LagrangianState::identity(256);
  CHECK(conservation_residual(s, l, s.omega) < 1e-14);

  const FourierField omega0 = s.omega;
  const double dt = 1e-4;
  for (int k = 0; k < 500; ++k) {
    StageVelocities st;
    SolutionState next = step_rk4(momentum_rhs(w), w, s, dt, &st);
    l = advance_flow(st, l, dt);
    s = next;
  }
  CHECK(s.t == doctest::Approx(0.05));
  CHECK(conservation_residual(s, l, omega0) < 1e-6);

  const SolutionState zero = SolutionState::from_velocity(w, FourierField(8));
  CHECK(conservation_residual(zero, advance_flow(w, zero, LagrangianState::identity(16), 0.1), zero.omega) == 0.0);
}

TEST_CASE("wunsch_lagrangian_accel examples") {
  CHECK(wunsch_lagrangian_accel(0, 1, 2) == -2.0);
  CHECK(wunsch_lagrangian_accel(1, 1, 0) == 1.0);
  CHECK(wunsch_lagrangian_accel(2, 2, 3) == -5.5);
  CHECK(code_of([] { wunsch_lagrangian_accel(1, 0, 1); }) == "DegenerateSlope");
  CHECK(code_of([] { wunsch_lagrangian_accel(1, -0.5, 1); }) == "DegenerateSlope");
}

TEST_CASE("second-order Lagrangian form tracks the Eulerian-driven flow") {
  const InertiaOperator w(OperatorKind::Wunsch);
  const FourierField u0 = FourierField::sin_mode(32, 2);
  auto gap = [&](double dt) {
    SolutionState s = SolutionState::from_velocity(w, u0);
    LagrangianState l = LagrangianState::identity(64);
    const auto w0 = evaluate_at(s.omega, l.theta);
    std::vector<double> slope(64, 1.0);
    std::vector<double> rate = evaluate_at(differentiate(u0), l.theta);
    auto force = [&](const SolutionState& st, const LagrangianState& lg) { return evaluate_at(compute_F(st.u), lg.eta); };
    std::vector<double> f_now = force(s, l);
    const long n = std::lround(0.1 / dt);
    for (long k = 0; k < n; ++k) {
      StageVelocities st;
      SolutionState next = step_rk4(momentum_rhs(w), w, s, dt, &st);
      l = advance_flow(st, l, dt);
      s = next;
      const std::vector<double> f_next = force(s, l);
      // Heun step on (eta_theta, eta_t theta).
      for (std::size_t j = 0; j < 64; ++j) {
        const double a0 = wunsch_lagrangian_accel(w0[j], slope[j], f_now[j]);
        const double js = slope[j] + dt * rate[j];
        const double ps = rate[j] + dt * a0;
        const double a1 = wunsch_lagrangian_accel(w0[j], js, f_next[j]);
        slope[j] += 0.5 * dt * (rate[j] + ps);
        rate[j] += 0.5 * dt * (a0 + a1);
      }
      f_now = f_next;
    }
    return max_grid_diff(slope, l.eta_theta);
  };
  const double g1 = gap(2e-3), g2 = gap(1e-3);
  INFO("gaps " << g1 << " " << g2);
  CHECK(g1 < 1e-4);
  CHECK(g1 / g2 > 3.5);
  CHECK(g1 / g2 < 4.5);
}

TEST_CASE("ewp_slope_rate examples") {
  const InertiaOperator e(OperatorKind::EWP);
  const LagrangianState id = LagrangianState::identity(32);
  for (double r : ewp_slope_rate(e, SolutionState::from_velocity(e, FourierField(8)), id)) CHECK(r == 0.0);
  const auto rate = ewp_slope_rate(e, SolutionState::from_velocity(e, FourierField::cos_mode(8, 2)), id);
  for (int j = 0; j < 32; ++j) CHECK(std::abs(rate[j] - (-2.0 - 0.8 * std::cos(4 * id.theta[j]))) < 1e-13);
  const InertiaOperator w(OperatorKind::Wunsch);
  CHECK(code_of([&] { ewp_slope_rate(w, SolutionState::from_velocity(w, FourierField::cos_mode(8, 2)), id); }) ==
        "PreconditionViolated");
}

TEST_CASE("ewp_slope_rate matches central differences of u_theta along particle paths") {
  // The solver keeps u in the complement of {1, cos, sin}. The slope identity
  // is written for the lift whose u_t theta also carries the modes +-1 of
  // H(u H u'') ; in the projected lift that term is absent, so it is removed
  // from the predicted rate here.
  const InertiaOperator e(OperatorKind::EWP);
  const double dt = 1e-3;
  std::vector<SolutionState> states{SolutionState::from_velocity(e, breaking_u0(48))};
  std::vector<LagrangianState> flows{LagrangianState::identity(96)};
  for (int k = 0; k < 80; ++k) {
    StageVelocities st;
    states.push_back(step_rk4(momentum_rhs(e), e, states.back(), dt, &st));
    flows.push_back(advance_flow(st, flows.back(), dt));
  }
  auto slope_along = [&](int k) { return evaluate_at(differentiate(states[k].u), flows[k].eta); };
  const int mid = 40;
  const FourierField& u = states[mid].u;
  const FourierField drift = hilbert_transform(multiply(u, hilbert_transform(differentiate(u, 2)), 2 * u.band_limit()));
  const FourierField gauge = drift.resized(1).with_modes_zeroed(std::vector<int>{0});
  auto rate = ewp_slope_rate(e, states[mid], flows[mid]);
  const auto g = evaluate_at(gauge, flows[mid].eta);
  for (std::size_t j = 0; j < rate.size(); ++j) rate[j] -= g[j];
  auto fd_error = [&](int h) {
    const auto a = slope_along(mid + h), b = slope_along(mid - h);
    double d = 0.0;
    for (std::size_t j = 0; j < rate.size(); ++j) d = std::max(d, std::abs((a[j] - b[j]) / (2 * h * dt) - rate[j]));
    return d;
  };
  const double e1 = fd_error(20), e2 = fd_error(10);
  INFO("fd errors " << e1 << " " << e2);
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("energy and quotient preservation") {
  for (OperatorKind k : {OperatorKind::Wunsch, OperatorKind::EWP}) {
    const InertiaOperator op(k);
    SimulationConfig c = small_config(k, 64, 1e-3, 0.05);
    c.sample_every = 5;
    const TrajectoryRecord r = simulate(c, breaking_u0(64));
    const double e0 = r.samples.front().energy;
    for (const auto& d : r.samples) CHECK(std::abs(d.energy - e0) / e0 < 1e-6 * std::max(d.t, 1e-3));
    CHECK(e0 == doctest::Approx(seminorm_sq(r.initial_velocity, k == OperatorKind::EWP ? Seminorm::ThreeHalves
                                                                                           : Seminorm::Half)));
    const SolutionState s = integrate(op, breaking_u0(32), 1e-3, 0.05);
    for (int n : op.kernel_modes()) CHECK(std::abs(s.omega.coeff(n)) < 1e-10);
  }
}

TEST_CASE("tail fraction weights by the inertia symbol") {
  const InertiaOperator w(OperatorKind::Wunsch);
  CHECK(tail_fraction(w, FourierField::cos_mode(9, 2)) == 0.0);
  CHECK(tail_fraction(w, FourierField::cos_mode(9, 9)) == 1.0);
  const FourierField mix = FourierField::cos_mode(9, 1) + FourierField::cos_mode(9, 7);
  CHECK(tail_fraction(w, mix) == doctest::Approx(7.0 / 8.0));
  CHECK(tail_fraction(w, FourierField(9)) == 0.0);
}

TEST_CASE("CLM with omega0 = cos theta follows the exact Riccati solution") {
  // z = H omega + i omega solves z_t = z^2 / 2, so z = z0 / (1 - t z0 / 2),
  // z0 = i e^{-i theta}; eta_theta = (1 - t/2)^2 at theta = pi/2.
  const InertiaOperator c(OperatorKind::CLM);
  const SolutionState s0 = SolutionState::from_momentum(c, FourierField::cos_mode(96, 1));
  SolutionState s = s0;
  LagrangianState l = LagrangianState::identity(4);
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k) {
    StageVelocities st;
    SolutionState next = step_rk4(momentum_rhs(c), c, s, dt, &st);
    l = advance_flow(st, l, dt, false);
    s = next;
  }
  for (double th : {0.0, 0.9, 2.0, 4.4}) {
    const std::complex<double> z0 = std::complex<double>(0, 1) * std::exp(std::complex<double>(0, -th));
    const double exact = (z0 / (1.0 - 0.5 * z0)).imag();
    CHECK(std::abs(evaluate_at(s.omega, th) - exact) < 1e-10);
  }
  CHECK(l.eta == LagrangianState::identity(4).eta);
  CHECK(l.eta_theta[1] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("CLM blowup is bracketed before the exact time 2") {
  SimulationConfig c = small_config(OperatorKind::CLM, 256, 1e-3, 2.5);
  c.lagrangian_points = 64;
  const TrajectoryRecord r = simulate(c, FourierField::cos_mode(256, 1));
  REQUIRE(r.verdict.detected);
  const double t_slope = 2.0 * (1.0 - std::sqrt(c.slope_threshold));
  CHECK(r.verdict.t_unhealthy <= 2.0);
  if (r.verdict.trigger == "slope") {
    CHECK(r.verdict.t_healthy <= t_slope);
    CHECK(r.verdict.t_unhealthy >= t_slope);
  }
}

TEST_CASE("detect_blowup on quiet, collapsing and under-resolved records") {
  SimulationConfig c = small_config(OperatorKind::Wunsch, 8, 1e-2, 0.2);
  const TrajectoryRecord quiet = simulate(c, FourierField(8));
  CHECK_FALSE(quiet.verdict.detected);
  CHECK(quiet.termination == "completed");

  TrajectoryRecord fake;
  fake.kind = OperatorKind::Wunsch;
  for (int i = 0; i < 4; ++i) {
    Diagnostics d;
    d.t = 0.1 * i;
    d.tail_fraction = i == 3 ? 0.5 : 0.0;
    fake.samples.push_back(d);
  }
  CHECK(code_of([&] { detect_blowup(fake, c); }) == "InconclusiveResolution");

  fake.samples[1].min_eta_theta = 0.8;
  fake.samples[2].min_eta_theta = 0.6;
  fake.samples[3].min_eta_theta = 0.4;
  c.refine_levels = 0;
  BlowupVerdict v = detect_blowup(fake, c);
  CHECK(v.detected);
  CHECK(v.trigger == "tail");
  fake.samples[3].min_eta_theta = 1e-4;
  v = detect_blowup(fake, c);
  CHECK(v.trigger == "slope");
  CHECK(v.t_healthy == doctest::Approx(0.2));
  CHECK(v.t_unhealthy == doctest::Approx(0.3));

  CHECK(code_of([&] { detect_blowup(TrajectoryRecord{}, c); }) == "PreconditionViolated");
}

TEST_CASE("Wunsch breaking is bracketed and min slope decreases toward it") {
  SimulationConfig c = small_config(OperatorKind::Wunsch, 128, 5e-4, 0.5);
  const TrajectoryRecord r = simulate(c, breaking_u0(128));
  REQUIRE(r.verdict.detected);
  CHECK(r.verdict.t_healthy > 0.125);
  CHECK(r.verdict.t_unhealthy < 0.25);
  CHECK(r.verdict.refinements == 2);
  CHECK(r.termination == "halted at blowup");
  for (std::size_t i = 1; i < r.samples.size(); ++i)
    if (r.samples[i].t > 0.1) CHECK(r.samples[i].min_eta_theta < r.samples[i - 1].min_eta_theta);
}

TEST_CASE("snapshots, validation and CSV export") {
  SimulationConfig c = small_config(OperatorKind::EWP, 16, 1e-2, 0.1);
  c.snapshot_times = {0.0, 0.05};
  const TrajectoryRecord r = simulate(c, breaking_u0(16));
  REQUIRE(r.snapshots.size() == 2u);
  CHECK(r.snapshots[1].state.t == doctest::Approx(0.05));
  CHECK(r.missing_snapshots.empty());
  for (std::size_t i = 1; i < r.samples.size(); ++i) CHECK(r.samples[i].t > r.samples[i - 1].t);

  std::ostringstream traj, grid;
  write_trajectory_csv(traj, r);
  CHECK(traj.str().rfind("t,energy,min_u_theta,max_abs_u,tail_fraction,min_eta_theta\n", 0) == 0);
  write_grid_csv(grid, r.snapshots[1]);
  CHECK(grid.str().rfind("theta,u,eta,eta_theta\n", 0) == 0);

  SimulationConfig bad = c;
  bad.dt = 0;
  CHECK(code_of([&] { bad.validate(); }) == "ValidationError");
  bad = c;
  bad.band_limit = 3;
  CHECK(code_of([&] { bad.validate(); }) == "ValidationError");
  bad = c;
  bad.snapshot_times = {0.2};
  CHECK(code_of([&] { bad.validate(); }) == "ValidationError");
  bad = c;
  bad.slope_threshold = 1.0;
  CHECK(code_of([&] { bad.validate(); }) == "ValidationError");
}
