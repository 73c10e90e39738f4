#include "tgeo/commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tgeo/analysis.hpp"
#include "tgeo/dynamics.hpp"
#include "tgeo/svg.hpp"
#include "tgeo/verification.hpp"
#include "tgeo/welding.hpp"

namespace tgeo {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// Writes files below a root and remembers their hashes for the manifest.
class Artifacts {
 public:
  explicit Artifacts(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw numeric_error("IOError", "cannot write " + p.string());
    files_[rel] = {sha256_hex(content), content.size()};
  }

  void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

  json listing() const {
    json out = json::array();
    for (const auto& [path, info] : files_)
      out.push_back(json{{"path", path}, {"sha256", info.first}, {"bytes", info.second}});
    return out;
  }

 private:
  fs::path root_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

json verdict_json(const BlowupVerdict& v) {
  if (!v.detected) return json{{"detected", false}};
  return json{{"detected", true},
              {"bracket", {v.t_healthy, v.t_unhealthy}},
              {"trigger", v.trigger},
              {"refinements", v.refinements}};
}

PlotSeries field_series(const FourierField& f, const std::string& label, int points = 1024) {
  PlotSeries s;
  s.label = label;
  for (int j = 0; j <= points; ++j) s.x.push_back(kTwoPi * j / points);
  s.y = evaluate_at(f, s.x);
  return s;
}

struct WeldSummary {
  std::string label;
  json sidecar;
};

// Welds one diffeomorphism and writes curve CSV, JSON sidecar and SVG.
WeldSummary weld_one(Artifacts& out, const std::string& prefix, const std::string& label, const CircleDiffeo& eta,
                     const ExperimentConfig& config, const std::string& source) {
  const WeldingOptions opts = config.welding();
  const WeldingResult r = weld(eta, opts);
  const std::string stem = prefix + "curve_" + label;

  std::ostringstream csv;
  csv << "theta,re,im\n";
  char buf[128];
  for (int j = 0; j < eta.size(); ++j) {
    const cplx z = r.curve.points[static_cast<std::size_t>(j)];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", eta.theta(j), z.real(), z.imag());
    csv << buf;
  }
  out.write(stem + ".csv", csv.str());

  json side{{"source", source},
            {"M", eta.size()},
            {"a0", complex_json(r.curve.translation)},
            {"a1", complex_json(r.curve.scale)},
            {"solver_residual", r.solution.residual},
            {"rcond", r.solution.rcond},
            {"negative_energy_fraction", r.curve.coefficients.negative_energy_fraction},
            {"welding_residual", {{"equation", r.defect.equation}, {"holomorphy", r.defect.holomorphy},
                                  {"total", r.defect.total()}}},
            {"prefactor", config.prefactor},
            {"min_eta_prime", *std::min_element(eta.eta_prime().begin(), eta.eta_prime().end())},
            {"config_sha256", sha256_hex(config.canonical())}};
  out.write_json(stem + ".json", side);

  if (config.svg) {
    PlotSeries s;
    s.label = label;
    s.closed = true;
    for (const cplx& z : r.curve.points) {
      s.x.push_back(z.real());
      s.y.push_back(z.imag());
    }
    PlotOptions po;
    po.title = "normalized welded curve, " + label;
    po.x_label = "Re";
    po.y_label = "Im";
    po.equal_aspect = true;
    out.write(stem + ".svg", export_svg({s}, po));
  }
  return {label, side};
}

json run_simulation(Artifacts& out, const std::string& prefix, const ExperimentConfig& config) {
  const SimulationConfig sim = config.simulation();
  const TrajectoryRecord rec = simulate(sim, config.initial_velocity());

  std::ostringstream traj;
  write_trajectory_csv(traj, rec);
  out.write(prefix + "trajectory.csv", traj.str());

  json snaps = json::array();
  for (const auto& s : rec.snapshots) {
    const std::string t = time_label(s.state.t);
    std::ostringstream grid, coeffs;
    write_grid_csv(grid, s);
    write_csv(coeffs, s.state.u);
    out.write(prefix + "snapshot_t" + t + ".csv", grid.str());
    out.write(prefix + "snapshot_t" + t + "_u.csv", coeffs.str());
    snaps.push_back(json{{"t", s.state.t}, {"min_eta_theta", s.flow.min_eta_theta()}});
  }

  const double e0 = rec.samples.front().energy;
  double drift = 0.0, min_eta = 1.0, max_tail = 0.0;
  for (const auto& d : rec.samples) {
    drift = std::max(drift, std::abs(d.energy - e0) / std::max(std::abs(e0), 1e-300));
    min_eta = std::min(min_eta, d.min_eta_theta);
    max_tail = std::max(max_tail, d.tail_fraction);
  }
  json missing = json::array();
  for (const auto& [t, why] : rec.missing_snapshots) missing.push_back(json{{"t", t}, {"reason", why}});

  json report{{"equation", to_string(config.equation)},
              {"N", config.band_limit},
              {"M", sim.grid_points()},
              {"dt", config.dt},
              {"t_fin", config.t_fin},
              {"t_end", rec.samples.back().t},
              {"termination", rec.termination},
              {"verdict", verdict_json(rec.verdict)},
              {"energy", {{"initial", e0}, {"final", rec.samples.back().energy}, {"relative_drift", drift}}},
              {"min_eta_theta", min_eta},
              {"max_tail_fraction", max_tail},
              {"snapshots", snaps},
              {"missing_snapshots", missing}};
  if (config.equation == OperatorKind::EWP) {
    const BoundReport g = growth_monitor(rec, e0);
    report["growth_monitor"] = {{"value", g.value}, {"bound", g.bound}, {"slack", g.slack}, {"constant", g.constant}};
  }

  if (config.svg && !rec.snapshots.empty()) {
    std::vector<PlotSeries> us, etas;
    for (const auto& s : rec.snapshots) {
      const std::string label = "t = " + time_label(s.state.t);
      us.push_back(field_series(s.state.u, label));
      PlotSeries e;
      e.label = label;
      e.x = s.flow.theta;
      e.y = s.flow.eta;
      etas.push_back(std::move(e));
    }
    const std::string eq = to_string(config.equation);
    out.write(prefix + "u_profiles.svg", export_svg(us, {eq + " velocity u(t, theta)", "theta", "u", false}));
    out.write(prefix + "eta_profiles.svg", export_svg(etas, {eq + " flow eta(t, theta)", "theta", "eta", false}));
  }
  if (config.svg) {
    PlotSeries m;
    m.label = "min eta_theta";
    for (const auto& d : rec.samples) {
      m.x.push_back(d.t);
      m.y.push_back(d.min_eta_theta);
    }
    out.write(prefix + "min_eta_theta.svg", export_svg({m}, {"slope of the flow", "t", "min eta_theta", false}));
  }

  if (config.weld) {
    json curves = json::array();
    for (const auto& s : rec.snapshots) {
      const std::string label = "t" + time_label(s.state.t);
      const auto w = weld_one(out, prefix, label, CircleDiffeo::from_lagrangian(s.flow), config,
                              "snapshot t = " + time_label(s.state.t));
      curves.push_back(json{{"label", w.label}, {"welding_residual", w.sidecar["welding_residual"]["total"]}});
    }
    report["curves"] = curves;
  }
  out.write_json(prefix + "report.json", report);
  return report;
}

json run_weld(Artifacts& out, const ExperimentConfig& config) {
  json curves = json::array();
  const auto add = [&](const WeldSummary& w) {
    curves.push_back(json{{"label", w.label}, {"welding_residual", w.sidecar["welding_residual"]["total"]}});
  };
  if (!config.eta_modes.empty()) {
    const FourierField p = FourierField::from_modes(config.lagrangian_points / 2, config.eta_modes);
    const FourierField dp = differentiate(p);
    const CircleDiffeo eta = CircleDiffeo::from_function(
        config.lagrangian_points, [&](double t) { return t + evaluate_at(p, t); },
        [&](double t) { return 1.0 + evaluate_at(dp, t); });
    add(weld_one(out, "", "eta", eta, config, "welding.eta_modes"));
  } else if (!config.weld_inputs.empty()) {
    for (const auto& path : config.weld_inputs) {
      std::ifstream in(path);
      if (!in) throw validation_error("ValidationError", "cannot open " + path.string());
      const LagrangianState lag = read_grid_csv(in);
      add(weld_one(out, "", path.stem().string(), CircleDiffeo::from_lagrangian(lag), config, path.string()));
    }
  } else {
    ExperimentConfig c = config;
    c.weld = true;
    return json{{"simulation", run_simulation(out, "", c)}};
  }
  return json{{"curves", curves}};
}

ExperimentConfig table_case(const ExperimentConfig& base, OperatorKind kind, std::vector<double> snapshots) {
  ExperimentConfig c = base;
  c.equation = kind;
  c.modes = {{2, 1.0, -0.5 * kPi}, {3, 0.5, 0.0}};
  c.initial_csv.clear();
  c.t_fin = 0.5;
  c.snapshot_times = std::move(snapshots);
  c.weld = true;
  c.continue_past_blowup = false;
  c.validate();
  return c;
}

}  // namespace

std::vector<std::string> command_verbs() { return {"simulate", "weld", "verify", "certify", "reproduce-paper"}; }

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw numeric_error("HashFailed", "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

LagrangianState read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("theta,u,eta,eta_theta", 0) != 0)
    throw validation_error("InvalidGridCsv", "expected header theta,u,eta,eta_theta");
  LagrangianState lag;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    double v[4];
    std::istringstream ls(line);
    std::string cell;
    for (double& x : v) {
      std::size_t used = 0;
      if (!std::getline(ls, cell, ',')) throw validation_error("InvalidGridCsv", "row " + std::to_string(row) + ": too few columns");
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw validation_error("InvalidGridCsv", "row " + std::to_string(row) + ": bad number '" + cell + "'");
    }
    lag.theta.push_back(v[0]);
    lag.eta.push_back(v[2]);
    lag.eta_theta.push_back(v[3]);
  }
  const int m = lag.size();
  if (m < 4) throw validation_error("InvalidGridCsv", "grid CSV needs at least 4 rows");
  for (int j = 0; j < m; ++j)
    if (std::abs(lag.theta[j] - kTwoPi * j / m) > 1e-9)
      throw validation_error("InvalidGridCsv", "theta column is not the uniform grid 2 pi j / M");
  return lag;
}

json error_json(const Error& e) {
  return json{{"error",
               {{"code", e.code()},
                {"category", e.category() == ErrorCategory::Validation ? "validation" : "numeric"},
                {"message", e.what()}}}};
}

int exit_code_for(const Error& e) {
  return e.category() == ErrorCategory::Validation ? kExitValidation : kExitRuntime;
}

CommandOutcome run_command(const std::string& verb, const ExperimentConfig& config) {
  const auto verbs = command_verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end())
    throw validation_error("UnknownVerb", "unknown command '" + verb + "'");
  config.validate();

  Artifacts out(config.output_dir);
  CommandOutcome outcome;
  json result;
  if (verb == "simulate") {
    result = run_simulation(out, "", config);
  } else if (verb == "weld") {
    result = run_weld(out, config);
  } else if (verb == "verify") {
    const SuiteReport rep = run_property_suite(config.seed, config.verify_trials, config.verify_max_band);
    json props = json::array();
    for (const auto& p : rep.properties)
      props.push_back(json{{"name", p.name},
                           {"trials", p.trials},
                           {"failures", p.failures},
                           {"worst", p.worst},
                           {"tolerance", p.tolerance},
                           {"passed", p.passed()},
                           {"first_failure", p.first_failure}});
    result = json{{"seed", rep.seed}, {"trials", rep.trials}, {"max_band", rep.max_band},
                  {"passed", rep.passed()}, {"properties", props}};
    out.write_json("verify_report.json", result);
    if (!rep.passed()) outcome.exit_code = kExitRuntime;
  } else if (verb == "certify") {
    const FourierField u0 = config.initial_velocity();
    const BlowupCertificate c = certify_blowup(u0);
    result = json{{"theta0", c.theta0}, {"u0_slope", c.u0_slope}, {"omega0_value", c.omega0_value},
                  {"tolerance", c.tolerance}, {"band_limit", u0.band_limit()}};
    out.write_json("certificate.json", result);
  } else {
    const ExperimentConfig w = table_case(config, OperatorKind::Wunsch, {0.0, 0.125, 0.25});
    const ExperimentConfig e = table_case(config, OperatorKind::EWP, {0.0, 0.25, 0.5});
    const json wr = run_simulation(out, "wunsch/", w);
    const json er = run_simulation(out, "ewp/", e);
    // Frames the run did not reach (Wunsch after blowup) are listed with the reason.
    const auto frames = [&](const std::string& dir, const char* kind, std::vector<double> ts) {
      const json& rep = dir == "wunsch/" ? wr : er;
      json f = json::array();
      for (double t : ts) {
        json entry{{"t", t}, {"file", dir + kind + time_label(t) + ".csv"}};
        for (const auto& m : rep["missing_snapshots"])
          if (std::abs(m["t"].get<double>() - t) < 1e-12) entry = json{{"t", t}, {"missing", m["reason"]}};
        f.push_back(entry);
      }
      return f;
    };
    json tables = json::array();
    tables.push_back({{"table", 1}, {"content", "Wunsch Eulerian u"}, {"figure", "wunsch/u_profiles.svg"},
                      {"frames", frames("wunsch/", "snapshot_t", {0.125, 0.25})}});
    tables.push_back({{"table", 2}, {"content", "EWP Eulerian u"}, {"figure", "ewp/u_profiles.svg"},
                      {"frames", frames("ewp/", "snapshot_t", {0.25, 0.5})}});
    tables.push_back({{"table", 3}, {"content", "Wunsch Lagrangian eta"}, {"figure", "wunsch/eta_profiles.svg"},
                      {"frames", frames("wunsch/", "snapshot_t", {0.125, 0.25})}});
    tables.push_back({{"table", 4}, {"content", "EWP Lagrangian eta"}, {"figure", "ewp/eta_profiles.svg"},
                      {"frames", frames("ewp/", "snapshot_t", {0.25, 0.5})}});
    tables.push_back({{"table", 5}, {"content", "Wunsch welded curves"},
                      {"frames", frames("wunsch/", "curve_t", {0.125, 0.25})}});
    tables.push_back({{"table", 6}, {"content", "EWP welded curves"},
                      {"frames", frames("ewp/", "curve_t", {0.25, 0.5})}});
    result = json{{"wunsch", wr}, {"ewp", er}, {"tables", tables}};
    out.write_json("reproduce.json", result);
  }

  outcome.manifest = json{{"verb", verb},
                          {"config_sha256", sha256_hex(config.canonical())},
                          {"exit_code", outcome.exit_code},
                          {"files", out.listing()}};
  if (result.contains("verdict")) outcome.manifest["verdict"] = result["verdict"];
  if (verb == "weld" && result.contains("simulation")) outcome.manifest["verdict"] = result["simulation"]["verdict"];
  if (verb == "reproduce-paper")
    outcome.manifest["verdict"] = {{"wunsch", result["wunsch"]["verdict"]}, {"ewp", result["ewp"]["verdict"]}};
  if (verb == "verify") outcome.manifest["passed"] = result["passed"];
  if (verb == "simulate") outcome.manifest["energy_drift"] = result["energy"]["relative_drift"];

  std::ofstream mf(fs::path(config.output_dir) / "manifest.json");
  mf << outcome.manifest.dump(2) << '\n';
  if (!mf) throw numeric_error("IOError", "cannot write manifest.json");
  return outcome;
}

}  // namespace tgeo
