#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "tgeo/commands.hpp"
#include "tgeo/config.hpp"
#include "tgeo/svg.hpp"

using namespace tgeo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tgeo_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string("'") + TGEO_CLI_PATH + "' " + args + " >'" + o.string() + "' 2>'" + e.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

// Path data of the i-th series element.
std::vector<std::pair<double, double>> path_points(const std::string& svg, int series) {
  const std::regex re("<path class=\"series-" + std::to_string(series) + "\"[^>]* d=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  std::vector<std::pair<double, double>> pts;
  const std::regex num("[ML]([-0-9.]+),([-0-9.]+)");
  const std::string d = m[1];
  for (auto it = std::sregex_iterator(d.begin(), d.end(), num); it != std::sregex_iterator(); ++it)
    pts.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  return pts;
}

const char* kSmallSimulation =
    "equation = wunsch\n"
    "[initial]\n"
    "modes = 2 1 sin, 3 0.5 cos\n"
    "[simulation]\n"
    "N = 32\n"
    "M = 64\n"
    "dt = 1e-3\n"
    "t_fin = 0.05\n"
    "snapshots = 0, 0.05\n"
    "[welding]\n"
    "enabled = true\n";

}  // namespace

TEST_CASE("a minimal document yields the defaults") {
  const ExperimentConfig c = parse_config("equation = wunsch\n[initial]\nmodes = 2 1 sin\n");
  CHECK(c.equation == OperatorKind::Wunsch);
  REQUIRE(c.modes.size() == 1u);
  CHECK(c.modes[0].mode == 2);
  CHECK(c.band_limit == 256);
  CHECK(c.lagrangian_points == 512);
  CHECK(c.dt == 1e-4);
  CHECK(c.t_fin == 0.5);
  CHECK_FALSE(c.weld);
  CHECK(c.prefactor == "normalized");
  const FourierField u = c.initial_velocity();
  CHECK(std::abs(evaluate_at(u, 0.3) - std::sin(0.6)) < 1e-15);
}

TEST_CASE("validation and parse errors") {
  CHECK(code_of([] { parse_config("equation = wunsch\n[initial]\nmodes = 2 1 sin\n[simulation]\nt_fin = -1\n"); }) ==
        "ValidationError");
  CHECK(code_of([] {
          parse_config("equation = ewp\n[initial]\nmodes = 2 1 sin\n[simulation]\nt_fin = 0.2\nsnapshots = 0.1, 0.3\n");
        }) == "ValidationError");
  CHECK(code_of([] { parse_config("equation = burgers\n"); }) == "ParseError");
  CHECK(code_of([] { parse_config("equation = wunsch\n[initial]\nmodes = 2 1\n"); }) == "ParseError");
  CHECK(message_of([] { parse_config("equation = wunsch\n[initial]\nmodes = 2 1 sin\n[simulation]\nstep = 3\n"); })
            .find("line 5") != std::string::npos);
  CHECK(message_of([] { parse_config("equation = wunsch\n\n[simulation]\ndt = fast\n"); }).find("line 4") !=
        std::string::npos);
  CHECK(code_of([] { parse_config("equation = wunsch\n[initial]\nmodes = 40 1 sin\n[simulation]\nN = 32\n"); }) ==
        "ValidationError");
  CHECK(code_of([] { parse_config("[initial]\nmodes = 2 1 sin\n", {"simulation.dt"}); }) == "ParseError");
  CHECK(code_of([] { parse_config("[initial]\nmodes = 2 1 sin\n", {"bogus.key=1"}); }) == "ParseError");
  CHECK(code_of([] { parse_config("[initial]\ncsv = /nonexistent/file.csv\n"); }) == "ValidationError");
}

TEST_CASE("overrides and canonical form") {
  const std::string doc = "equation = ewp\n[initial]\nmodes = 2 1 sin\n";
  const ExperimentConfig a = parse_config(doc);
  const ExperimentConfig b = parse_config(doc, {"simulation.dt=2e-4", "welding.prefactor=bare"});
  CHECK(b.dt == 2e-4);
  CHECK(b.welding().prefactor == kBarePrefactor);
  CHECK(a.welding().prefactor == kNormalizedPrefactor);
  CHECK(a.canonical() == parse_config(doc).canonical());
  CHECK(a.canonical() != b.canonical());
  CHECK(b.simulation().kind == OperatorKind::EWP);
  CHECK(b.simulation().lagrangian_points == 512);
}

TEST_CASE("mode lists") {
  const auto m = parse_modes("2 1 sin, 3 0.5 cos, 4 0.2 0.3");
  REQUIRE(m.size() == 3u);
  const FourierField f = FourierField::from_modes(8, m);
  const double t = 0.7;
  CHECK(std::abs(evaluate_at(f, t) - (std::sin(2 * t) + 0.5 * std::cos(3 * t) + 0.2 * std::cos(4 * t + 0.3))) < 1e-15);
  CHECK(code_of([] { parse_modes("2 x sin"); }) == "ParseError");
}

TEST_CASE("load_config resolves relative paths against the document") {
  const fs::path dir = scratch("load");
  {
    std::ofstream csv(dir / "u0.csv");
    write_csv(csv, FourierField::cos_mode(4, 2));
    std::ofstream cfg(dir / "run.ini");
    cfg << "equation = wunsch\n[initial]\ncsv = u0.csv\n[simulation]\nN = 8\n";
  }
  const ExperimentConfig c = load_config(dir / "run.ini");
  CHECK(c.initial_csv == dir / "u0.csv");
  CHECK(coeff_distance(c.initial_velocity(), FourierField::cos_mode(8, 2)) == 0.0);
  CHECK(code_of([&] { load_config(dir / "missing.ini"); }) == "ValidationError");
}

TEST_CASE("svg examples") {
  PlotSeries flat{"flat", {0.0, 1.0, 2.0, 3.0}, {0.5, 0.5, 0.5, 0.5}, false};
  const std::string s = export_svg({flat});
  const auto pts = path_points(s, 0);
  REQUIRE(pts.size() == 4u);
  for (const auto& p : pts) CHECK(p.second == 0.5);
  CHECK(s == export_svg({flat}));

  PlotSeries circle{"circle", {}, {}, true};
  for (int j = 0; j < 256; ++j) {
    circle.x.push_back(std::cos(kTwoPi * j / 256));
    circle.y.push_back(std::sin(kTwoPi * j / 256));
  }
  PlotOptions eq;
  eq.equal_aspect = true;
  const std::string c = export_svg({circle}, eq);
  double dev = 0.0;
  for (const auto& p : path_points(c, 0)) dev = std::max(dev, std::abs(std::hypot(p.first, p.second) - 1.0));
  CHECK(dev < 1e-9);
  CHECK(std::regex_search(c, std::regex("series-0\"[^>]* d=\"[^\"]* Z\"")));

  const std::string two = export_svg({flat, PlotSeries{"other", {0, 1}, {1, 2}, false}});
  CHECK(two.find("<path class=\"series-0\"") != std::string::npos);
  CHECK(two.find("<path class=\"series-1\"") != std::string::npos);
  CHECK(two.find(".series-0") != std::string::npos);
  CHECK(two.find(".series-1") != std::string::npos);

  CHECK(code_of([] { export_svg({}); }) == "EmptySeries");
  CHECK(code_of([] { export_svg({PlotSeries{"e", {}, {}, false}}); }) == "EmptySeries");
  CHECK(code_of([] { export_svg({PlotSeries{"bad", {0, 1}, {1}, false}}); }) == "InvalidSeries");
  CHECK(code_of([] { export_svg({PlotSeries{"nan", {0, 1}, {1, std::nan("")}, false}}); }) == "InvalidSeries");
}

TEST_CASE("hashing, error JSON and grid CSV") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  const Error v = validation_error("ValidationError", "dt must be positive");
  const json j = error_json(v);
  CHECK(j["error"]["code"] == "ValidationError");
  CHECK(j["error"]["category"] == "validation");
  CHECK(j["error"]["message"] == "dt must be positive");
  CHECK(exit_code_for(v) == kExitValidation);
  CHECK(exit_code_for(numeric_error("SlopeCollapse", "x")) == kExitRuntime);

  Snapshot snap;
  snap.state = SolutionState::from_velocity(InertiaOperator(OperatorKind::Wunsch), FourierField::sin_mode(4, 2));
  snap.flow = LagrangianState::identity(8);
  snap.flow.eta_theta[3] = 0.75;
  std::stringstream ss;
  write_grid_csv(ss, snap);
  const LagrangianState back = read_grid_csv(ss);
  CHECK(back.eta == snap.flow.eta);
  CHECK(back.eta_theta == snap.flow.eta_theta);
  std::stringstream bad("theta,u,eta,eta_theta\n0,1,x,1\n");
  CHECK_THROWS_AS(read_grid_csv(bad), Error);
}

TEST_CASE("run_command writes a manifest whose hashes match the files") {
  const fs::path dir = scratch("certify");
  const ExperimentConfig c = parse_config("[initial]\nmodes = 2 1 sin, 3 0.5 cos\n[simulation]\nN = 8\n",
                                          {"output.dir=" + dir.string()});
  const CommandOutcome r = run_command("certify", c);
  CHECK(r.exit_code == kExitSuccess);
  CHECK(r.manifest["verb"] == "certify");
  CHECK(r.manifest["config_sha256"] == sha256_hex(c.canonical()));
  REQUIRE(r.manifest["files"].size() >= 1u);
  for (const auto& f : r.manifest["files"]) {
    const std::string body = slurp(dir / f["path"].get<std::string>());
    CHECK(f["sha256"] == sha256_hex(body));
    CHECK(f["bytes"] == body.size());
  }
  CHECK(fs::exists(dir / "manifest.json"));
  const json cert = json::parse(slurp(dir / "certificate.json"));
  CHECK(cert["u0_slope"].get<double>() < 0.0);

  CHECK(code_of([&] { run_command("dance", c); }) == "UnknownVerb");
}

TEST_CASE("simulate and weld in-process") {
  const fs::path dir = scratch("simulate");
  const ExperimentConfig c = parse_config(kSmallSimulation, {"output.dir=" + dir.string()});
  const CommandOutcome r = run_command("simulate", c);
  CHECK(r.exit_code == kExitSuccess);
  for (const char* name : {"trajectory.csv", "report.json", "u_profiles.svg", "eta_profiles.svg", "min_eta_theta.svg",
                           "snapshot_t0.csv", "snapshot_t0.05.csv", "curve_t0.05.csv", "curve_t0.05.json"})
    CHECK_MESSAGE(fs::exists(dir / name), name);
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["verdict"]["detected"] == false);
  const json side = json::parse(slurp(dir / "curve_t0.05.json"));
  CHECK(side["config_sha256"] == sha256_hex(c.canonical()));
  CHECK(slurp(dir / "curve_t0.05.csv").rfind("theta,re,im\n", 0) == 0);

  const fs::path wdir = scratch("weld_inputs");
  const ExperimentConfig w = parse_config(
      "[welding]\ninputs = " + (dir / "snapshot_t0.05.csv").string() + "\n", {"output.dir=" + wdir.string()});
  CHECK(run_command("weld", w).exit_code == kExitSuccess);

  const fs::path edir = scratch("weld_eta");
  const ExperimentConfig e = parse_config("[simulation]\nM = 128\n[welding]\neta_modes = 2 0.1 sin\n",
                                          {"output.dir=" + edir.string()});
  const CommandOutcome er = run_command("weld", e);
  CHECK(er.exit_code == kExitSuccess);
  bool found = false;
  for (const auto& f : er.manifest["files"]) found |= f["path"].get<std::string>().find(".svg") != std::string::npos;
  CHECK(found);
}

TEST_CASE("cli exit codes and error reports") {
  const fs::path dir = scratch("cli");
  Run r = run_cli("dance", dir);
  CHECK(r.status == kExitValidation);
  CHECK(json::parse(r.err)["error"]["code"] == "UsageError");

  r = run_cli("simulate --override simulation.dt=-1 --override 'initial.modes=2 1 sin' --out '" + (dir / "a").string() + "'",
              dir);
  CHECK(r.status == kExitValidation);
  CHECK(json::parse(r.err)["error"]["code"] == "ValidationError");

  r = run_cli("weld --override 'welding.eta_modes=1 1.2 sin' --override simulation.M=64 --out '" +
                  (dir / "b").string() + "'",
              dir);
  CHECK(r.status == kExitRuntime);
  CHECK(json::parse(r.err)["error"]["code"] == "SlopeCollapse");

  r = run_cli("certify --config '" + (dir / "nope.ini").string() + "'", dir);
  CHECK(r.status == kExitValidation);

  r = run_cli("verify --seed -3", dir);
  CHECK(r.status == kExitValidation);
}

TEST_CASE("cli verify with seed 0 and 100 trials passes") {
  const fs::path dir = scratch("verify");
  const Run r = run_cli("verify --seed 0 --override verify.trials=100 --out '" + (dir / "out").string() + "'", dir);
  REQUIRE(r.status == kExitSuccess);
  const json m = json::parse(r.out);
  CHECK(m["passed"] == true);
  const json rep = json::parse(slurp(dir / "out" / "verify_report.json"));
  CHECK(rep["seed"] == 0);
  CHECK(rep["trials"] == 100);
  CHECK(rep["passed"] == true);
  for (const auto& p : rep["properties"]) CHECK(p["failures"] == 0);
}

TEST_CASE("identical config and seed give byte-identical manifests") {
  const fs::path dir = scratch("determinism");
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << kSmallSimulation;
  }
  const Run a = run_cli("simulate --config '" + (dir / "run.ini").string() + "' --out '" + (dir / "a").string() + "'", dir);
  const Run b = run_cli("simulate --config '" + (dir / "run.ini").string() + "' --out '" + (dir / "a").string() + "'", dir);
  REQUIRE(a.status == kExitSuccess);
  REQUIRE(b.status == kExitSuccess);
  CHECK(a.out == b.out);
  CHECK(json::parse(slurp(dir / "a" / "manifest.json")) == json::parse(a.out));
}

TEST_CASE("table scenarios through run_command") {
  const std::string u0 = "[initial]\nmodes = 2 1 sin, 3 0.5 cos\n";
  const fs::path wd = scratch("table_wunsch");
  const CommandOutcome w = run_command("simulate", parse_config("equation = wunsch\n" + u0, {"output.dir=" + wd.string()}));
  CHECK(w.exit_code == kExitSuccess);
  CHECK(w.manifest["verdict"]["detected"] == true);
  CHECK(w.manifest["verdict"]["bracket"][0].get<double>() > 0.125);
  CHECK(w.manifest["verdict"]["bracket"][1].get<double>() < 0.25);

  const fs::path ed = scratch("table_ewp");
  const CommandOutcome e = run_command("simulate", parse_config("equation = ewp\n" + u0, {"output.dir=" + ed.string()}));
  CHECK(e.exit_code == kExitSuccess);
  CHECK(e.manifest["verdict"]["detected"] == false);
  CHECK(e.manifest["energy_drift"].get<double>() < 1e-6);
}
