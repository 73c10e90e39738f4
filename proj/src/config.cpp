#include "tgeo/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tgeo/errors.hpp"

namespace tgeo {
namespace {

namespace pt = boost::property_tree;

Error parse_error(const std::string& msg) { return validation_error("ParseError", msg); }
Error invalid(const std::string& msg) { return validation_error("ValidationError", msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Source location of a dotted key, for diagnostics.
class Locator {
 public:
  Locator(const std::string& text, const std::map<std::string, std::string>& overridden)
      : overridden_(overridden) {
    std::istringstream in(text);
    std::string line, section;
    for (int n = 1; std::getline(in, line); ++n) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(t.substr(0, eq));
      lines_[section.empty() ? key : section + "." + key] = n;
    }
  }

  std::string where(const std::string& key) const {
    if (overridden_.count(key)) return "override " + key;
    const auto it = lines_.find(key);
    if (it == lines_.end()) return key;
    return "line " + std::to_string(it->second) + " (" + key + ")";
  }

 private:
  std::map<std::string, int> lines_;
  const std::map<std::string, std::string>& overridden_;
};

struct Reader {
  const pt::ptree& tree;
  const Locator& loc;

  std::optional<std::string> raw(const std::string& key) const {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void number(const std::string& key, double& out) const {
    const auto v = raw(key);
    if (!v) return;
    std::size_t used = 0;
    try {
      out = std::stod(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v->size()) throw parse_error(loc.where(key) + ": expected a number, got '" + *v + "'");
  }

  void integer(const std::string& key, int& out) const {
    double d = out;
    number(key, d);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw parse_error(loc.where(key) + ": expected an integer");
    out = static_cast<int>(d);
  }

  void unsigned64(const std::string& key, std::uint64_t& out) const {
    const auto v = raw(key);
    if (!v) return;
    std::size_t used = 0;
    try {
      if (!v->empty() && (*v)[0] != '-') out = std::stoull(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v->size())
      throw parse_error(loc.where(key) + ": expected a non-negative integer, got '" + *v + "'");
  }

  void boolean(const std::string& key, bool& out) const {
    const auto v = raw(key);
    if (!v) return;
    const std::string s = lower(*v);
    if (s == "true" || s == "yes" || s == "on" || s == "1") out = true;
    else if (s == "false" || s == "no" || s == "off" || s == "0") out = false;
    else throw parse_error(loc.where(key) + ": expected true or false, got '" + *v + "'");
  }

  void text(const std::string& key, std::string& out) const {
    if (const auto v = raw(key)) out = *v;
  }

  void numbers(const std::string& key, std::vector<double>& out) const {
    const auto v = raw(key);
    if (!v) return;
    out.clear();
    std::string s = *v;
    std::replace(s.begin(), s.end(), ',', ' ');
    for (const auto& w : words(s)) {
      std::size_t used = 0;
      try {
        out.push_back(std::stod(w, &used));
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != w.size()) throw parse_error(loc.where(key) + ": expected numbers, got '" + w + "'");
    }
  }

  void modes(const std::string& key, std::vector<TrigMode>& out) const {
    const auto v = raw(key);
    if (!v) return;
    try {
      out = parse_modes(*v);
    } catch (const Error& e) {
      throw parse_error(loc.where(key) + ": " + e.what());
    }
  }
};

const std::set<std::string> kKnownKeys = {
    "equation",
    "initial.modes",          "initial.csv",
    "simulation.N",           "simulation.M",           "simulation.dt",
    "simulation.t_fin",       "simulation.sample_every", "simulation.snapshots",
    "blowup.slope_threshold", "blowup.tail_threshold",   "blowup.refine_levels",
    "blowup.continue_past",
    "welding.enabled",        "welding.prefactor",       "welding.slope_floor",
    "welding.inputs",         "welding.eta_modes",
    "verify.seed",            "verify.trials",           "verify.max_band",
    "output.dir",             "output.svg",
};

void collect_keys(const pt::ptree& tree, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [name, child] : tree) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (child.empty()) out.push_back(key);
    else collect_keys(child, key, out);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::vector<TrigMode> parse_modes(const std::string& text) {
  std::vector<TrigMode> out;
  for (const auto& entry : split(text, ',')) {
    const auto w = words(entry);
    if (w.empty()) continue;
    if (w.size() != 3)
      throw parse_error("mode entry '" + trim(entry) + "' must be 'mode amplitude phase' (phase: sin, cos or radians)");
    TrigMode m;
    std::size_t used = 0;
    try {
      const double n = std::stod(w[0], &used);
      if (used != w[0].size() || n != std::floor(n) || n < 0 || n > 1e6) throw std::invalid_argument("mode");
      m.mode = static_cast<int>(n);
      m.amplitude = std::stod(w[1], &used);
      if (used != w[1].size()) throw std::invalid_argument("amplitude");
      const std::string ph = lower(w[2]);
      if (ph == "cos") m.phase = 0.0;
      else if (ph == "sin") m.phase = -0.5 * kPi;
      else {
        m.phase = std::stod(w[2], &used);
        if (used != w[2].size()) throw std::invalid_argument("phase");
      }
    } catch (const std::exception&) {
      throw parse_error("cannot read mode entry '" + trim(entry) + "'");
    }
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase))
      throw parse_error("mode entry '" + trim(entry) + "' is not finite");
    out.push_back(m);
  }
  if (out.empty()) throw parse_error("empty mode list");
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw parse_error("line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, std::string> overridden;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || trim(o.substr(0, eq)).empty())
      throw parse_error("override '" + o + "' is not key=value");
    const std::string key = trim(o.substr(0, eq));
    const std::string value = trim(o.substr(eq + 1));
    tree.put(pt::ptree::path_type(key, '.'), value);
    overridden[key] = value;
  }
  const Locator loc(text, overridden);

  std::vector<std::string> keys;
  collect_keys(tree, "", keys);
  for (const auto& k : keys)
    if (!kKnownKeys.count(k)) throw parse_error(loc.where(k) + ": unknown field");

  const Reader r{tree, loc};
  ExperimentConfig c;
  std::string equation = "wunsch";
  r.text("equation", equation);
  try {
    c.equation = parse_operator_kind(equation);
  } catch (const Error& e) {
    throw parse_error(loc.where("equation") + ": " + e.what());
  }

  r.modes("initial.modes", c.modes);
  std::string csv;
  r.text("initial.csv", csv);
  if (!csv.empty()) c.initial_csv = resolve(base_dir, csv);

  r.integer("simulation.N", c.band_limit);
  r.integer("simulation.M", c.lagrangian_points);
  r.number("simulation.dt", c.dt);
  r.number("simulation.t_fin", c.t_fin);
  r.integer("simulation.sample_every", c.sample_every);
  r.numbers("simulation.snapshots", c.snapshot_times);

  r.number("blowup.slope_threshold", c.slope_threshold);
  r.number("blowup.tail_threshold", c.tail_threshold);
  r.integer("blowup.refine_levels", c.refine_levels);
  r.boolean("blowup.continue_past", c.continue_past_blowup);

  r.boolean("welding.enabled", c.weld);
  r.text("welding.prefactor", c.prefactor);
  c.prefactor = lower(c.prefactor);
  r.number("welding.slope_floor", c.slope_floor);
  std::string inputs;
  r.text("welding.inputs", inputs);
  std::replace(inputs.begin(), inputs.end(), ',', ' ');
  for (const auto& w : words(inputs)) c.weld_inputs.push_back(resolve(base_dir, w));
  r.modes("welding.eta_modes", c.eta_modes);

  r.unsigned64("verify.seed", c.seed);
  r.integer("verify.trials", c.verify_trials);
  r.integer("verify.max_band", c.verify_max_band);

  std::string dir;
  r.text("output.dir", dir);
  if (!dir.empty()) c.output_dir = dir;
  r.boolean("output.svg", c.svg);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw validation_error("ValidationError", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides, path.parent_path());
}

void ExperimentConfig::validate() const {
  if (band_limit < 2 || band_limit > 8192) throw invalid("simulation.N must lie in [2, 8192]");
  if (lagrangian_points < 4 || lagrangian_points > 16384) throw invalid("simulation.M must lie in [4, 16384]");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid("simulation.dt must be positive");
  if (!(t_fin > 0.0) || !std::isfinite(t_fin)) throw invalid("simulation.t_fin must be positive");
  if (dt > t_fin) throw invalid("simulation.dt exceeds simulation.t_fin");
  if (sample_every < 1) throw invalid("simulation.sample_every must be at least 1");
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= t_fin)) throw invalid("snapshot time " + std::to_string(t) + " lies outside [0, t_fin]");
  if (!(slope_threshold > 0.0 && slope_threshold < 1.0)) throw invalid("blowup.slope_threshold must lie in (0, 1)");
  if (!(tail_threshold > 0.0 && tail_threshold < 1.0)) throw invalid("blowup.tail_threshold must lie in (0, 1)");
  if (refine_levels < 0 || refine_levels > 10) throw invalid("blowup.refine_levels must lie in [0, 10]");
  if (!modes.empty() && !initial_csv.empty()) throw invalid("give either initial.modes or initial.csv, not both");
  for (const auto& m : modes)
    if (m.mode > band_limit)
      throw invalid("initial mode " + std::to_string(m.mode) + " exceeds the band limit " + std::to_string(band_limit));
  if (!initial_csv.empty() && !std::filesystem::exists(initial_csv))
    throw invalid("initial.csv " + initial_csv.string() + " does not exist");
  if (prefactor != "normalized" && prefactor != "bare")
    throw invalid("welding.prefactor must be 'normalized' or 'bare'");
  if (!(slope_floor > 0.0)) throw invalid("welding.slope_floor must be positive");
  for (const auto& p : weld_inputs)
    if (!std::filesystem::exists(p)) throw invalid("welding input " + p.string() + " does not exist");
  for (const auto& m : eta_modes)
    if (2 * m.mode >= lagrangian_points) throw invalid("welding.eta_modes exceed the Nyquist mode of simulation.M");
  if (verify_trials < 1) throw invalid("verify.trials must be at least 1");
  if (verify_max_band < 1 || verify_max_band > 256) throw invalid("verify.max_band must lie in [1, 256]");
  if (output_dir.empty()) throw invalid("output.dir must not be empty");
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const auto mode_list = [&](const std::vector<TrigMode>& ms) {
    std::string s;
    for (const auto& m : ms) s += (s.empty() ? "" : ", ") + std::to_string(m.mode) + " " + num(m.amplitude) + " " + num(m.phase);
    return s;
  };
  o << "equation=" << to_string(equation) << '\n';
  o << "initial.modes=" << mode_list(modes) << '\n';
  o << "initial.csv=" << initial_csv.string() << '\n';
  o << "simulation.N=" << band_limit << '\n';
  o << "simulation.M=" << lagrangian_points << '\n';
  o << "simulation.dt=" << num(dt) << '\n';
  o << "simulation.t_fin=" << num(t_fin) << '\n';
  o << "simulation.sample_every=" << sample_every << '\n';
  o << "simulation.snapshots=";
  for (double t : snapshot_times) o << num(t) << ' ';
  o << '\n';
  o << "blowup.slope_threshold=" << num(slope_threshold) << '\n';
  o << "blowup.tail_threshold=" << num(tail_threshold) << '\n';
  o << "blowup.refine_levels=" << refine_levels << '\n';
  o << "blowup.continue_past=" << continue_past_blowup << '\n';
  o << "welding.enabled=" << weld << '\n';
  o << "welding.prefactor=" << prefactor << '\n';
  o << "welding.slope_floor=" << num(slope_floor) << '\n';
  o << "welding.inputs=";
  for (const auto& p : weld_inputs) o << p.string() << ' ';
  o << '\n';
  o << "welding.eta_modes=" << mode_list(eta_modes) << '\n';
  o << "verify.seed=" << seed << '\n';
  o << "verify.trials=" << verify_trials << '\n';
  o << "verify.max_band=" << verify_max_band << '\n';
  return o.str();
}

FourierField ExperimentConfig::initial_velocity() const {
  if (!modes.empty()) return FourierField::from_modes(band_limit, modes);
  if (initial_csv.empty()) throw invalid("no initial condition: set initial.modes or initial.csv");
  std::ifstream in(initial_csv);
  if (!in) throw invalid("cannot open " + initial_csv.string());
  const FourierField f = read_csv(in);
  if (f.band_limit() > band_limit)
    throw invalid("initial.csv has band limit " + std::to_string(f.band_limit()) + " above simulation.N");
  return f.resized(band_limit);
}

SimulationConfig ExperimentConfig::simulation() const {
  SimulationConfig s;
  s.kind = equation;
  s.band_limit = band_limit;
  s.lagrangian_points = lagrangian_points;
  s.dt = dt;
  s.t_fin = t_fin;
  s.slope_threshold = slope_threshold;
  s.tail_threshold = tail_threshold;
  s.sample_every = sample_every;
  s.snapshot_times = snapshot_times;
  s.continue_past_blowup = continue_past_blowup;
  s.refine_levels = refine_levels;
  return s;
}

WeldingOptions ExperimentConfig::welding() const {
  WeldingOptions w;
  w.prefactor = prefactor == "bare" ? kBarePrefactor : kNormalizedPrefactor;
  w.slope_floor = slope_floor;
  return w;
}

}  // namespace tgeo
