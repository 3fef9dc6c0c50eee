#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hetflux/errors.hpp"
#include "hetflux/flux_model.hpp"
#include "hetflux/mesh.hpp"
#include "hetflux/solver.hpp"

namespace hetflux {

/// One recognised key of the INI format. An empty default means "no default".
struct KeySpec {
  const char* name;  // "section.key"
  const char* fallback;
  const char* help;
};

inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema{
      {"flux.family", "", "power | two_state | hetero_quadratic | lwr"},
      {"flux.coeff", "0.5", "power: H = coeff u^2"},
      {"flux.left", "0.5 0 0", "two_state: a b c of a (u - b)^2 + c on x < 0"},
      {"flux.right", "1 0 0", "two_state: a b c of a (u - b)^2 + c on x > 0"},
      {"flux.theta", "1 0.5@0:1", "hetero_quadratic: profile of theta(x)"},
      {"flux.ell", "0 0.5@0.2:0.8", "hetero_quadratic: profile of ell(x)"},
      {"flux.g", "0 -0.25@0:1", "hetero_quadratic: profile of g(x)"},
      {"flux.speed", "1 0.5@0:1", "lwr: profile of the free speed V(x)"},
      {"flux.rho_max", "1 -0.4@0:1", "lwr: profile of the jam density R(x)"},
      {"mesh.dx", "", "cell width"},
      {"mesh.x_min", "", "left end of the window (default: auto from the heterogeneity)"},
      {"mesh.x_max", "", "right end of the window"},
      {"initial.type", "step", "constant | step | piecewise | bump | file"},
      {"initial.value", "0", "constant: the value"},
      {"initial.position", "0", "step: jump location"},
      {"initial.left", "-1", "step: left state"},
      {"initial.right", "1", "step: right state"},
      {"initial.breaks", "", "piecewise: increasing break points"},
      {"initial.values", "", "piecewise: one more value than breaks"},
      {"initial.profile", "0 1@0:0.5", "bump: profile"},
      {"initial.file", "", "file: two columns x u, linear interpolation"},
      {"time.t_end", "", "final time"},
      {"time.snapshots", "", "extra output times"},
      {"time.cfl_safety", "0.9", "fraction of the stable time step, in (0, 1]"},
      {"time.max_dt", "inf", "upper bound on the time step"},
      {"output.directory", "hetflux-out", "output directory (relative to the output root)"},
      {"output.plot", "true", "write a gnuplot script"},
      {"diagnostics.entropy", "true", "check the discrete entropy inequalities"},
      {"diagnostics.k_levels", "33", "entropy levels on the envelope"},
      {"diagnostics.consistency", "true", "interface flux consistency rate"},
      {"diagnostics.time_variation", "true", "quadratic time variation sum"},
      {"diagnostics.convergence", "false", "refinement study"},
      {"diagnostics.levels", "4", "refinement levels"},
      {"diagnostics.window_min", "-1", "left end of the error window"},
      {"diagnostics.window_max", "1", "right end of the error window"},
      {"riemann.u_left", "", "left state"},
      {"riemann.u_right", "", "right state"},
      {"riemann.xi_min", "-3", "first sampled x / t"},
      {"riemann.xi_max", "3", "last sampled x / t"},
      {"riemann.samples", "601", "number of sampled points"},
      {"steady.anchor", "", "value in the first swept cell (default: envelope states)"},
      {"steady.branch", "upper", "upper | lower"},
      {"steady.direction", "from_left", "from_left | from_right"},
      {"steady.m", "-1", "envelope: lower data bound"},
      {"steady.M", "1", "envelope: upper data bound"},
  };
  return schema;
}

namespace detail {

inline const KeySpec* find_key(const std::string& name) {
  for (const KeySpec& k : config_schema()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Raw key/value pairs, validated against the schema, defaults applied on lookup.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  void set(const std::string& name, const std::string& value) {
    if (!detail::find_key(name)) throw ConfigError(name, "unknown key");
    values_[name] = detail::trim(value);
  }

  bool has(const std::string& name) const {
    const auto it = values_.find(name);
    if (it != values_.end()) return !it->second.empty();
    const KeySpec* k = detail::find_key(name);
    return k && *k->fallback != '\0';
  }

  std::string text(const std::string& name) const {
    const KeySpec* k = detail::find_key(name);
    if (!k) throw ConfigError(name, "unknown key");
    const auto it = values_.find(name);
    if (it != values_.end() && !it->second.empty()) return it->second;
    if (*k->fallback == '\0') throw ConfigError(name, "required key is missing");
    return k->fallback;
  }

  double number(const std::string& name) const {
    const std::string s = text(name);
    if (s == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(name, "not a number: '" + s + "'");
    }
    if (used != s.size() || std::isnan(v)) throw ConfigError(name, "not a number: '" + s + "'");
    return v;
  }

  long integer(const std::string& name) const {
    const double v = number(name);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(name, "not an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& name) const {
    const std::string s = text(name);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(name, "not a boolean: '" + s + "'");
  }

  std::vector<double> numbers(const std::string& name) const {
    std::vector<double> out;
    if (!has(name)) return out;
    std::string s = text(name);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ConfigError(name, "not a number list: '" + s + "'");
      }
      if (used != tok.size() || !std::isfinite(v)) throw ConfigError(name, "not a number list: '" + s + "'");
      out.push_back(v);
    }
    return out;
  }

  std::string choice(const std::string& name, const std::vector<std::string>& allowed) const {
    const std::string s = text(name);
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(name, "'" + s + "' is not one of " + list);
    }
    return s;
  }

  /// Directory that relative file paths are resolved against.
  std::filesystem::path base_dir;

  /// Every key of the schema with its effective value (empty when unset without default).
  std::string echo() const {
    std::ostringstream os;
    std::string section;
    for (const KeySpec& k : config_schema()) {
      const std::string name = k.name;
      const std::string sec = name.substr(0, name.find('.'));
      if (sec != section) {
        os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
        section = sec;
      }
      const auto it = values_.find(name);
      const std::string v = it != values_.end() && !it->second.empty() ? it->second : k.fallback;
      os << name.substr(name.find('.') + 1) << " = " << v << '\n';
    }
    return os.str();
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Applies "section.key=value" on top of the config.
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override must look like section.key=value");
  cfg.set(detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<string>") {
  namespace pt = boost::property_tree;
  // Drops trailing "; comment" and "# comment" so the INI reader sees bare values.
  std::istringstream raw(text);
  std::string cleaned, line;
  while (std::getline(raw, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.resize(i);
        break;
      }
    }
    cleaned += line + '\n';
  }
  pt::ptree tree;
  std::istringstream in(cleaned);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
    for (const auto& [key, value] : body) cfg.set(section + "." + key, value.data());
  }
  return cfg;
}

/// Reads an INI file. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config_text(buf.str(), path.string());
  cfg.base_dir = path.parent_path();
  return cfg;
}

// ---------------------------------------------------------------------------
// Building library objects

namespace detail {

inline Quadratic parse_quadratic(const ExperimentConfig& cfg, const std::string& key) {
  const std::vector<double> v = cfg.numbers(key);
  if (v.size() != 3) throw ConfigError(key, "expected three numbers a b c");
  if (!(v[0] > 0.0)) throw ConfigError(key, "leading coefficient must be > 0");
  return {v[0], v[1], v[2]};
}

inline Profile parse_profile(const ExperimentConfig& cfg, const std::string& key) {
  try {
    return Profile::parse(cfg.text(key));
  } catch (const PreconditionError& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace detail

inline FluxModel make_model(const ExperimentConfig& cfg) {
  const std::string family = cfg.choice("flux.family", {"power", "two_state", "hetero_quadratic", "lwr"});
  try {
    if (family == "power") {
      const double c = cfg.number("flux.coeff");
      if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("flux.coeff", "must be finite and > 0");
      return FluxModel::power(c);
    }
    if (family == "two_state") {
      return FluxModel::two_state(detail::parse_quadratic(cfg, "flux.left"), detail::parse_quadratic(cfg, "flux.right"));
    }
    if (family == "hetero_quadratic") {
      const Profile theta = detail::parse_profile(cfg, "flux.theta");
      if (!(theta.lower_bound() > 0.0)) throw ConfigError("flux.theta", "profile must stay positive");
      return FluxModel::heterogeneous_quadratic(theta, detail::parse_profile(cfg, "flux.ell"),
                                                detail::parse_profile(cfg, "flux.g"));
    }
    const Profile speed = detail::parse_profile(cfg, "flux.speed");
    const Profile rho = detail::parse_profile(cfg, "flux.rho_max");
    if (!(speed.lower_bound() > 0.0)) throw ConfigError("flux.speed", "profile must stay positive");
    if (!(rho.lower_bound() > 0.0)) throw ConfigError("flux.rho_max", "profile must stay positive");
    return FluxModel::lwr(speed, rho);
  } catch (const PreconditionError& e) {
    throw ConfigError("flux." + family, e.what());
  }
}

inline double mesh_dx(const ExperimentConfig& cfg) {
  const double dx = cfg.number("mesh.dx");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("mesh.dx", "must be finite and > 0");
  return dx;
}

/// The window defaults to [-(X + 2), X + 2] (X = 1 for interface-only models), rounded out to dx.
inline Mesh make_mesh(const ExperimentConfig& cfg, const FluxModel& model) {
  const double dx = mesh_dx(cfg);
  const bool lo = cfg.has("mesh.x_min"), hi = cfg.has("mesh.x_max");
  if (lo != hi) throw ConfigError(lo ? "mesh.x_max" : "mesh.x_min", "set both ends of the window or neither");
  try {
    if (!lo) return Mesh::symmetric(model.sampling_radius() + 2.0, dx);
    const double a = cfg.number("mesh.x_min"), b = cfg.number("mesh.x_max");
    if (!(b > a)) throw ConfigError("mesh.x_max", "must exceed mesh.x_min");
    return Mesh(a, b, dx);
  } catch (const PreconditionError& e) {
    throw ConfigError("mesh.dx", e.what());
  }
}

namespace detail {

inline SampledDatum read_datum_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("initial.file", "cannot read " + path.string());
  SampledDatum d;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0.0, u = 0.0;
    if (!(ls >> x)) {
      if (trim(line).empty() || lineno == 1) continue;  // blank line or header row
      throw ConfigError("initial.file", path.string() + ":" + std::to_string(lineno) + ": expected 'x u'");
    }
    if (!(ls >> u)) throw ConfigError("initial.file", path.string() + ":" + std::to_string(lineno) + ": expected 'x u'");
    d.x.push_back(x);
    d.u.push_back(u);
  }
  if (d.x.size() < 2) throw ConfigError("initial.file", "need at least two samples");
  return d;
}

}  // namespace detail

inline InitialDatum make_datum(const ExperimentConfig& cfg) {
  const std::string type = cfg.choice("initial.type", {"constant", "step", "piecewise", "bump", "file"});
  InitialDatum d;
  if (type == "constant") {
    d = ConstantDatum{cfg.number("initial.value")};
  } else if (type == "step") {
    d = step_datum(cfg.number("initial.position"), cfg.number("initial.left"), cfg.number("initial.right"));
  } else if (type == "piecewise") {
    const std::vector<double> breaks = cfg.numbers("initial.breaks");
    const std::vector<double> values = cfg.numbers("initial.values");
    if (values.size() != breaks.size() + 1) throw ConfigError("initial.values", "need one more value than breaks");
    if (!std::is_sorted(breaks.begin(), breaks.end())) throw ConfigError("initial.breaks", "must be increasing");
    d = PiecewiseConstantDatum{breaks, values};
  } else if (type == "bump") {
    d = SmoothDatum{detail::parse_profile(cfg, "initial.profile")};
  } else {
    std::filesystem::path p = cfg.text("initial.file");
    if (p.is_relative()) p = cfg.base_dir / p;
    d = detail::read_datum_file(p);
  }
  try {
    detail::validate_datum(d);
  } catch (const PreconditionError& e) {
    throw ConfigError("initial." + type, e.what());
  }
  return d;
}

/// Solver settings; t_end is required here.
inline RunConfig make_run_config(const ExperimentConfig& cfg) {
  const FluxModel model = make_model(cfg);
  RunConfig rc{model, make_mesh(cfg, model), make_datum(cfg), cfg.number("time.t_end"), cfg.numbers("time.snapshots")};
  if (!(rc.t_end >= 0.0) || !std::isfinite(rc.t_end)) throw ConfigError("time.t_end", "must be finite and >= 0");
  for (double t : rc.snapshot_times) {
    if (t < 0.0) throw ConfigError("time.snapshots", "times must be >= 0");
  }
  rc.safety = cfg.number("time.cfl_safety");
  if (!(rc.safety > 0.0 && rc.safety <= 1.0)) throw ConfigError("time.cfl_safety", "must lie in (0, 1]");
  rc.max_dt = cfg.number("time.max_dt");
  if (!(rc.max_dt > 0.0)) throw ConfigError("time.max_dt", "must be > 0");
  return rc;
}

/// Checks every key that has a value, independently of the subcommand.
inline void validate_config(const ExperimentConfig& cfg) {
  const FluxModel model = make_model(cfg);
  if (cfg.has("mesh.dx")) make_mesh(cfg, model);
  make_datum(cfg);
  if (cfg.has("time.t_end")) make_run_config(cfg);
  cfg.flag("output.plot");
  if (cfg.text("output.directory").empty()) throw ConfigError("output.directory", "must not be empty");
  for (const char* k : {"diagnostics.entropy", "diagnostics.consistency", "diagnostics.time_variation",
                        "diagnostics.convergence"}) {
    cfg.flag(k);
  }
  if (cfg.integer("diagnostics.k_levels") < 2) throw ConfigError("diagnostics.k_levels", "must be >= 2");
  if (cfg.integer("diagnostics.levels") < 2) throw ConfigError("diagnostics.levels", "must be >= 2");
  if (!(cfg.number("diagnostics.window_min") < cfg.number("diagnostics.window_max"))) {
    throw ConfigError("diagnostics.window_max", "must exceed diagnostics.window_min");
  }
  if (!(cfg.number("riemann.xi_min") < cfg.number("riemann.xi_max"))) {
    throw ConfigError("riemann.xi_max", "must exceed riemann.xi_min");
  }
  if (cfg.integer("riemann.samples") < 2) throw ConfigError("riemann.samples", "must be >= 2");
  if (cfg.has("riemann.u_left") && !std::isfinite(cfg.number("riemann.u_left"))) {
    throw ConfigError("riemann.u_left", "must be finite");
  }
  if (cfg.has("riemann.u_right") && !std::isfinite(cfg.number("riemann.u_right"))) {
    throw ConfigError("riemann.u_right", "must be finite");
  }
  cfg.choice("steady.branch", {"upper", "lower"});
  cfg.choice("steady.direction", {"from_left", "from_right"});
  if (cfg.has("steady.anchor") && !std::isfinite(cfg.number("steady.anchor"))) {
    throw ConfigError("steady.anchor", "must be finite");
  }
  if (!(cfg.number("steady.m") <= cfg.number("steady.M"))) throw ConfigError("steady.M", "must be >= steady.m");
}

}  // namespace hetflux
