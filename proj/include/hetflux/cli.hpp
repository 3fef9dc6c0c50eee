#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetflux/config.hpp"
#include "hetflux/diagnostics.hpp"

#ifndef HETFLUX_VERSION
#define HETFLUX_VERSION "0.0.0"
#endif

namespace hetflux::cli {

enum ExitCode : int { ok = 0, usage = 1, validation = 2, numerical = 3, breach = 4 };

inline constexpr double kMassDriftLimit = 1e-10;
inline constexpr double kDeiLimit = 1e-10;
inline constexpr double kSteadyResidualLimit = 1e-10;
inline constexpr double kConsistencySlope = 0.9;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Output directory plus the manifest being assembled for it.
class OutputSet {
 public:
  OutputSet(const ExperimentConfig& cfg, std::string subcommand) : cfg_(cfg) {
    std::filesystem::path dir = cfg.text("output.directory");
    if (const char* root = std::getenv("HETFLUX_OUTPUT_ROOT"); root && *root && dir.is_relative()) {
      dir = std::filesystem::path(root) / dir;
    }
    dir_ = dir;
    std::filesystem::create_directories(dir_);
    manifest_["tool"] = "hetflux";
    manifest_["version"] = HETFLUX_VERSION;
    manifest_["subcommand"] = std::move(subcommand);
    const std::string echo = cfg.echo();
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(echo)));
    manifest_["config_hash"] = std::string("fnv1a64:") + hash;
    write_text("config.ini", echo);
  }

  const std::filesystem::path& dir() const { return dir_; }
  nlohmann::ordered_json& manifest() { return manifest_; }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + num(row[i]);
      text += '\n';
    }
    write_text(name, text);
  }

  /// gnuplot script plotting columns 2.. of `csv` against column 1.
  void write_plot(const std::string& csv, const std::string& xlabel, std::size_t columns) {
    if (!cfg_.flag("output.plot")) return;
    std::string gp = "set datafile separator ','\nset key autotitle columnhead\nset xlabel '" + xlabel +
                     "'\nset terminal pngcairo size 900,600\nset output '" +
                     csv.substr(0, csv.rfind('.')) + ".png'\nplot";
    for (std::size_t c = 2; c <= columns; ++c) {
      gp += (c > 2 ? "," : "") + std::string(" '") + csv + "' using 1:" + std::to_string(c) + " with lines";
    }
    write_text(csv.substr(0, csv.rfind('.')) + ".gp", gp + "\n");
  }

  void finish(int status, double seconds) {
    manifest_["status"] = status;
    manifest_["timing_seconds"] = seconds;
    files_.push_back("manifest.json");
    manifest_["files"] = files_;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest_.dump(2) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
  nlohmann::ordered_json manifest_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------

inline int cmd_run(const ExperimentConfig& cfg, OutputSet& out) {
  const RunConfig rc = make_run_config(cfg);
  const Trajectory tr = run(rc);
  const FluxModel& model = rc.model;

  std::vector<std::string> header{"x"};
  for (const GridState& s : tr.snapshots) header.push_back("u@" + num(s.time));
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < rc.mesh.size(); ++j) {
    std::vector<double> row{rc.mesh.center(static_cast<std::ptrdiff_t>(j))};
    for (const GridState& s : tr.snapshots) row.push_back(model.to_physical(s.u[j]));
    rows.push_back(std::move(row));
  }
  out.write_csv("solution.csv", header, rows);
  out.write_plot("solution.csv", "x", header.size());

  auto& m = out.manifest();
  m["steps"] = tr.steps;
  m["dt"] = tr.cfl.dt;
  m["lipschitz"] = tr.cfl.L;
  const double e0 = model.to_physical(tr.envelope.lower), e1 = model.to_physical(tr.envelope.upper);
  m["envelope"] = {std::min(e0, e1), std::max(e0, e1)};
  m["envelope_violations"] = tr.envelope_violations;
  m["relative_mass_drift"] = tr.relative_mass_drift();
  m["warnings"] = tr.warnings;
  for (const std::string& w : tr.warnings) std::cerr << "warning: " << w << '\n';

  int status = ExitCode::ok;
  if (tr.envelope_violations > 0) {
    std::cerr << "invariant breach: " << tr.envelope_violations << " cells left the envelope\n";
    status = ExitCode::breach;
  }
  if (tr.relative_mass_drift() > kMassDriftLimit) {
    std::cerr << "invariant breach: relative mass drift " << tr.relative_mass_drift() << '\n';
    status = ExitCode::breach;
  }
  return status;
}

inline int cmd_riemann(const ExperimentConfig& cfg, OutputSet& out) {
  const FluxModel model = make_model(cfg);
  const double ul = model.to_internal(cfg.number("riemann.u_left"));
  const double ur = model.to_internal(cfg.number("riemann.u_right"));
  const InterfaceContext ctx = InterfaceContext::far_field(model);
  const RiemannSolution sol = solve_interface(ctx, ul, ur);
  const double lo = cfg.number("riemann.xi_min"), hi = cfg.number("riemann.xi_max");
  const long n = cfg.integer("riemann.samples");

  std::vector<std::vector<double>> rows;
  for (long i = 0; i < n; ++i) {
    const double xi = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    rows.push_back({xi, model.to_physical(sol.sample(xi))});
  }
  out.write_csv("riemann.csv", {"xi", "u"}, rows);
  out.write_plot("riemann.csv", "x/t", 2);

  auto& m = out.manifest();
  m["case"] = to_string(sol.case_tag);
  m["trace_left"] = model.to_physical(sol.trace_left);
  m["trace_right"] = model.to_physical(sol.trace_right);
  m["interface_flux"] = model.is_concave() ? -sol.interface_flux_value : sol.interface_flux_value;
  nlohmann::ordered_json waves = nlohmann::ordered_json::array();
  for (const Wave& w : sol.waves) {
    const char* kind = w.kind == WaveKind::shock         ? "shock"
                       : w.kind == WaveKind::rarefaction ? "rarefaction"
                                                         : "stationary_shock";
    waves.push_back({{"kind", kind},
                     {"speed_min", w.s_min},
                     {"speed_max", w.s_max},
                     {"left_state", model.to_physical(w.left_state)},
                     {"right_state", model.to_physical(w.right_state)}});
  }
  m["waves"] = waves;
  return ExitCode::ok;
}

inline int cmd_steady(const ExperimentConfig& cfg, OutputSet& out) {
  const FluxModel model = make_model(cfg);
  const Discretization disc(model, make_mesh(cfg, model));
  const Mesh& mesh = disc.mesh();
  auto& m = out.manifest();
  std::vector<std::vector<double>> rows;
  double residual = 0.0;

  if (cfg.has("steady.anchor")) {
    // Branches are named in the physical variable; concave models flip them.
    const bool upper = cfg.choice("steady.branch", {"upper", "lower"}) == "upper";
    const SteadyBranch branch = upper != model.is_concave() ? SteadyBranch::upper : SteadyBranch::lower;
    const SweepDirection dir = cfg.choice("steady.direction", {"from_left", "from_right"}) == "from_left"
                                   ? SweepDirection::from_left
                                   : SweepDirection::from_right;
    const SteadyState s = build_steady(disc, model.to_internal(cfg.number("steady.anchor")), dir, branch);
    residual = steady_residual(s, disc);
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      rows.push_back({mesh.center(static_cast<std::ptrdiff_t>(j)), model.to_physical(s.values[j])});
    }
    out.write_csv("steady.csv", {"x", "v"}, rows);
    out.write_plot("steady.csv", "x", 2);
    m["flux_level"] = model.is_concave() ? -s.flux_level : s.flux_level;
  } else {
    const double a = model.to_internal(cfg.number("steady.m")), b = model.to_internal(cfg.number("steady.M"));
    const Envelope e = envelope(disc, std::min(a, b), std::max(a, b));
    residual = std::max(steady_residual(e.lower_state, disc), steady_residual(e.upper_state, disc));
    const SteadyState& phys_lo = model.is_concave() ? e.upper_state : e.lower_state;
    const SteadyState& phys_hi = model.is_concave() ? e.lower_state : e.upper_state;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      rows.push_back({mesh.center(static_cast<std::ptrdiff_t>(j)), model.to_physical(phys_lo.values[j]),
                      model.to_physical(phys_hi.values[j])});
    }
    out.write_csv("steady.csv", {"x", "lower", "upper"}, rows);
    out.write_plot("steady.csv", "x", 3);
    const double lo = model.to_physical(model.is_concave() ? e.bounds.upper : e.bounds.lower);
    const double hi = model.to_physical(model.is_concave() ? e.bounds.lower : e.bounds.upper);
    m["envelope"] = {lo, hi};
  }
  m["residual"] = residual;
  if (residual > kSteadyResidualLimit) {
    std::cerr << "invariant breach: steady residual " << residual << '\n';
    return ExitCode::breach;
  }
  return ExitCode::ok;
}

inline int cmd_diagnose(const ExperimentConfig& cfg, OutputSet& out) {
  RunConfig rc = make_run_config(cfg);
  rc.keep_all_levels = true;
  const Trajectory tr = run(rc);
  const FluxModel& model = rc.model;
  const Discretization disc(model, rc.mesh);
  const double wlo = cfg.number("diagnostics.window_min"), whi = cfg.number("diagnostics.window_max");

  struct Row {
    std::string name;
    double value;
    double threshold;
    bool pass;
  };
  std::vector<Row> checks;
  checks.push_back({"envelope_violations", static_cast<double>(tr.envelope_violations), 0.0, tr.envelope_violations == 0});
  checks.push_back({"relative_mass_drift", tr.relative_mass_drift(), kMassDriftLimit,
                    tr.relative_mass_drift() <= kMassDriftLimit});

  if (cfg.flag("diagnostics.entropy")) {
    const auto [plo, phi] = datum_bounds(rc.initial);
    const double a = model.to_internal(plo), b = model.to_internal(phi);
    const long nk = cfg.integer("diagnostics.k_levels");
    std::vector<double> ks;
    for (long i = 0; i < nk; ++i) {
      ks.push_back(tr.envelope.lower + (tr.envelope.upper - tr.envelope.lower) * static_cast<double>(i) /
                                           static_cast<double>(nk - 1));
    }
    ks.push_back(std::min(a, b));
    ks.push_back(std::max(a, b));
    const EntropyReport rep = check_dei(tr.levels, disc, ks);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ks.size(); ++i) rows.push_back({model.to_physical(ks[i]), rep.per_k[i]});
    out.write_csv("entropy.csv", {"k", "violation"}, rows);
    checks.push_back({"entropy_violation_scaled", rep.worst_scaled, kDeiLimit, rep.passes(kDeiLimit)});
  }

  if (cfg.flag("diagnostics.consistency")) {
    if (model.is_homogeneous() || !model.jumps().empty()) {
      out.manifest()["notes"].push_back("consistency rate skipped: needs a smooth heterogeneous flux");
    } else {
      const CriticalCurve& c = model.curve();
      std::vector<std::vector<double>> rows;
      for (double k : {c.alpha_min() - 1.0, 0.5 * (c.alpha_min() + c.alpha_max()), c.alpha_max() + 1.0}) {
        const double dx = rc.mesh.dx();
        const ConsistencyReport rep = consistency_rate(model, k, {dx, dx / 2, dx / 4, dx / 8});
        for (std::size_t i = 0; i < rep.dx.size(); ++i) rows.push_back({k, rep.dx[i], rep.defect[i], rep.bound[i]});
        if (rep.exact) out.manifest()["notes"].push_back("interface flux exact at k=" + num(model.to_physical(k)));
        checks.push_back({"consistency_slope@k=" + num(model.to_physical(k)), rep.exact ? 1.0 : rep.slope,
                          kConsistencySlope, rep.exact || rep.slope >= kConsistencySlope});
      }
      out.write_csv("consistency.csv", {"k_internal", "dx", "defect", "bound"}, rows);
    }
  }

  if (cfg.flag("diagnostics.time_variation")) {
    checks.push_back({"time_variation_sum", time_variation_sum(tr.levels, rc.mesh, wlo, whi), 0.0, true});
  }

  if (cfg.flag("diagnostics.convergence")) {
    // Wide enough that boundary waves never reach the error window.
    const double half = std::max({-rc.mesh.x_min(), rc.mesh.x_max(),
                                  std::max(-wlo, whi) + tr.cfl.L * rc.t_end + 1.0});
    const ConvergenceScenario sc{model, std::ceil(half), rc.initial, rc.t_end, wlo, whi, rc.safety};
    ConvergenceReference ref;
    const auto* step = std::get_if<PiecewiseConstantDatum>(&rc.initial);
    if (step && step->breaks.size() == 1 && step->breaks[0] == 0.0 && model.hetero_radius() == 0.0) {
      ref.exact = solve_interface(InterfaceContext::far_field(model), model.to_internal(step->values[0]),
                                  model.to_internal(step->values[1]));
    } else {
      ref.kind = ReferenceKind::fine_grid;
    }
    const ConvergenceReport rep =
        convergence_study(sc, ref, rc.mesh.dx(), static_cast<int>(cfg.integer("diagnostics.levels")));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.dx.size(); ++i) {
      rows.push_back({rep.dx[i], rep.errors[i], i == 0 ? std::nan("") : rep.orders[i - 1]});
    }
    out.write_csv("convergence.csv", {"dx", "l1_error", "order"}, rows);
    out.manifest()["convergence_reference"] = rep.reference;
    for (const std::string& n : rep.notes) out.manifest()["notes"].push_back(n);
    checks.push_back({"convergence_strictly_decreasing", rep.strictly_decreasing() ? 1.0 : 0.0, 1.0,
                      rep.strictly_decreasing()});
  }

  std::string text = "check,value,threshold,status\n";
  bool all = true;
  for (const Row& r : checks) {
    text += r.name + "," + num(r.value) + "," + num(r.threshold) + "," + (r.pass ? "pass" : "fail") + "\n";
    all = all && r.pass;
    std::cout << (r.pass ? "pass " : "FAIL ") << r.name << " = " << num(r.value) << '\n';
  }
  out.write_text("diagnostics.csv", text);
  return all ? ExitCode::ok : ExitCode::breach;
}

inline int cmd_validate(const ExperimentConfig& cfg, OutputSet& out) {
  const FluxModel model = make_model(cfg);
  const AssumptionReport rep = validate_assumptions(model);
  std::string text = "kind,x,u,detail\n";
  for (const Violation& v : rep.violations) {
    text += std::string(to_string(v.kind)) + "," + num(v.x) + "," + num(v.u) + ",\"" + v.detail + "\"\n";
  }
  out.write_text("violations.csv", text);
  out.manifest()["violations"] = rep.total();
  std::cout << (rep.ok() ? "flux model satisfies the sampled assumptions\n" : "flux model violates assumptions\n");
  for (const Violation& v : rep.violations) std::cout << "  " << to_string(v.kind) << ": " << v.detail << '\n';
  return rep.ok() ? ExitCode::ok : ExitCode::breach;
}

// ---------------------------------------------------------------------------

/// Entry point of the command-line tool.
inline int dispatch(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for scalar conservation laws with space-heterogeneous convex flux"};
  app.set_version_flag("--version", HETFLUX_VERSION);
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const ExperimentConfig&, OutputSet&);
  };
  const std::vector<Command> commands{
      {"run", "evolve the initial datum and write snapshots", cmd_run},
      {"riemann", "sample the exact interface Riemann solution", cmd_riemann},
      {"steady", "construct discrete steady states", cmd_steady},
      {"diagnose", "run and check entropy, consistency and convergence", cmd_diagnose},
      {"validate", "check the configuration and the flux assumptions", cmd_validate},
  };

  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("config", config_path, "INI configuration file");
    sub->add_option("-s,--set", sets, "override: section.key=value (repeatable)");
    for (const KeySpec& k : config_schema()) {
      sub->add_option_function<std::string>(
          std::string("--") + k.name, [&flags, name = std::string(k.name)](const std::string& v) { flags[name] = v; },
          *k.fallback ? std::string(k.help) + " [default: " + k.fallback + "]" : std::string(k.help));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ExitCode::ok : ExitCode::usage;
  }

  const Command* chosen = nullptr;
  for (const Command& c : commands) {
    if (app.got_subcommand(c.name)) chosen = &c;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config(config_path);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    for (const std::string& s : sets) apply_override(cfg, s);
    validate_config(cfg);
    OutputSet out(cfg, chosen->name);
    int status = ExitCode::ok;
    try {
      status = chosen->fn(cfg, out);
    } catch (...) {
      out.finish(-1, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      throw;
    }
    out.finish(status, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::cout << "wrote " << out.dir().string() << '\n';
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::validation;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return ExitCode::validation;
  } catch (const RootFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  } catch (const CflViolation& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::numerical;
  }
}

}  // namespace hetflux::cli
