#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hetflux/errors.hpp"
#include "hetflux/flux_model.hpp"
#include "hetflux/mesh.hpp"
#include "hetflux/profile.hpp"
#include "hetflux/steady_states.hpp"

namespace hetflux {

// Initial data, in the physical variable.

struct ConstantDatum {
  double value = 0.0;
};

/// values[0] left of breaks[0], values[k] on [breaks[k-1], breaks[k]), values.back() to the right.
struct PiecewiseConstantDatum {
  std::vector<double> breaks;
  std::vector<double> values;
};

struct SmoothDatum {
  Profile profile;
};

/// Piecewise-linear interpolation of samples, constant beyond the ends.
struct SampledDatum {
  std::vector<double> x;
  std::vector<double> u;
};

using InitialDatum = std::variant<ConstantDatum, PiecewiseConstantDatum, SmoothDatum, SampledDatum>;

inline InitialDatum step_datum(double x0, double left, double right) {
  return PiecewiseConstantDatum{{x0}, {left, right}};
}

namespace detail {

inline constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                      0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665,
                                                        0.5688888888888889, 0.4786286704993665,
                                                        0.2369268850561891};

template <class F>
double gauss5(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i) s += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return s * half;
}

inline double sampled_value(const SampledDatum& d, double x) {
  if (x <= d.x.front()) return d.u.front();
  if (x >= d.x.back()) return d.u.back();
  const auto it = std::upper_bound(d.x.begin(), d.x.end(), x);
  const auto k = static_cast<std::size_t>(it - d.x.begin());
  const double t = (x - d.x[k - 1]) / (d.x[k] - d.x[k - 1]);
  return d.u[k - 1] + t * (d.u[k] - d.u[k - 1]);
}

inline void validate_datum(const InitialDatum& datum) {
  auto finite_all = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
  };
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDatum>) {
          if (!std::isfinite(d.value)) throw PreconditionError("initial datum: unbounded constant");
        } else if constexpr (std::is_same_v<T, PiecewiseConstantDatum>) {
          if (d.values.size() != d.breaks.size() + 1) throw PreconditionError("initial datum: need breaks + 1 values");
          if (!finite_all(d.values) || !finite_all(d.breaks)) throw PreconditionError("initial datum: unbounded values");
          if (!std::is_sorted(d.breaks.begin(), d.breaks.end())) throw PreconditionError("initial datum: unsorted breaks");
        } else if constexpr (std::is_same_v<T, SmoothDatum>) {
          if (!std::isfinite(d.profile.base())) throw PreconditionError("initial datum: unbounded profile");
        } else {
          if (d.x.empty() || d.x.size() != d.u.size()) throw PreconditionError("initial datum: bad samples");
          if (!finite_all(d.x) || !finite_all(d.u)) throw PreconditionError("initial datum: unbounded samples");
          if (std::adjacent_find(d.x.begin(), d.x.end(), std::greater_equal<>()) != d.x.end()) {
            throw PreconditionError("initial datum: sample positions must increase strictly");
          }
        }
      },
      datum);
}

}  // namespace detail

/// Pointwise value (right-continuous at breaks).
inline double evaluate(const InitialDatum& datum, double x) {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDatum>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, PiecewiseConstantDatum>) {
          const auto it = std::upper_bound(d.breaks.begin(), d.breaks.end(), x);
          return d.values[static_cast<std::size_t>(it - d.breaks.begin())];
        } else if constexpr (std::is_same_v<T, SmoothDatum>) {
          return d.profile(x);
        } else {
          return detail::sampled_value(d, x);
        }
      },
      datum);
}

/// [inf, sup] of the datum.
inline std::pair<double, double> datum_bounds(const InitialDatum& datum) {
  detail::validate_datum(datum);
  return std::visit(
      [](const auto& d) -> std::pair<double, double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDatum>) {
          return {d.value, d.value};
        } else if constexpr (std::is_same_v<T, PiecewiseConstantDatum>) {
          const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
          return {*lo, *hi};
        } else if constexpr (std::is_same_v<T, SmoothDatum>) {
          double lo = d.profile.base(), hi = d.profile.base();
          const double r = d.profile.support_radius();
          for (int i = 0; i <= 20000; ++i) {
            const double v = d.profile(-r + 2.0 * r * i / 20000.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
          return {lo, hi};
        } else {
          const auto [lo, hi] = std::minmax_element(d.u.begin(), d.u.end());
          return {*lo, *hi};
        }
      },
      datum);
}

/// Cell averages of the datum: exact for piecewise-constant data, 5-point
/// Gauss on smooth pieces otherwise.
inline GridState project_initial(const InitialDatum& datum, const Mesh& mesh) {
  detail::validate_datum(datum);
  GridState s;
  s.u.resize(mesh.size());
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const double a = mesh.edge(static_cast<std::ptrdiff_t>(j));
    const double b = mesh.edge(static_cast<std::ptrdiff_t>(j) + 1);
    const double width = b - a;
    s.u[j] = std::visit(
        [&](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantDatum>) {
            return d.value;
          } else if constexpr (std::is_same_v<T, PiecewiseConstantDatum>) {
            const auto first = std::upper_bound(d.breaks.begin(), d.breaks.end(), a) - d.breaks.begin();
            const auto last = std::lower_bound(d.breaks.begin(), d.breaks.end(), b) - d.breaks.begin();
            if (first == last) return d.values[static_cast<std::size_t>(first)];
            double acc = 0.0;
            double lo = a;
            for (std::size_t k = 0; k <= d.breaks.size(); ++k) {
              const double hi = k < d.breaks.size() ? std::min(b, d.breaks[k]) : b;
              if (hi > lo) {
                acc += d.values[k] * (hi - lo);
                lo = hi;
              }
            }
            return acc / width;
          } else if constexpr (std::is_same_v<T, SmoothDatum>) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
              acc += detail::gauss5(d.profile, a + k * width / 4.0, a + (k + 1) * width / 4.0);
            }
            return acc / width;
          } else {
            std::vector<double> cuts{a};
            for (double xk : d.x) {
              if (xk > a && xk < b) cuts.push_back(xk);
            }
            cuts.push_back(b);
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
              acc += detail::gauss5([&](double x) { return detail::sampled_value(d, x); }, cuts[k], cuts[k + 1]);
            }
            return acc / width;
          }
        },
        datum);
  }
  return s;
}

/// Time step satisfying 2 (dt / dx) L <= 1.
struct CflPolicy {
  double safety = 0.9;
  double lambda = 0.0;  // dt / dx
  double L = 0.0;       // sup |dH/du| over sampled x and the envelope
  double dt = 0.0;
};

/// sup |dH/du(x, p)| over model sample positions, cell centers and p in [lo, hi].
/// dH/du is monotone in p, so the sup in p sits at an endpoint.
inline double lipschitz_bound(const FluxModel& model, const Mesh& mesh, double lo, double hi) {
  double L = 0.0;
  auto at = [&](double x) { L = std::max({L, std::abs(model.du(x, lo)), std::abs(model.du(x, hi))}); };
  for (double x : model.sample_positions()) at(x);
  const auto g = static_cast<std::ptrdiff_t>(mesh.ghost_cells());
  for (std::ptrdiff_t i = -g; i < static_cast<std::ptrdiff_t>(mesh.size()) + g; ++i) at(mesh.center(i));
  return L;
}

inline CflPolicy cfl_dt(const FluxModel& model, double lo, double hi, const Mesh& mesh, double safety,
                        double max_dt = std::numeric_limits<double>::infinity()) {
  if (!(lo <= hi)) throw PreconditionError("cfl_dt: empty envelope");
  if (!(safety > 0.0 && safety <= 1.0)) throw PreconditionError("cfl_dt: safety must lie in (0, 1]");
  CflPolicy p;
  p.safety = safety;
  p.L = lipschitz_bound(model, mesh, lo, hi);
  if (p.L == 0.0) {
    if (!std::isfinite(max_dt)) throw PreconditionError("cfl_dt: constant flux needs an explicit max dt");
    p.dt = max_dt;
  } else {
    p.dt = std::min(max_dt, safety * mesh.dx() / (2.0 * p.L));
  }
  p.lambda = p.dt / mesh.dx();
  return p;
}

/// Interface fluxes of one step: flux[k] sits between cells k-1 and k, k = 0..n.
struct StepFluxes {
  std::vector<double> flux;
};

/// The conservative update u_j -= dt/dx (F_{j+1/2} - F_{j-1/2}) with
/// zero-order extrapolation into the ghost cells.
class Scheme {
 public:
  /// `lo`/`hi` bound every state the scheme will see; they fix the CFL constant.
  Scheme(FluxModel model, Mesh mesh, double lo, double hi)
      : disc_(std::move(model), std::move(mesh)) {
    L_ = lipschitz_bound(disc_.model(), disc_.mesh(), lo, hi);
  }

  const Discretization& discretization() const { return disc_; }
  const Mesh& mesh() const { return disc_.mesh(); }
  const FluxModel& model() const { return disc_.model(); }
  double lipschitz() const { return L_; }
  double max_stable_dt() const {
    return L_ > 0.0 ? disc_.mesh().dx() / (2.0 * L_) : std::numeric_limits<double>::infinity();
  }

  /// Interface fluxes for the ghost-extended state.
  void fluxes(const std::vector<double>& u, std::vector<double>& out) const {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    out.resize(u.size() + 1);
    auto at = [&](std::ptrdiff_t j) { return u[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))]; };
    for (std::ptrdiff_t k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = disc_.interface_flux(k - 1, at(k - 1), at(k));
  }

  GridState step(const GridState& state, double dt, StepFluxes* record = nullptr) const {
    if (state.u.size() != disc_.size()) throw PreconditionError("step: state size does not match mesh");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("step: dt must be finite and > 0");
    const double lambda = dt / disc_.mesh().dx();
    if (2.0 * lambda * L_ > 1.0 + 1e-12) {
      throw CflViolation("step: 2 lambda L = " + std::to_string(2.0 * lambda * L_) + " > 1");
    }
    std::vector<double> local;
    std::vector<double>& f = record ? record->flux : local;
    fluxes(state.u, f);
    GridState next;
    next.u.resize(state.u.size());
    for (std::size_t j = 0; j < state.u.size(); ++j) {
      const double v = state.u[j] - lambda * (f[j + 1] - f[j]);
      if (!std::isfinite(v)) throw NumericalError("step: non-finite state in cell " + std::to_string(j));
      next.u[j] = v;
    }
    next.time = state.time + dt;
    next.step_index = state.step_index + 1;
    return next;
  }

 private:
  Discretization disc_;
  double L_ = 0.0;
};

inline GridState step(const GridState& state, const FluxModel& model, const Mesh& mesh, double dt, double lo,
                      double hi) {
  return Scheme(model, mesh, lo, hi).step(state, dt);
}

struct RunConfig {
  FluxModel model;
  Mesh mesh;
  InitialDatum initial;  // physical variable
  double t_end = 0.0;
  std::vector<double> snapshot_times;
  double safety = 0.9;
  double max_dt = std::numeric_limits<double>::infinity();
  bool keep_all_levels = false;
};

/// Output of a run; all states in the internal (convex) variable.
struct Trajectory {
  std::vector<GridState> snapshots;
  std::vector<GridState> levels;  // every time level when keep_all_levels
  EnvelopeBounds envelope;        // internal variable
  CflPolicy cfl;
  std::size_t steps = 0;
  double running_min = std::numeric_limits<double>::infinity();
  double running_max = -std::numeric_limits<double>::infinity();
  std::size_t envelope_violations = 0;
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double boundary_outflow = 0.0;  // integral of F_right - F_left over time
  double mass_scale = 1.0;        // sum |u_j| dx of the datum, floor 1e-300
  std::vector<std::string> warnings;

  double relative_mass_drift() const {
    return std::abs(final_mass - initial_mass + boundary_outflow) / mass_scale;
  }
};

namespace detail {
inline long double mass_of(const std::vector<double>& u, double dx) {
  long double s = 0.0L;
  for (double v : u) s += v;
  return s * dx;
}
}  // namespace detail

/// Time loop. The step size is fixed by the CFL bound on the envelope of the
/// datum; steps are shortened to land exactly on snapshot times.
inline Trajectory run(const RunConfig& cfg) {
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw PreconditionError("run: t_end must be >= 0");
  const FluxModel& model = cfg.model;
  const auto [plo, phi] = datum_bounds(cfg.initial);
  const double m = std::min(model.to_internal(plo), model.to_internal(phi));
  const double M = std::max(model.to_internal(plo), model.to_internal(phi));

  Trajectory tr;
  tr.envelope = envelope_bounds(model, m, M);
  const Scheme scheme(model, cfg.mesh, tr.envelope.lower, tr.envelope.upper);
  if (!scheme.discretization().covers_heterogeneity()) {
    throw PreconditionError("run: mesh window must contain the heterogeneity strictly inside");
  }
  tr.cfl = cfl_dt(model, tr.envelope.lower, tr.envelope.upper, cfg.mesh, cfg.safety, cfg.max_dt);
  const double dx = cfg.mesh.dx();

  const double reach = tr.cfl.L * cfg.t_end;
  const double margin = std::min(-model.hetero_radius() - cfg.mesh.x_min(), cfg.mesh.x_max() - model.hetero_radius());
  if (reach > margin) {
    tr.warnings.push_back("boundary influence (L t_end = " + std::to_string(reach) +
                          ") reaches the heterogeneity; widen the mesh window");
  }

  GridState state = project_initial(cfg.initial, cfg.mesh);
  for (double& v : state.u) v = model.to_internal(v);

  auto observe = [&](const GridState& s) {
    for (double v : s.u) {
      tr.running_min = std::min(tr.running_min, v);
      tr.running_max = std::max(tr.running_max, v);
      if (v < tr.envelope.lower - 1e-12 || v > tr.envelope.upper + 1e-12) ++tr.envelope_violations;
    }
  };
  observe(state);
  tr.initial_mass = static_cast<double>(detail::mass_of(state.u, dx));
  double scale = 0.0;
  for (double v : state.u) scale += std::abs(v) * dx;
  tr.mass_scale = std::max(scale, 1e-300);

  std::vector<double> targets;
  for (double t : cfg.snapshot_times) {
    if (t > 0.0 && t < cfg.t_end) targets.push_back(t);
  }
  targets.push_back(cfg.t_end);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  tr.snapshots.push_back(state);
  if (cfg.keep_all_levels) tr.levels.push_back(state);
  long double outflow = 0.0L;
  StepFluxes fl;
  for (double target : targets) {
    while (state.time < target) {
      const double remaining = target - state.time;
      const bool last = remaining <= tr.cfl.dt * (1.0 + 1e-12);
      const double dt = last ? remaining : tr.cfl.dt;
      GridState next = scheme.step(state, dt, &fl);
      if (last) next.time = target;
      outflow += static_cast<long double>(dt) * (fl.flux.back() - fl.flux.front());
      state = std::move(next);
      observe(state);
      if (cfg.keep_all_levels) tr.levels.push_back(state);
    }
    if (target > 0.0) tr.snapshots.push_back(state);
  }
  tr.steps = state.step_index;
  tr.final_mass = static_cast<double>(detail::mass_of(state.u, dx));
  tr.boundary_outflow = static_cast<double>(outflow);
  return tr;
}

}  // namespace hetflux
