#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hetflux/errors.hpp"
#include "hetflux/riemann.hpp"
#include "hetflux/solver.hpp"

namespace hetflux {

// ---------------------------------------------------------------------------
// Discrete entropy inequalities

struct EntropyReport {
  double worst_violation = 0.0;         // max positive part of the inequality, over (j, n, k)
  double worst_scaled = 0.0;            // same, divided by 1 + |k|
  std::vector<double> k_samples;
  std::vector<double> per_k;            // worst violation for each k
  std::size_t checks = 0;

  bool passes(double tol = 1e-10) const { return worst_scaled <= tol; }
};

/// 33 equally spaced levels on [lower, upper] plus the datum extremes.
inline std::vector<double> default_k_grid(double lower, double upper, double datum_min, double datum_max) {
  std::vector<double> k;
  for (int i = 0; i <= 32; ++i) k.push_back(lower + (upper - lower) * i / 32.0);
  k.push_back(datum_min);
  k.push_back(datum_max);
  return k;
}

/// Checks, for consecutive levels u -> u' and every cell j,
///   (|u'_j - k| - |u_j - k|) dx + (Phi_{j+1/2} - Phi_{j-1/2}) dt
///     + sgn(u'_j - k) (f_int^{j+1/2}(k, k) - f_int^{j-1/2}(k, k)) dt <= 0
/// with the ghost-extended states of the scheme.
inline EntropyReport check_dei(const std::vector<GridState>& levels, const Discretization& disc,
                               const std::vector<double>& k_grid) {
  EntropyReport rep;
  rep.k_samples = k_grid;
  rep.per_k.assign(k_grid.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(disc.size());
  const double dx = disc.mesh().dx();
  std::vector<double> fkk(static_cast<std::size_t>(n + 1));
  std::vector<double> phi(static_cast<std::size_t>(n + 1));

  for (std::size_t q = 0; q < k_grid.size(); ++q) {
    const double k = k_grid[q];
    for (std::ptrdiff_t i = 0; i <= n; ++i) fkk[static_cast<std::size_t>(i)] = disc.interface_flux(i - 1, k, k);
    double worst = 0.0;
    for (std::size_t lv = 0; lv + 1 < levels.size(); ++lv) {
      const std::vector<double>& u = levels[lv].u;
      const std::vector<double>& v = levels[lv + 1].u;
      if (u.size() != disc.size() || v.size() != disc.size()) throw PreconditionError("check_dei: size mismatch");
      const double dt = levels[lv + 1].time - levels[lv].time;
      auto at = [&](std::ptrdiff_t j) { return u[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))]; };
      for (std::ptrdiff_t i = 0; i <= n; ++i) {
        const double a = at(i - 1), b = at(i);
        phi[static_cast<std::size_t>(i)] = disc.interface_flux(i - 1, std::max(a, k), std::max(b, k)) -
                                           disc.interface_flux(i - 1, std::min(a, k), std::min(b, k));
      }
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double lhs = (std::abs(v[j] - k) - std::abs(u[j] - k)) * dx + (phi[j + 1] - phi[j]) * dt +
                           sgn(v[j] - k) * (fkk[j + 1] - fkk[j]) * dt;
        worst = std::max(worst, lhs);
        ++rep.checks;
      }
    }
    rep.per_k[q] = worst;
    rep.worst_violation = std::max(rep.worst_violation, worst);
    rep.worst_scaled = std::max(rep.worst_scaled, worst / (1.0 + std::abs(k)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Consistency of the interface flux with the cell flux

struct ConsistencyReport {
  double k = 0.0;
  std::vector<double> dx;
  std::vector<double> defect;  // max_j |f_int^{j+1/2}(k, k) - h_{j+1}(k)|
  std::vector<double> bound;   // sup_x |dH/dx(x, k)| dx
  double slope = 0.0;
  bool exact = false;          // every defect at rounding level; slope meaningless
};

namespace detail {

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

}  // namespace detail

inline ConsistencyReport consistency_rate(const FluxModel& model, double k, const std::vector<double>& dx_sequence) {
  if (dx_sequence.size() < 2) throw PreconditionError("consistency_rate: need at least two mesh sizes");
  ConsistencyReport rep;
  rep.k = k;
  double dxh = 0.0;
  for (double x : model.sample_positions()) dxh = std::max(dxh, std::abs(model.dx(x, k)));
  const double half = model.sampling_radius() + 1.0;
  double scale = 0.0;
  for (double dx : dx_sequence) {
    const Discretization disc(model, Mesh::symmetric(half, dx));
    const auto n = static_cast<std::ptrdiff_t>(disc.size());
    double worst = 0.0;
    for (std::ptrdiff_t j = 0; j + 1 < n; ++j) {
      const double hk = disc.cell(j + 1)(k);
      scale = std::max(scale, std::abs(hk));
      worst = std::max(worst, std::abs(disc.interface_flux(j, k, k) - hk));
    }
    rep.dx.push_back(dx);
    rep.defect.push_back(worst);
    rep.bound.push_back(dxh * dx);
  }
  rep.exact = std::all_of(rep.defect.begin(), rep.defect.end(),
                          [&](double d) { return d <= 1e-14 * std::max(1.0, scale); });
  if (!rep.exact) {
    if (std::any_of(rep.defect.begin(), rep.defect.end(), [](double d) { return d <= 0.0; })) {
      throw NumericalError("consistency_rate: zero defect on some meshes only; slope undefined");
    }
    rep.slope = detail::loglog_slope(rep.dx, rep.defect);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Integrals of the piecewise-constant solution against the exact Riemann solution

namespace detail {

/// Break points in [a, b] of the exact solution at time t, plus the points
/// where it crosses `level` inside a fan.
inline std::vector<double> exact_cuts(const RiemannSolution& sol, double t, double a, double b,
                                      std::optional<double> level) {
  std::vector<double> cuts{a, b};
  if (t <= 0.0) {
    if (a < 0.0 && 0.0 < b) cuts.push_back(0.0);
  } else {
    for (double s : sol.speeds()) {
      if (a < s * t && s * t < b) cuts.push_back(s * t);
    }
    if (level) {
      for (const Wave& w : sol.waves) {
        if (w.kind != WaveKind::rarefaction || !(w.left_state < *level && *level < w.right_state)) continue;
        const CellFlux& f = w.side == WaveSide::right_of_interface ? sol.right_flux() : sol.left_flux();
        const double x = f.derivative(*level) * t;
        if (a < x && x < b) cuts.push_back(x);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

/// Integral over [a, b] of g(u_exact(t, x)); smooth pieces by adaptive Gauss-Kronrod.
template <class G>
double integrate_exact(const RiemannSolution& sol, double t, double a, double b, std::optional<double> level, G g) {
  const std::vector<double> cuts = exact_cuts(sol, t, a, b, level);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double ul = sol.sample(t, lo + 1e-3 * (hi - lo));
    const double ur = sol.sample(t, hi - 1e-3 * (hi - lo));
    if (ul == ur && sol.sample(t, mid) == ul) {
      total += g(ul) * (hi - lo);
    } else {
      total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [&](double x) { return g(sol.sample(t, x)); }, lo, hi, 12, 1e-13);
    }
  }
  return total;
}

}  // namespace detail

/// L1 distance on [window_lo, window_hi] between cell averages and the exact solution.
/// The window must be a union of whole cells.
inline double l1_error_exact(const GridState& state, const Mesh& mesh, const RiemannSolution& sol, double window_lo,
                             double window_hi) {
  double err = 0.0;
  for (std::size_t j = 0; j < state.u.size(); ++j) {
    const double a = mesh.edge(static_cast<std::ptrdiff_t>(j));
    const double b = mesh.edge(static_cast<std::ptrdiff_t>(j) + 1);
    if (a < window_lo - 1e-12 * mesh.dx() || b > window_hi + 1e-12 * mesh.dx()) continue;
    const double uj = state.u[j];
    err += detail::integrate_exact(sol, state.time, a, b, uj, [uj](double v) { return std::abs(uj - v); });
  }
  return err;
}

// ---------------------------------------------------------------------------
// Convergence study

struct ConvergenceScenario {
  FluxModel model;
  double half_width = 3.0;  // computational domain [-half_width, half_width]
  InitialDatum datum;
  double t_end = 0.5;
  double window_lo = -1.0;
  double window_hi = 1.0;
  double safety = 0.9;
};

enum class ReferenceKind { exact_riemann, fine_grid };

struct ConvergenceReference {
  ReferenceKind kind = ReferenceKind::exact_riemann;
  std::optional<RiemannSolution> exact;  // internal variable
  int extra_levels = 3;                  // fine grid: dx_finest / 2^extra_levels
};

struct ConvergenceReport {
  std::string reference;
  std::vector<double> dx;
  std::vector<double> errors;
  std::vector<double> orders;  // log2(e_l / e_{l+1})
  double window_lo = 0.0;
  double window_hi = 0.0;
  double lambda = 0.0;
  std::vector<std::string> notes;

  bool strictly_decreasing() const {
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      if (!(errors[i + 1] < errors[i])) return false;
    }
    return true;
  }
};

namespace detail {

inline Trajectory run_at(const ConvergenceScenario& sc, double dx, double lambda) {
  RunConfig cfg{sc.model, Mesh::symmetric(sc.half_width, dx), sc.datum, sc.t_end, {}};
  cfg.safety = sc.safety;
  cfg.max_dt = lambda * dx;
  return run(cfg);
}

}  // namespace detail

/// Halves dx `levels - 1` times from dx0 at fixed dt / dx and measures the L1
/// error at t_end on the window against the reference.
inline ConvergenceReport convergence_study(const ConvergenceScenario& sc, const ConvergenceReference& ref, double dx0,
                                           int levels) {
  if (levels < 2) throw PreconditionError("convergence_study: need at least two levels");
  if (ref.kind == ReferenceKind::exact_riemann && !ref.exact) {
    throw PreconditionError("convergence_study: exact reference missing");
  }
  ConvergenceReport rep;
  rep.reference = ref.kind == ReferenceKind::exact_riemann ? "exact_riemann" : "fine_grid";

  const double finest = dx0 / std::ldexp(1.0, levels - 1);
  const double ref_dx = ref.kind == ReferenceKind::fine_grid ? finest / std::ldexp(1.0, ref.extra_levels) : finest;

  // One lambda for every level: the smallest CFL ratio over the meshes used.
  const auto [plo, phi] = datum_bounds(sc.datum);
  const double m = std::min(sc.model.to_internal(plo), sc.model.to_internal(phi));
  const double M = std::max(sc.model.to_internal(plo), sc.model.to_internal(phi));
  const EnvelopeBounds env = envelope_bounds(sc.model, m, M);
  double lambda = INFINITY, L = 0.0;
  for (double dx = dx0; dx >= ref_dx * (1.0 - 1e-12); dx *= 0.5) {
    const CflPolicy p = cfl_dt(sc.model, env.lower, env.upper, Mesh::symmetric(sc.half_width, dx), sc.safety);
    lambda = std::min(lambda, p.lambda);
    L = std::max(L, p.L);
  }
  rep.lambda = lambda;

  rep.window_lo = sc.window_lo;
  rep.window_hi = sc.window_hi;
  const double reach = L * sc.t_end;
  if (rep.window_lo < -sc.half_width + reach) {
    rep.window_lo = -sc.half_width + reach;
    rep.notes.push_back("window shrunk on the left to avoid boundary influence");
  }
  if (rep.window_hi > sc.half_width - reach) {
    rep.window_hi = sc.half_width - reach;
    rep.notes.push_back("window shrunk on the right to avoid boundary influence");
  }
  if (!(rep.window_lo < rep.window_hi)) throw PreconditionError("convergence_study: window lies in the boundary zone");

  std::optional<Trajectory> fine;
  if (ref.kind == ReferenceKind::fine_grid) fine = detail::run_at(sc, ref_dx, lambda);

  for (int l = 0; l < levels; ++l) {
    const double dx = dx0 / std::ldexp(1.0, l);
    const Trajectory tr = detail::run_at(sc, dx, lambda);
    const Mesh mesh = Mesh::symmetric(sc.half_width, dx);
    const GridState& s = tr.snapshots.back();
    double err = 0.0;
    if (ref.kind == ReferenceKind::exact_riemann) {
      err = l1_error_exact(s, mesh, *ref.exact, rep.window_lo, rep.window_hi);
    } else {
      const GridState& f = fine->snapshots.back();
      const auto ratio = static_cast<std::size_t>(std::llround(dx / ref_dx));
      for (std::size_t j = 0; j < s.u.size(); ++j) {
        const double a = mesh.edge(static_cast<std::ptrdiff_t>(j));
        if (a < rep.window_lo - 1e-12 || a + dx > rep.window_hi + 1e-12) continue;
        double avg = 0.0;
        for (std::size_t q = 0; q < ratio; ++q) avg += f.u[j * ratio + q];
        err += std::abs(s.u[j] - avg / static_cast<double>(ratio)) * dx;
      }
    }
    rep.dx.push_back(dx);
    rep.errors.push_back(err);
  }
  for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i) {
    rep.orders.push_back(std::log2(rep.errors[i] / rep.errors[i + 1]));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Time variation and distance to the exact solution

/// sum_n sum_j (u_j^{n+1} - u_j^n)^2 dx over the cells inside the window.
inline double time_variation_sum(const std::vector<GridState>& levels, const Mesh& mesh, double window_lo,
                                 double window_hi) {
  long double total = 0.0L;
  for (std::size_t n = 0; n + 1 < levels.size(); ++n) {
    const std::vector<double>& u = levels[n].u;
    const std::vector<double>& v = levels[n + 1].u;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double a = mesh.edge(static_cast<std::ptrdiff_t>(j));
      if (a < window_lo - 1e-12 || a + mesh.dx() > window_hi + 1e-12) continue;
      const double d = v[j] - u[j];
      total += static_cast<long double>(d * d);
    }
  }
  return static_cast<double>(total * mesh.dx());
}

/// L2 distance on the window between the cell averages and the exact solution
/// at the snapshot time (the datum when the time is 0).
inline double pc_vs_exact_gap(const GridState& snapshot, const Mesh& mesh, const RiemannSolution& sol,
                              double window_lo, double window_hi) {
  double sq = 0.0;
  for (std::size_t j = 0; j < snapshot.u.size(); ++j) {
    const double a = mesh.edge(static_cast<std::ptrdiff_t>(j));
    const double b = mesh.edge(static_cast<std::ptrdiff_t>(j) + 1);
    const double lo = std::max(a, window_lo), hi = std::min(b, window_hi);
    if (!(hi > lo)) continue;
    const double uj = snapshot.u[j];
    sq += detail::integrate_exact(sol, snapshot.time, lo, hi, std::nullopt, [uj](double v) { return (uj - v) * (uj - v); });
  }
  return std::sqrt(sq);
}

}  // namespace hetflux
