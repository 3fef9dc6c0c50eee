#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hetflux/errors.hpp"
#include "hetflux/interface.hpp"

namespace hetflux {

enum class WaveKind { shock, rarefaction, stationary_nonclassical_shock };
enum class WaveSide { left_of_interface, right_of_interface, at_interface, whole_line };
enum class RiemannCase { I, II, III, IV, germ, classical };

inline const char* to_string(RiemannCase c) {
  switch (c) {
    case RiemannCase::I: return "I";
    case RiemannCase::II: return "II";
    case RiemannCase::III: return "III";
    case RiemannCase::IV: return "IV";
    case RiemannCase::germ: return "germ";
    case RiemannCase::classical: return "classical";
  }
  return "unknown";
}

/// Waves with |u_l - u_r| at or below this are dropped.
inline constexpr double kZeroStrength = 1e-12;

struct Wave {
  WaveKind kind;
  double s_min;  // equal to s_max for shocks; 0 for the stationary shock
  double s_max;
  double left_state;
  double right_state;
  WaveSide side;
};

struct WaveCensus {
  int shocks = 0;
  int rarefactions = 0;
  int stationary = 0;
};

/// Self-similar solution u(x / t) of a Riemann problem.
class RiemannSolution {
 public:
  RiemannSolution(CellFlux left_flux, CellFlux right_flux, double u_left, double u_right)
      : left_flux_(std::move(left_flux)), right_flux_(std::move(right_flux)), u_left_(u_left), u_right_(u_right) {}

  std::vector<Wave> waves;
  double trace_left = 0.0;
  double trace_right = 0.0;
  RiemannCase case_tag = RiemannCase::classical;
  double interface_flux_value = 0.0;

  double u_left() const { return u_left_; }
  double u_right() const { return u_right_; }

  /// State at x / t = xi. Exactly on a wave speed the right limit is returned.
  double sample(double xi) const {
    double state = u_left_;
    for (const Wave& w : waves) {
      if (xi < w.s_min) return state;
      if (w.kind == WaveKind::rarefaction && xi < w.s_max) {
        const CellFlux& f = w.side == WaveSide::right_of_interface ? right_flux_ : left_flux_;
        return std::clamp(f.derivative_inverse(xi), w.left_state, w.right_state);
      }
      state = w.right_state;
    }
    return state;
  }

  double sample(double t, double x) const {
    if (t > 0.0) return sample(x / t);
    return x < 0.0 ? u_left_ : u_right_;
  }

  /// Sorted distinct wave speeds (fan edges included).
  std::vector<double> speeds() const {
    std::vector<double> s;
    for (const Wave& w : waves) {
      s.push_back(w.s_min);
      if (w.s_max != w.s_min) s.push_back(w.s_max);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

  const CellFlux& left_flux() const { return left_flux_; }
  const CellFlux& right_flux() const { return right_flux_; }

 private:
  CellFlux left_flux_;
  CellFlux right_flux_;
  double u_left_;
  double u_right_;
};

namespace detail {

inline std::optional<Wave> classical_wave(const CellFlux& f, double a, double b, WaveSide side) {
  if (std::abs(a - b) <= kZeroStrength) return std::nullopt;
  if (a > b) {
    const double s = (f(a) - f(b)) / (a - b);
    return Wave{WaveKind::shock, s, s, a, b, side};
  }
  return Wave{WaveKind::rarefaction, f.derivative(a), f.derivative(b), a, b, side};
}

}  // namespace detail

/// Classical Riemann problem for a single convex flux.
inline RiemannSolution solve_classical(const CellFlux& f, double ul, double ur) {
  detail::require_finite(ul, ur, "solve_classical");
  RiemannSolution sol(f, f, ul, ur);
  if (auto w = detail::classical_wave(f, ul, ur, WaveSide::whole_line)) sol.waves.push_back(*w);
  sol.case_tag = RiemannCase::classical;
  sol.trace_left = sol.trace_right = sol.sample(0.0);
  sol.interface_flux_value = godunov_flux(f, f.alpha(), ul, ur);
  return sol;
}

/// Riemann problem with f_l on x < 0 and f_r on x > 0, germ-admissible at x = 0.
inline RiemannSolution solve_interface(const InterfaceContext& ctx, double ul, double ur) {
  detail::require_finite(ul, ur, "solve_interface");
  const CellFlux& fl = ctx.left;
  const CellFlux& fr = ctx.right;
  RiemannSolution sol(fl, fr, ul, ur);

  const double left_arg = fl(std::max(ul, fl.alpha()));
  const double right_arg = fr(std::min(fr.alpha(), ur));
  const double flux = std::max(left_arg, right_arg);
  sol.interface_flux_value = flux;

  // A side keeps its own state as trace when its argument attains the max from
  // the admissible half-line; otherwise the trace is the branch whose classical
  // sub-problem only emits waves away from the interface.
  const bool left_keeps = ul >= fl.alpha() && left_arg >= right_arg;
  const bool right_keeps = ur <= fr.alpha() && right_arg >= left_arg;
  sol.trace_left = left_keeps ? ul : fl.inverse(flux, Branch::minus);
  sol.trace_right = right_keeps ? ur : fr.inverse(flux, Branch::plus);

  if (in_germ(ctx, ul, ur)) {
    sol.case_tag = RiemannCase::germ;
    sol.trace_left = ul;
    sol.trace_right = ur;
  } else if (ul <= fl.alpha()) {
    sol.case_tag = ur <= fr.alpha() ? RiemannCase::I : RiemannCase::II;
  } else {
    sol.case_tag = ur <= fr.alpha() ? RiemannCase::III : RiemannCase::IV;
  }

  const double tol = std::max(roots::residual_tolerance(flux), 1e-10);
  if (std::abs(fl(sol.trace_left) - flux) > tol || std::abs(fr(sol.trace_right) - flux) > tol ||
      !in_germ(ctx, sol.trace_left, sol.trace_right)) {
    throw NumericalError("solve_interface: traces are not an admissible germ pair");
  }

  if (auto w = detail::classical_wave(fl, ul, sol.trace_left, WaveSide::left_of_interface)) {
    sol.waves.push_back(*w);
  }
  if (std::abs(sol.trace_left - sol.trace_right) > kZeroStrength) {
    sol.waves.push_back(Wave{WaveKind::stationary_nonclassical_shock, 0.0, 0.0, sol.trace_left, sol.trace_right,
                             WaveSide::at_interface});
  }
  if (auto w = detail::classical_wave(fr, sol.trace_right, ur, WaveSide::right_of_interface)) {
    sol.waves.push_back(*w);
  }
  return sol;
}

inline double sample(const RiemannSolution& sol, double xi) { return sol.sample(xi); }

inline WaveCensus wave_census(const RiemannSolution& sol) {
  WaveCensus c;
  for (const Wave& w : sol.waves) {
    switch (w.kind) {
      case WaveKind::shock: ++c.shocks; break;
      case WaveKind::rarefaction: ++c.rarefactions; break;
      case WaveKind::stationary_nonclassical_shock: ++c.stationary; break;
    }
  }
  return c;
}

}  // namespace hetflux
