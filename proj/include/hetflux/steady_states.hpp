#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hetflux/errors.hpp"
#include "hetflux/flux_model.hpp"
#include "hetflux/mesh.hpp"

namespace hetflux {

enum class SteadyBranch { upper, lower };
enum class SweepDirection { from_left, from_right };

/// A discrete steady state of the scheme: all interface fluxes equal `flux_level`.
struct SteadyState {
  std::vector<double> values;  // interior cells
  double flux_level = 0.0;
  SteadyBranch orientation = SteadyBranch::upper;
  double bound = 0.0;  // max of values (upper) or min (lower)
};

/// Builds the steady sequence anchored at `c` in the exterior cell on the
/// sweep's starting side, propagating h_{j+1}(v_{j+1}) = h_j(v_j) along the
/// requested branch.
inline SteadyState build_steady(const Discretization& disc, double c, SweepDirection direction,
                                SteadyBranch branch) {
  const CriticalCurve& curve = disc.model().curve();
  if (!std::isfinite(c)) throw PreconditionError("build_steady: non-finite anchor");
  if (branch == SteadyBranch::upper && c < curve.alpha_max()) {
    throw PreconditionError("build_steady: upper branch needs anchor >= sup alpha");
  }
  if (branch == SteadyBranch::lower && c > curve.alpha_min()) {
    throw PreconditionError("build_steady: lower branch needs anchor <= inf alpha");
  }
  if (!disc.covers_heterogeneity()) {
    throw PreconditionError("build_steady: mesh window must contain the heterogeneity strictly inside");
  }

  const auto n = static_cast<std::ptrdiff_t>(disc.size());
  const Branch side = branch == SteadyBranch::upper ? Branch::plus : Branch::minus;
  auto next = [&](std::ptrdiff_t from, std::ptrdiff_t to, double v) {
    const double level = disc.cell(from)(v);
    // Exact reuse when the neighbour already balances (identical exterior fluxes).
    const CellFlux& target = disc.cell(to);
    const bool right_branch = side == Branch::plus ? v >= target.alpha() : v <= target.alpha();
    if (right_branch && target(v) == level) return v;
    return target.inverse(level, side);
  };

  SteadyState s;
  s.orientation = branch;
  s.values.assign(static_cast<std::size_t>(n), c);
  if (direction == SweepDirection::from_left) {
    for (std::ptrdiff_t j = 0; j + 1 < n; ++j) {
      s.values[static_cast<std::size_t>(j + 1)] = next(j, j + 1, s.values[static_cast<std::size_t>(j)]);
    }
    s.flux_level = disc.cell(0)(c);
  } else {
    for (std::ptrdiff_t j = n - 1; j > 0; --j) {
      s.values[static_cast<std::size_t>(j - 1)] = next(j, j - 1, s.values[static_cast<std::size_t>(j)]);
    }
    s.flux_level = disc.cell(n - 1)(c);
  }
  s.bound = branch == SteadyBranch::upper ? *std::max_element(s.values.begin(), s.values.end())
                                          : *std::min_element(s.values.begin(), s.values.end());
  return s;
}

inline SteadyState build_steady(const FluxModel& model, const Mesh& mesh, double c, SweepDirection direction,
                                SteadyBranch branch) {
  return build_steady(Discretization(model, mesh), c, direction, branch);
}

/// max over interior cells j of |f_int^{j+1/2} - f_int^{j-1/2}|.
inline double steady_residual(const std::vector<double>& values, const Discretization& disc) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (static_cast<std::size_t>(n) != disc.size()) throw PreconditionError("steady_residual: size mismatch");
  double worst = 0.0;
  for (std::ptrdiff_t j = 1; j + 1 < n; ++j) {
    const auto u = [&](std::ptrdiff_t k) { return values[static_cast<std::size_t>(k)]; };
    const double right = disc.interface_flux(j, u(j), u(j + 1));
    const double left = disc.interface_flux(j - 1, u(j - 1), u(j));
    worst = std::max(worst, std::abs(right - left));
  }
  return worst;
}

inline double steady_residual(const SteadyState& state, const Discretization& disc) {
  return steady_residual(state.values, disc);
}

/// Constants bounding every discrete solution whose datum lies in [m, M].
struct EnvelopeBounds {
  double m = 0.0;  // widened so that m <= inf alpha
  double M = 0.0;  // widened so that M >= sup alpha
  double legendre_sup = 0.0;  // sup L(x, v) over |v| <= 1
  double upper_anchor = 0.0;  // max_x H(x, M) + legendre_sup
  double lower_anchor = 0.0;  // -max_x H(x, m) - legendre_sup
  double lower = 0.0;
  double upper = 0.0;
};

inline EnvelopeBounds envelope_bounds(const FluxModel& model, double m, double M) {
  if (!(m <= M) || !std::isfinite(m) || !std::isfinite(M)) throw PreconditionError("envelope: need finite m <= M");
  const CriticalCurve& curve = model.curve();
  EnvelopeBounds b;
  b.m = std::min(m, curve.alpha_min());
  b.M = std::max(M, curve.alpha_max());
  b.legendre_sup = legendre_sup(model, 1.0);
  b.upper_anchor = sampled_flux_max(model, b.M) + b.legendre_sup;
  b.lower_anchor = -sampled_flux_max(model, b.m) - b.legendre_sup;
  const double x_left = model.left_far();
  b.upper = model.eval(x_left, b.upper_anchor) + b.legendre_sup;
  b.lower = -model.eval(x_left, b.lower_anchor) - b.legendre_sup;
  return b;
}

struct Envelope {
  EnvelopeBounds bounds;
  SteadyState lower_state;
  SteadyState upper_state;
};

/// Bounded steady states sandwiching [m, M] and the constants bounding them.
inline Envelope envelope(const Discretization& disc, double m, double M) {
  const EnvelopeBounds b = envelope_bounds(disc.model(), m, M);
  return {b, build_steady(disc, b.lower_anchor, SweepDirection::from_left, SteadyBranch::lower),
          build_steady(disc, b.upper_anchor, SweepDirection::from_left, SteadyBranch::upper)};
}

inline Envelope envelope(const FluxModel& model, const Mesh& mesh, double m, double M) {
  return envelope(Discretization(model, mesh), m, M);
}

}  // namespace hetflux
