#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetflux/errors.hpp"
#include "hetflux/profile.hpp"
#include "hetflux/roots.hpp"

namespace hetflux {

enum class Orientation { convex, concave };
enum class Branch { minus, plus };

inline constexpr int kCurveSamples = 4096;
/// y in [hmin - kMinClampSlack, hmin) is treated as hmin by the branch inverses.
inline constexpr double kMinClampSlack = 1e-10;

struct FluxFunctions {
  std::function<double(double, double)> eval;  // H(x, u)
  std::function<double(double, double)> du;    // dH/du
  std::function<double(double, double)> dx;    // dH/dx
};

/// One-variable quadratic a (u - b)^2 + c, a > 0.
struct Quadratic {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double u) const { return a * (u - b) * (u - b) + c; }
  double derivative(double u) const { return 2.0 * a * (u - b); }
};

namespace detail {

/// Golden-section maximization of `f` on [lo, hi]; returns the best value seen.
template <class F>
double golden_max(F&& f, double lo, double hi, double x_tol = 1e-11) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::max({f(lo), f(hi), fc, fd});
  for (int i = 0; i < 200 && (b - a) > x_tol * (1.0 + std::abs(a)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      best = std::max(best, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      best = std::max(best, fd);
    }
  }
  return best;
}

/// Maximizes f over a sampled position list, then polishes around the best sample.
template <class F>
double sampled_max(F&& f, const std::vector<double>& xs) {
  std::size_t best_i = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = f(xs[i]);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  // xs is sorted; polish between neighbours when they bracket an interior max.
  if (best_i > 0 && best_i + 1 < xs.size()) {
    best = std::max(best, golden_max(f, xs[best_i - 1], xs[best_i + 1]));
  }
  return best;
}

/// sup of f over [-r, r] plus the exterior points -r - 1, r + 1: polished
/// uniform grids, doubled until the polished maximum stops moving.
template <class F>
double refined_max(F&& f, double r, int max_points) {
  double prev = -std::numeric_limits<double>::infinity();
  for (int n = 65;; n = 2 * n - 1) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n) + 2);
    xs.push_back(-r - 1.0);
    for (int i = 0; i < n; ++i) xs.push_back(-r + 2.0 * r * i / (n - 1));
    xs.push_back(r + 1.0);
    const double v = std::max(prev, sampled_max(f, xs));
    if (std::abs(v - prev) <= 1e-13 * (1.0 + std::abs(v)) || n >= max_points) return v;
    prev = v;
  }
}

/// Central difference of a derivative, for Newton polishing inside a bracket.
template <class DF>
double second_derivative(DF& df, double u) {
  const double h = 1e-6 * (1.0 + std::abs(u));
  return (df(u + h) - df(u - h)) / (2.0 * h);
}

template <class DH>
double critical_point_1d(DH&& du) {
  auto g = [&](double u) { return du(u); };
  auto dg = [&](double u) { return second_derivative(du, u); };
  double lo = 0.0, hi = 0.0;
  if (g(0.0) >= 0.0) {
    lo = roots::expand_down(g, 0.0);
  } else {
    hi = roots::expand_up(g, 0.0);
  }
  const double a = roots::bisect_newton(g, dg, lo, hi);
  const double res = std::abs(g(a));
  const double scale = std::max({1.0, std::abs(du(a + 1.0)), std::abs(du(a - 1.0))});
  if (res > roots::kTolRoot * scale) {
    throw RootFailure("critical point residual " + std::to_string(res) + " exceeds tolerance");
  }
  return a;
}

/// Solves f(u) = y on the requested side of the minimizer `alpha` of the convex f.
template <class F, class DF>
double branch_inverse_1d(F&& f, DF&& df, double alpha, double fmin, double y, Branch side) {
  if (!std::isfinite(y)) throw PreconditionError("branch_inverse: non-finite flux level");
  if (y <= fmin) {
    if (fmin - y <= kMinClampSlack) return alpha;
    throw RootFailure("branch_inverse: level " + std::to_string(y) + " below flux minimum " +
                      std::to_string(fmin));
  }
  double u = 0.0;
  if (side == Branch::plus) {
    auto g = [&](double v) { return f(v) - y; };
    auto dg = [&](double v) { return df(v); };
    const double hi = roots::expand_up(g, alpha, std::max(1.0, std::abs(alpha)) * 0.5);
    u = roots::bisect_newton(g, dg, alpha, hi);
  } else {
    auto g = [&](double v) { return y - f(v); };
    auto dg = [&](double v) { return -df(v); };
    const double lo = roots::expand_down(g, alpha, std::max(1.0, std::abs(alpha)) * 0.5);
    u = roots::bisect_newton(g, dg, lo, alpha);
  }
  const double res = std::abs(f(u) - y);
  if (res > roots::residual_tolerance(y)) {
    throw RootFailure("branch_inverse: residual " + std::to_string(res) + " at level " + std::to_string(y));
  }
  return u;
}

/// Solves f'(u) = s for the convex f with minimizer alpha (f' increasing).
template <class DF>
double derivative_inverse_1d(DF&& df, double alpha, double s) {
  auto g = [&](double v) { return df(v) - s; };
  auto dg = [&](double v) { return second_derivative(df, v); };
  if (s == 0.0) return alpha;
  if (s > 0.0) return roots::bisect_newton(g, dg, alpha, roots::expand_up(g, alpha));
  return roots::bisect_newton(g, dg, roots::expand_down(g, alpha), alpha);
}

}  // namespace detail

/// alpha(x) = argmin H(x, .), sampled once at model construction.
class CriticalCurve {
 public:
  CriticalCurve() = default;
  CriticalCurve(std::function<double(double)> alpha_fn, std::function<double(double)> hmin_fn,
                const std::vector<double>& positions)
      : alpha_(std::move(alpha_fn)), hmin_(std::move(hmin_fn)) {
    alpha_min_ = std::numeric_limits<double>::infinity();
    alpha_max_ = -std::numeric_limits<double>::infinity();
    for (double x : positions) {
      const double a = alpha_(x);
      alpha_min_ = std::min(alpha_min_, a);
      alpha_max_ = std::max(alpha_max_, a);
    }
    alpha_max_ = std::max(alpha_max_, detail::sampled_max(alpha_, positions));
    alpha_min_ = std::min(alpha_min_, -detail::sampled_max([&](double x) { return -alpha_(x); }, positions));
  }

  double alpha(double x) const { return alpha_(x); }
  double hmin(double x) const { return hmin_(x); }
  double alpha_min() const { return alpha_min_; }
  double alpha_max() const { return alpha_max_; }

 private:
  std::function<double(double)> alpha_;
  std::function<double(double)> hmin_;
  double alpha_min_ = 0.0;
  double alpha_max_ = 0.0;
};

/// Space-dependent flux H(x, u), convex in u and independent of x outside
/// [-X, X]. Concave physical fluxes are stored through u -> -u (see
/// `to_internal`); every solver works on the convex internal variable.
class FluxModel {
 public:
  FluxModel(std::string name, FluxFunctions fns, double hetero_radius,
            Orientation orientation = Orientation::convex, std::vector<double> jumps = {})
      : impl_(std::make_shared<Impl>()) {
    if (!fns.eval || !fns.du || !fns.dx) throw PreconditionError("flux model needs eval, du and dx");
    if (!(hetero_radius >= 0.0) || !std::isfinite(hetero_radius)) {
      throw PreconditionError("hetero_radius must be finite and >= 0");
    }
    impl_->name = std::move(name);
    impl_->fns = std::move(fns);
    impl_->radius = hetero_radius;
    impl_->orientation = orientation;
    impl_->jumps = std::move(jumps);
    std::sort(impl_->jumps.begin(), impl_->jumps.end());

    const double xs = sampling_radius();
    impl_->positions.reserve(kCurveSamples + 2);
    impl_->positions.push_back(-xs - 1.0);
    for (int i = 0; i < kCurveSamples; ++i) {
      impl_->positions.push_back(-xs + 2.0 * xs * i / (kCurveSamples - 1));
    }
    impl_->positions.push_back(xs + 1.0);

    try {
      const Impl* self = impl_.get();
      auto alpha = [self](double x) {
        return detail::critical_point_1d([self, x](double u) { return self->fns.du(x, u); });
      };
      auto hmin = [self, alpha](double x) { return self->fns.eval(x, alpha(x)); };
      impl_->curve = CriticalCurve(alpha, hmin, impl_->positions);
    } catch (const RootFailure& e) {
      impl_->curve_error = e.what();
    }
  }

  double eval(double x, double u) const { return impl_->fns.eval(x, u); }
  double operator()(double x, double u) const { return impl_->fns.eval(x, u); }
  double du(double x, double u) const { return impl_->fns.du(x, u); }
  double dx(double x, double u) const { return impl_->fns.dx(x, u); }

  const std::string& name() const { return impl_->name; }
  double hetero_radius() const { return impl_->radius; }
  /// Half-width of the position sampling window; X, or 1 when X == 0.
  double sampling_radius() const { return impl_->radius > 0.0 ? impl_->radius : 1.0; }
  Orientation orientation() const { return impl_->orientation; }
  bool is_concave() const { return impl_->orientation == Orientation::concave; }
  /// Positions where H jumps in x (two-state interface models).
  const std::vector<double>& jumps() const { return impl_->jumps; }
  bool is_homogeneous() const { return impl_->radius == 0.0 && impl_->jumps.empty(); }

  /// Uniform grid over [-Xs, Xs] plus one exterior point per side, sorted.
  const std::vector<double>& sample_positions() const { return impl_->positions; }
  double left_far() const { return -sampling_radius(); }
  double right_far() const { return sampling_radius(); }

  bool has_curve() const { return impl_->curve.has_value(); }
  const CriticalCurve& curve() const {
    if (!impl_->curve) throw RootFailure("critical-point curve unavailable: " + impl_->curve_error);
    return *impl_->curve;
  }

  double to_internal(double u) const { return is_concave() ? -u : u; }
  double to_physical(double u) const { return is_concave() ? -u : u; }

  // Built-in families.

  /// H(x, u) = c u^2.
  static FluxModel power(double c) {
    if (!(c > 0.0)) throw PreconditionError("power flux coefficient must be > 0");
    FluxFunctions f{[c](double, double u) { return c * u * u; }, [c](double, double u) { return 2.0 * c * u; },
                    [](double, double) { return 0.0; }};
    return FluxModel(describe("power", {c}), std::move(f), 0.0);
  }

  /// f_l for x <= 0, f_r for x > 0: a single flux discontinuity at the origin.
  static FluxModel two_state(Quadratic left, Quadratic right) {
    if (!(left.a > 0.0) || !(right.a > 0.0)) throw PreconditionError("two_state quadratics need a > 0");
    FluxFunctions f{[left, right](double x, double u) { return x <= 0.0 ? left(u) : right(u); },
                    [left, right](double x, double u) {
                      return x <= 0.0 ? left.derivative(u) : right.derivative(u);
                    },
                    [](double, double) { return 0.0; }};
    return FluxModel(describe("two_state", {left.a, left.b, left.c, right.a, right.b, right.c}), std::move(f),
                     0.0, Orientation::convex, {0.0});
  }

  /// H(x, u) = theta(x) (u - ell(x))^2 + g(x), theta > 0.
  static FluxModel heterogeneous_quadratic(Profile theta, Profile ell, Profile g) {
    if (!(theta.lower_bound() > 0.0)) throw PreconditionError("theta profile must stay positive");
    const double radius = std::max({theta.support_radius(), ell.support_radius(), g.support_radius()});
    FluxFunctions f{
        [theta, ell, g](double x, double u) {
          const double d = u - ell(x);
          return theta(x) * d * d + g(x);
        },
        [theta, ell](double x, double u) { return 2.0 * theta(x) * (u - ell(x)); },
        [theta, ell, g](double x, double u) {
          const double d = u - ell(x);
          return theta.derivative(x) * d * d - 2.0 * theta(x) * ell.derivative(x) * d + g.derivative(x);
        }};
    return FluxModel("hetero_quadratic(theta=" + theta.to_string() + "; ell=" + ell.to_string() +
                         "; g=" + g.to_string() + ")",
                     std::move(f), radius);
  }

  /// Traffic flow V(x) rho (1 - rho / R(x)), concave in rho; stored via u = -rho.
  static FluxModel lwr(Profile speed, Profile rho_max) {
    if (!(speed.lower_bound() > 0.0)) throw PreconditionError("lwr speed profile must stay positive");
    if (!(rho_max.lower_bound() > 0.0)) throw PreconditionError("lwr rho_max profile must stay positive");
    const double radius = std::max(speed.support_radius(), rho_max.support_radius());
    // Internal flux in u = -rho: V u + V u^2 / R.
    FluxFunctions f{
        [speed, rho_max](double x, double u) { return speed(x) * u * (1.0 + u / rho_max(x)); },
        [speed, rho_max](double x, double u) { return speed(x) * (1.0 + 2.0 * u / rho_max(x)); },
        [speed, rho_max](double x, double u) {
          const double r = rho_max(x);
          return speed.derivative(x) * u +
                 u * u * (speed.derivative(x) * r - speed(x) * rho_max.derivative(x)) / (r * r);
        }};
    return FluxModel("lwr(speed=" + speed.to_string() + "; rho_max=" + rho_max.to_string() + ")", std::move(f),
                     radius, Orientation::concave);
  }

  /// Physical flux at physical state, undoing the concave reduction.
  double physical_flux(double x, double u_phys) const {
    return is_concave() ? -eval(x, -u_phys) : eval(x, u_phys);
  }

 private:
  struct Impl {
    std::string name;
    FluxFunctions fns;
    double radius = 0.0;
    Orientation orientation = Orientation::convex;
    std::vector<double> jumps;
    std::vector<double> positions;
    std::optional<CriticalCurve> curve;
    std::string curve_error;
  };

  static std::string describe(const std::string& family, std::initializer_list<double> params) {
    std::ostringstream out;
    out.precision(17);
    out << family << '(';
    bool first = true;
    for (double p : params) {
      if (!first) out << ", ";
      out << p;
      first = false;
    }
    out << ')';
    return out.str();
  }

  std::shared_ptr<Impl> impl_;
};

namespace builtin {

/// The smooth heterogeneous quadratic used across tests and shipped configs (X = 1).
inline FluxModel heterogeneous_quadratic() {
  return FluxModel::heterogeneous_quadratic(Profile(1.0, {{0.5, 0.0, 1.0}}), Profile(0.0, {{0.5, 0.2, 0.8}}),
                                            Profile(0.0, {{-0.25, 0.0, 1.0}}));
}

/// Heterogeneous traffic road: faster, narrower section around the origin (X = 1).
inline FluxModel lwr() { return FluxModel::lwr(Profile(1.0, {{0.5, 0.0, 1.0}}), Profile(1.0, {{-0.4, 0.0, 1.0}})); }

/// f_l = u^2 / 2, f_r = u^2.
inline FluxModel burgers_pair() { return FluxModel::two_state({0.5, 0.0, 0.0}, {1.0, 0.0, 0.0}); }

}  // namespace builtin

/// alpha(x): the unique minimizer of H(x, .).
inline double critical_point(const FluxModel& model, double x) {
  return detail::critical_point_1d([&](double u) { return model.du(x, u); });
}

/// S^+(y) >= alpha(x) or S^-(y) <= alpha(x) solving H(x, S) = y.
inline double branch_inverse(const FluxModel& model, double x, double y, Branch side) {
  const double a = critical_point(model, x);
  return detail::branch_inverse_1d([&](double u) { return model.eval(x, u); },
                                   [&](double u) { return model.du(x, u); }, a, model.eval(x, a), y, side);
}

/// L(x, v) = sup_p (p v - H(x, p)).
inline double legendre_transform(const FluxModel& model, double x, double v) {
  if (!std::isfinite(v)) throw PreconditionError("legendre_transform: non-finite slope");
  const double a = critical_point(model, x);
  const double p = detail::derivative_inverse_1d([&](double u) { return model.du(x, u); }, a, v);
  return p * v - model.eval(x, p);
}

/// sup of L(x, v) over sampled x and |v| <= lambda. L(x, .) is convex, so the
/// sup in v sits at v = +-lambda.
inline double legendre_sup(const FluxModel& model, double lambda) {
  if (!(lambda >= 0.0)) throw PreconditionError("legendre_sup: lambda must be >= 0");
  auto at = [&](double x) {
    if (lambda == 0.0) return legendre_transform(model, x, 0.0);
    return std::max(legendre_transform(model, x, lambda), legendre_transform(model, x, -lambda));
  };
  return detail::refined_max(at, model.sampling_radius(), kCurveSamples);
}

/// max over sampled x of H(x, u).
inline double sampled_flux_max(const FluxModel& model, double u) {
  return detail::refined_max([&](double x) { return model.eval(x, u); }, model.sampling_radius(), kCurveSamples);
}

enum class ViolationKind { convexity, compact_heterogeneity, du_mismatch, dx_mismatch, critical_point };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::convexity: return "convexity";
    case ViolationKind::compact_heterogeneity: return "compact_heterogeneity";
    case ViolationKind::du_mismatch: return "du_mismatch";
    case ViolationKind::dx_mismatch: return "dx_mismatch";
    case ViolationKind::critical_point: return "critical_point";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  double x = 0.0;
  double u = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<Violation> violations;  // first few per kind
  std::size_t counts[5] = {0, 0, 0, 0, 0};

  bool ok() const { return total() == 0; }
  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  std::size_t count(ViolationKind k) const { return counts[static_cast<int>(k)]; }
  void add(ViolationKind k, double x, double u, std::string detail) {
    if (counts[static_cast<int>(k)]++ < 8) violations.push_back({k, x, u, std::move(detail)});
  }
};

struct StateWindow {
  double lo = -2.0;
  double hi = 2.0;
};

struct SamplingSpec {
  int nx = 101;
  int nu = 101;
  double margin = 1.0;  // extra x range sampled beyond [-X, X]
};

/// Numerical screening of convexity, compact heterogeneity and derivative consistency.
inline AssumptionReport validate_assumptions(const FluxModel& model, StateWindow window = {}, SamplingSpec grid = {}) {
  AssumptionReport report;
  const double radius = model.hetero_radius();
  const double xs = model.sampling_radius() + grid.margin;
  auto near_jump = [&](double x, double h) {
    return std::any_of(model.jumps().begin(), model.jumps().end(), [&](double j) { return std::abs(x - j) <= h; });
  };
  auto u_at = [&](int k) { return window.lo + (window.hi - window.lo) * k / std::max(1, grid.nu - 1); };

  for (int i = 0; i < grid.nx; ++i) {
    const double x = -xs + 2.0 * xs * i / std::max(1, grid.nx - 1);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.nu; ++k) {
      const double u = u_at(k);
      const double d = model.du(x, u);
      if (k > 0 && !(d > prev)) {
        report.add(ViolationKind::convexity, x, u, "du_h not strictly increasing in u");
      }
      prev = d;
      const double hu = 1e-5 * (1.0 + std::abs(u));
      const double fd_u = (model.eval(x, u + hu) - model.eval(x, u - hu)) / (2.0 * hu);
      if (std::abs(fd_u - d) > 1e-6 * (1.0 + std::abs(d))) {
        report.add(ViolationKind::du_mismatch, x, u, "du_h=" + std::to_string(d) + " fd=" + std::to_string(fd_u));
      }
      const double hx = 1e-5 * (1.0 + std::abs(x));
      if (!near_jump(x, 2.0 * hx)) {
        const double fd_x = (model.eval(x + hx, u) - model.eval(x - hx, u)) / (2.0 * hx);
        const double dxv = model.dx(x, u);
        if (std::abs(fd_x - dxv) > 1e-6 * (1.0 + std::abs(dxv))) {
          report.add(ViolationKind::dx_mismatch, x, u, "dx_h=" + std::to_string(dxv) + " fd=" + std::to_string(fd_x));
        }
      }
    }
  }

  // Outside [-X, X]: no x-dependence at all.
  const int n_ext = std::max(2, grid.nx / 4);
  for (int side = -1; side <= 1; side += 2) {
    const double ref_x = side < 0 ? model.left_far() : model.right_far();
    for (int i = 0; i < n_ext; ++i) {
      const double x = side * (radius + 1e-9 + (grid.margin + 1.0) * (i + 1) / n_ext);
      for (int k = 0; k < grid.nu; k += std::max(1, grid.nu / 11)) {
        const double u = u_at(k);
        const double dxv = model.dx(x, u);
        const double diff = model.eval(x, u) - model.eval(ref_x, u);
        if (dxv != 0.0 || std::abs(diff) > 1e-14 * (1.0 + std::abs(model.eval(ref_x, u)))) {
          report.add(ViolationKind::compact_heterogeneity, x, u,
                     "x-dependence outside |x| <= X (dx_h=" + std::to_string(dxv) + ")");
        }
      }
    }
  }

  if (!model.has_curve()) {
    try {
      model.curve();
    } catch (const RootFailure& e) {
      report.add(ViolationKind::critical_point, 0.0, 0.0, e.what());
    }
  }
  return report;
}

}  // namespace hetflux
