#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hetflux/errors.hpp"
#include "hetflux/flux_model.hpp"

namespace hetflux {

/// h(u) = H(x, u) frozen at one position, with its minimizer and minimum cached.
class CellFlux {
 public:
  CellFlux(FluxModel model, double x) : model_(std::move(model)), x_(x) {
    alpha_ = critical_point(model_, x_);
    min_ = model_.eval(x_, alpha_);
  }

  double operator()(double u) const { return model_.eval(x_, u); }
  double derivative(double u) const { return model_.du(x_, u); }
  double alpha() const { return alpha_; }
  double minimum() const { return min_; }
  double position() const { return x_; }
  const FluxModel& model() const { return model_; }

  /// S^-(y) or S^+(y).
  double inverse(double y, Branch side) const {
    return detail::branch_inverse_1d([this](double u) { return (*this)(u); },
                                     [this](double u) { return derivative(u); }, alpha_, min_, y, side);
  }

  /// u with h'(u) = s.
  double derivative_inverse(double s) const {
    return detail::derivative_inverse_1d([this](double u) { return derivative(u); }, alpha_, s);
  }

 private:
  FluxModel model_;
  double x_;
  double alpha_;
  double min_;
};

/// The two one-sided fluxes meeting at a flux discontinuity.
struct InterfaceContext {
  CellFlux left;
  CellFlux right;

  static InterfaceContext between(const FluxModel& model, double x_left, double x_right) {
    return {CellFlux(model, x_left), CellFlux(model, x_right)};
  }
  /// Far-field fluxes of `model` on each side of its heterogeneity.
  static InterfaceContext far_field(const FluxModel& model) {
    return between(model, model.left_far(), model.right_far());
  }
};

struct GermPair {
  double left;
  double right;
};

enum class GermClass { G1, G2, G3, not_member };

inline const char* to_string(GermClass g) {
  switch (g) {
    case GermClass::G1: return "G1";
    case GermClass::G2: return "G2";
    case GermClass::G3: return "G3";
    case GermClass::not_member: return "not_member";
  }
  return "unknown";
}

inline constexpr double kGermTolerance = 1e-9;

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

namespace detail {
inline void require_finite(double a, double b, const char* what) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw PreconditionError(std::string(what) + ": non-finite state");
}
}  // namespace detail

/// Kruzhkov entropy flux sgn(a - k) (f(a) - f(k)), with sgn(0) = 0.
template <class F>
double entropy_flux(const F& f, double a, double k) {
  return sgn(a - k) * (f(a) - f(k));
}

/// Godunov flux of a convex f with minimizer alpha: max{f(a v alpha), f(alpha ^ b)}.
template <class F>
double godunov_flux(const F& f, double alpha, double a, double b) {
  return std::max(f(std::max(a, alpha)), f(std::min(alpha, b)));
}

inline double interface_flux(const InterfaceContext& ctx, double ul, double ur) {
  detail::require_finite(ul, ur, "interface_flux");
  return std::max(ctx.left(std::max(ul, ctx.left.alpha())), ctx.right(std::min(ctx.right.alpha(), ur)));
}

/// |f_int - f_l(u_l)| + |f_int - f_r(u_r)|; zero exactly on the germ.
inline double remainder(const InterfaceContext& ctx, double ul, double ur) {
  const double fi = interface_flux(ctx, ul, ur);
  return std::abs(fi - ctx.left(ul)) + std::abs(fi - ctx.right(ur));
}

inline GermClass classify_germ(const InterfaceContext& ctx, double ul, double ur, double tol = kGermTolerance) {
  detail::require_finite(ul, ur, "classify_germ");
  const double y = ctx.left(ul);
  if (y < ctx.right.minimum() - kMinClampSlack) return GermClass::not_member;
  const double al = ctx.left.alpha();
  const double s_plus = ctx.right.inverse(y, Branch::plus);
  const double s_minus = ctx.right.inverse(y, Branch::minus);
  if (ul >= al - tol && std::abs(ur - s_plus) <= tol) return GermClass::G1;
  if (ul <= al + tol && std::abs(ur - s_minus) <= tol) return GermClass::G2;
  if (ul > al && std::abs(ur - s_minus) <= tol) return GermClass::G3;
  return GermClass::not_member;
}

inline bool in_germ(const InterfaceContext& ctx, double ul, double ur, double tol = kGermTolerance) {
  return classify_germ(ctx, ul, ur, tol) != GermClass::not_member;
}

/// Phi_l(u_l, k_l) - Phi_r(u_r, k_r) for two germ pairs; nonnegative on the germ.
inline double dissipativity_gap(const InterfaceContext& ctx, GermPair u, GermPair k, double tol = kGermTolerance) {
  if (!in_germ(ctx, u.left, u.right, tol) || !in_germ(ctx, k.left, k.right, tol)) {
    throw PreconditionError("dissipativity_gap: both pairs must belong to the germ");
  }
  return entropy_flux(ctx.left, u.left, k.left) - entropy_flux(ctx.right, u.right, k.right);
}

}  // namespace hetflux
