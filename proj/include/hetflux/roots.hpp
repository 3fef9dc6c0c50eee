#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "hetflux/errors.hpp"

// Scalar root finding for monotone functions. Everything in the library that
// inverts a convex flux (or its derivative) goes through here.
namespace hetflux::roots {

/// Absolute residual tolerance for every inversion of a flux or its derivative.
inline constexpr double kTolRoot = 1e-12;

inline double residual_tolerance(double target) {
  return std::max(kTolRoot, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(target));
}

/// Searches upward from `start` for a point where the nondecreasing `g` is >= 0.
template <class G>
double expand_up(G&& g, double start, double step = 1.0) {
  double x = start + step;
  for (int i = 0; i < 200; ++i) {
    if (g(x) >= 0.0) return x;
    step *= 2.0;
    x = start + step;
    if (!std::isfinite(x)) break;
  }
  throw RootFailure("upward bracket search from " + std::to_string(start) + " failed");
}

/// Searches downward from `start` for a point where the nondecreasing `g` is <= 0.
template <class G>
double expand_down(G&& g, double start, double step = 1.0) {
  double x = start - step;
  for (int i = 0; i < 200; ++i) {
    if (g(x) <= 0.0) return x;
    step *= 2.0;
    x = start - step;
    if (!std::isfinite(x)) break;
  }
  throw RootFailure("downward bracket search from " + std::to_string(start) + " failed");
}

/// Bisection to machine precision. Requires g nondecreasing, g(lo) <= 0 <= g(hi).
template <class G>
double bisect(G&& g, double lo, double hi) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo > 0.0 || ghi < 0.0) throw RootFailure("bisect: root not bracketed");
  for (int i = 0; i < 2200; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  return (-glo <= ghi) ? lo : hi;
}

/// Bracketed bisection followed by a safeguarded Newton polish with `dg`.
/// Same preconditions as `bisect`. Returns the iterate with the smallest |g|.
template <class G, class DG>
double bisect_newton(G&& g, DG&& dg, double lo, double hi) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo > 0.0 || ghi < 0.0) throw RootFailure("bisect_newton: root not bracketed");

  for (int i = 0; i < 60 && (hi - lo) > 1e-4 * (1.0 + std::abs(lo)); ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    (gm < 0.0 ? lo : hi) = mid;
  }

  double best = (-glo <= ghi) ? lo : hi;
  double best_res = std::min(-glo, ghi);
  double x = lo + 0.5 * (hi - lo);
  for (int i = 0; i < 100; ++i) {
    const double gx = g(x);
    if (std::abs(gx) < best_res) {
      best_res = std::abs(gx);
      best = x;
    }
    if (gx == 0.0) break;
    (gx < 0.0 ? lo : hi) = x;
    const double d = dg(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - gx / d : lo + 0.5 * (hi - lo);
    if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
    if (next == x || next <= lo || next >= hi) break;
    x = next;
  }
  return best;
}

}  // namespace hetflux::roots
