#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hetflux/errors.hpp"

namespace hetflux {

/// C^3 compactly supported bump: amplitude * (1 - s^2)^4 with s = (x - center) / half_width.
struct Bump {
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 1.0;

  double value(double x) const {
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return amplitude * q * q * q * q;
  }

  double derivative(double x) const {
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return amplitude * (-8.0 * s / half_width) * q * q * q;
  }

  double support_radius() const { return std::abs(center) + half_width; }
};

/// base + sum of bumps. The building block for every space-dependent coefficient.
class Profile {
 public:
  Profile() = default;
  explicit Profile(double base, std::vector<Bump> bumps = {}) : base_(base), bumps_(std::move(bumps)) {
    for (const auto& b : bumps_) {
      if (!(b.half_width > 0.0) || !std::isfinite(b.amplitude) || !std::isfinite(b.center)) {
        throw PreconditionError("bump needs finite amplitude/center and half_width > 0");
      }
    }
  }

  double operator()(double x) const {
    double v = base_;
    for (const auto& b : bumps_) v += b.value(x);
    return v;
  }

  double derivative(double x) const {
    double d = 0.0;
    for (const auto& b : bumps_) d += b.derivative(x);
    return d;
  }

  /// Smallest R with derivative == 0 for |x| >= R.
  double support_radius() const {
    double r = 0.0;
    for (const auto& b : bumps_) r = std::max(r, b.support_radius());
    return r;
  }

  double base() const { return base_; }
  const std::vector<Bump>& bumps() const { return bumps_; }

  /// Lower bound of the profile: base plus every negative amplitude.
  double lower_bound() const {
    double v = base_;
    for (const auto& b : bumps_) v += std::min(0.0, b.amplitude);
    return v;
  }

  /// Parses "base amp@center:half_width amp@center:half_width ...".
  static Profile parse(const std::string& text) {
    std::istringstream in(text);
    double base = 0.0;
    if (!(in >> base)) throw PreconditionError("profile '" + text + "': missing base value");
    std::vector<Bump> bumps;
    std::string tok;
    while (in >> tok) {
      const auto at = tok.find('@');
      const auto colon = tok.find(':', at == std::string::npos ? 0 : at);
      if (at == std::string::npos || colon == std::string::npos) {
        throw PreconditionError("profile '" + text + "': bump '" + tok + "' is not amp@center:half_width");
      }
      try {
        Bump b;
        b.amplitude = std::stod(tok.substr(0, at));
        b.center = std::stod(tok.substr(at + 1, colon - at - 1));
        b.half_width = std::stod(tok.substr(colon + 1));
        bumps.push_back(b);
      } catch (const std::logic_error&) {
        throw PreconditionError("profile '" + text + "': bad number in '" + tok + "'");
      }
    }
    return Profile(base, std::move(bumps));
  }

  std::string to_string() const {
    std::ostringstream out;
    out.precision(17);
    out << base_;
    for (const auto& b : bumps_) out << ' ' << b.amplitude << '@' << b.center << ':' << b.half_width;
    return out.str();
  }

 private:
  double base_ = 0.0;
  std::vector<Bump> bumps_;
};

}  // namespace hetflux
