#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hetflux/errors.hpp"
#include "hetflux/interface.hpp"

namespace hetflux {

/// Uniform cells of width dx on [x_min, x_max], with ghost cells on both sides.
/// Cell i (possibly negative, or >= size() for ghosts) is centered at x_min + (i + 1/2) dx.
class Mesh {
 public:
  Mesh(double x_min, double x_max, double dx, int ghost_cells = 1)
      : x_min_(x_min), x_max_(x_max), dx_(dx), ghost_(ghost_cells) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw PreconditionError("mesh: dx must be finite and > 0");
    if (!(x_max > x_min)) throw PreconditionError("mesh: x_max must exceed x_min");
    if (ghost_cells < 1) throw PreconditionError("mesh: need at least one ghost cell");
    const double cells = (x_max - x_min) / dx;
    n_ = static_cast<std::size_t>(std::llround(cells));
    if (n_ < 2 || std::abs(cells - static_cast<double>(n_)) > 1e-9 * cells) {
      throw PreconditionError("mesh: window length must be an integer multiple (>= 2) of dx");
    }
  }

  /// [-half_width, half_width], half_width rounded up to a multiple of dx.
  static Mesh symmetric(double half_width, double dx, int ghost_cells = 1) {
    const double w = std::ceil(half_width / dx - 1e-9) * dx;
    return Mesh(-w, w, dx, ghost_cells);
  }

  std::size_t size() const { return n_; }
  double dx() const { return dx_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int ghost_cells() const { return ghost_; }

  double center(std::ptrdiff_t i) const { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
  /// Left edge of cell i.
  double edge(std::ptrdiff_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

  std::vector<double> centers() const {
    std::vector<double> c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = center(static_cast<std::ptrdiff_t>(i));
    return c;
  }

 private:
  double x_min_;
  double x_max_;
  double dx_;
  int ghost_;
  std::size_t n_ = 0;
};

/// Per-cell state averages at one time level.
struct GridState {
  std::vector<double> u;
  double time = 0.0;
  std::size_t step_index = 0;
};

/// h_j = H(x_j, .) for every cell including ghosts, and the interface fluxes
/// built from neighbouring pairs. Time independent, so computed once per mesh.
class Discretization {
 public:
  Discretization(FluxModel model, Mesh mesh) : model_(std::move(model)), mesh_(std::move(mesh)) {
    const auto g = static_cast<std::ptrdiff_t>(mesh_.ghost_cells());
    const auto n = static_cast<std::ptrdiff_t>(mesh_.size());
    cells_.reserve(static_cast<std::size_t>(n + 2 * g));
    for (std::ptrdiff_t i = -g; i < n + g; ++i) cells_.emplace_back(model_, mesh_.center(i));
  }

  const FluxModel& model() const { return model_; }
  const Mesh& mesh() const { return mesh_; }
  std::size_t size() const { return mesh_.size(); }

  const CellFlux& cell(std::ptrdiff_t i) const {
    return cells_[static_cast<std::size_t>(i + mesh_.ghost_cells())];
  }

  /// f_int^{i+1/2}(a, b) between cells i and i + 1.
  double interface_flux(std::ptrdiff_t i, double a, double b) const {
    const CellFlux& l = cell(i);
    const CellFlux& r = cell(i + 1);
    return std::max(l(std::max(a, l.alpha())), r(std::min(r.alpha(), b)));
  }

  InterfaceContext context(std::ptrdiff_t i) const { return {cell(i), cell(i + 1)}; }

  /// True when the outermost interior cells lie outside the heterogeneity.
  bool covers_heterogeneity() const {
    const double lo = mesh_.center(0);
    const double hi = mesh_.center(static_cast<std::ptrdiff_t>(mesh_.size()) - 1);
    const double x = model_.hetero_radius();
    if (lo > -x || hi < x) return false;
    for (double j : model_.jumps()) {
      if (!(lo < j && j < hi)) return false;
    }
    return true;
  }

 private:
  FluxModel model_;
  Mesh mesh_;
  std::vector<CellFlux> cells_;
};

}  // namespace hetflux
