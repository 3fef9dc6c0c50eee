#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hetflux/riemann.hpp"
#include "hetflux/solver.hpp"

using namespace hetflux;

namespace {

const double kSqrt2 = std::sqrt(2.0);

InterfaceContext burgers_pair() { return InterfaceContext::far_field(builtin::burgers_pair()); }

std::vector<InterfaceContext> flux_pairs() {
  return {burgers_pair(),
          InterfaceContext::far_field(FluxModel::two_state({1.0, 0.5, 0.2}, {2.0, -0.3, -0.1})),
          InterfaceContext::far_field(FluxModel::two_state({0.7, -0.4, -0.3}, {0.4, 0.6, 0.5})),
          InterfaceContext::between(builtin::heterogeneous_quadratic(), -0.3, 0.4)};
}

// Integral of the solution at t = 1 over [-a, a], piecewise Simpson between speeds.
double integral_at_unit_time(const RiemannSolution& sol, double a) {
  std::vector<double> cuts{-a};
  for (double s : sol.speeds()) cuts.push_back(s);
  cuts.push_back(a);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    const int n = 2000;
    const double h = (hi - lo) / n;
    const double eps = 1e-12 * (hi - lo);
    double s = sol.sample(lo + eps) + sol.sample(hi - eps);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * sol.sample(lo + k * h);
    total += s * h / 3.0;
  }
  return total;
}

}  // namespace

TEST(RiemannGolden, ConstantMinusOne) {
  const RiemannSolution sol = solve_interface(burgers_pair(), -1.0, -1.0);
  EXPECT_NEAR(sol.trace_left, -kSqrt2, 1e-12);
  EXPECT_NEAR(sol.trace_right, -1.0, 1e-12);
  ASSERT_EQ(sol.waves.size(), 2u);
  const Wave& shock = sol.waves[0];
  EXPECT_EQ(shock.kind, WaveKind::shock);
  EXPECT_EQ(shock.side, WaveSide::left_of_interface);
  EXPECT_NEAR(shock.s_min, -1.0 / (2.0 * (kSqrt2 - 1.0)), 1e-12);
  EXPECT_NEAR(shock.s_min, -1.2071067811865475, 1e-12);
  EXPECT_EQ(shock.left_state, -1.0);
  EXPECT_NEAR(shock.right_state, -kSqrt2, 1e-12);
  EXPECT_EQ(sol.waves[1].kind, WaveKind::stationary_nonclassical_shock);
  EXPECT_EQ(sol.case_tag, RiemannCase::I);
  EXPECT_DOUBLE_EQ(sol.interface_flux_value, 1.0);

  const WaveCensus c = wave_census(sol);
  EXPECT_EQ(c.shocks, 1);
  EXPECT_EQ(c.rarefactions, 0);
  EXPECT_EQ(c.stationary, 1);

  EXPECT_EQ(sample(sol, -2.0), -1.0);
  EXPECT_NEAR(sample(sol, -0.5), -kSqrt2, 1e-12);
  EXPECT_EQ(sample(sol, 0.5), -1.0);
}

TEST(RiemannGolden, OpposingUnitStates) {
  const RiemannSolution sol = solve_interface(burgers_pair(), -1.0, 1.0);
  EXPECT_NEAR(sol.trace_left, 0.0, 1e-12);
  EXPECT_NEAR(sol.trace_right, 0.0, 1e-12);
  const WaveCensus c = wave_census(sol);
  EXPECT_EQ(c.shocks, 0);
  EXPECT_EQ(c.rarefactions, 2);
  EXPECT_EQ(c.stationary, 0);
  ASSERT_EQ(sol.waves.size(), 2u);
  EXPECT_NEAR(sol.waves[0].s_min, -1.0, 1e-12);
  EXPECT_NEAR(sol.waves[0].s_max, 0.0, 1e-12);
  EXPECT_NEAR(sol.waves[1].s_min, 0.0, 1e-12);
  EXPECT_NEAR(sol.waves[1].s_max, 2.0, 1e-12);
  EXPECT_EQ(sol.case_tag, RiemannCase::II);

  EXPECT_NEAR(sample(sol, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(sample(sol, -0.5), -0.5, 1e-12);
  EXPECT_EQ(sample(sol, -3.0), -1.0);
  EXPECT_EQ(sample(sol, 3.0), 1.0);
}

TEST(RiemannGolden, GermDatumIsStationary) {
  const RiemannSolution sol = solve_interface(burgers_pair(), kSqrt2, 1.0);
  EXPECT_EQ(sol.case_tag, RiemannCase::germ);
  ASSERT_EQ(sol.waves.size(), 1u);
  EXPECT_EQ(sol.waves[0].kind, WaveKind::stationary_nonclassical_shock);
  EXPECT_EQ(sol.trace_left, kSqrt2);
  EXPECT_EQ(sol.trace_right, 1.0);
}

TEST(RiemannClassical, BurgersShockAndFan) {
  const CellFlux f(FluxModel::power(0.5), 0.0);
  const RiemannSolution shock = solve_classical(f, 2.0, 0.0);
  ASSERT_EQ(shock.waves.size(), 1u);
  EXPECT_DOUBLE_EQ(shock.waves[0].s_min, 1.0);
  const RiemannSolution fan = solve_classical(f, -1.0, 3.0);
  EXPECT_NEAR(fan.sample(0.25), 0.25, 1e-12);
  EXPECT_NEAR(fan.sample(2.0), 2.0, 1e-12);
  EXPECT_EQ(fan.sample(-5.0), -1.0);
  EXPECT_EQ(solve_classical(f, 0.3, 0.3).waves.size(), 0u);
}

TEST(RiemannClassical, RejectsNonFinite) {
  EXPECT_THROW(solve_interface(burgers_pair(), NAN, 0.0), PreconditionError);
}

TEST(RiemannProperties, RandomData) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  for (const InterfaceContext& ctx : flux_pairs()) {
    for (int trial = 0; trial < 400; ++trial) {
      const double ul = ud(rng), ur = ud(rng);
      const RiemannSolution sol = solve_interface(ctx, ul, ur);
      const double flux = interface_flux(ctx, ul, ur);
      const double tol = 1e-12 * (1.0 + std::abs(flux));

      EXPECT_TRUE(in_germ(ctx, sol.trace_left, sol.trace_right));
      EXPECT_NEAR(ctx.left(sol.trace_left), flux, tol);
      EXPECT_NEAR(ctx.right(sol.trace_right), flux, tol);

      const WaveCensus c = wave_census(sol);
      EXPECT_LE(c.shocks + c.rarefactions, 2);
      EXPECT_LE(c.stationary, 1);

      double last = -INFINITY;
      for (const Wave& w : sol.waves) {
        EXPECT_GE(w.s_min, last - 1e-12);
        EXPECT_LE(w.s_min, w.s_max);
        last = w.s_max;
        if (w.side == WaveSide::left_of_interface) EXPECT_LE(w.s_max, 1e-12);
        if (w.side == WaveSide::right_of_interface) EXPECT_GE(w.s_min, -1e-12);
        if (w.kind == WaveKind::shock) {
          const CellFlux& f = w.side == WaveSide::left_of_interface ? ctx.left : ctx.right;
          EXPECT_NEAR(w.s_min * (w.left_state - w.right_state), f(w.left_state) - f(w.right_state), 1e-12);
          EXPECT_GE(f.derivative(w.left_state), w.s_min - 1e-12);
          EXPECT_LE(f.derivative(w.right_state), w.s_min + 1e-12);
        }
      }

      // Conservation over [-a, a] between t = 0 and t = 1.
      const double a = 20.0;
      const double before = a * (ul + ur);
      const double after = integral_at_unit_time(sol, a);
      EXPECT_NEAR(after - before, ctx.left(ul) - ctx.right(ur), 1e-7) << ul << ' ' << ur;
    }
  }
}

TEST(RiemannProperties, FineGridSchemeApproachesExact) {
  const FluxModel model = builtin::burgers_pair();
  const InterfaceContext ctx = InterfaceContext::far_field(model);
  for (auto [ul, ur] : {std::pair{-1.0, -1.0}, std::pair{-1.0, 1.0}, std::pair{1.5, -0.5}}) {
    const RiemannSolution exact = solve_interface(ctx, ul, ur);
    RunConfig cfg{model, Mesh(-3.0, 3.0, 1.0 / 800.0), step_datum(0.0, ul, ur), 0.5, {}};
    const Trajectory tr = run(cfg);
    const GridState& s = tr.snapshots.back();
    double err = 0.0;
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      const double x = cfg.mesh.center(j);
      if (std::abs(x) < 1.5) err += std::abs(s.u[j] - exact.sample(0.5, x)) * cfg.mesh.dx();
    }
    EXPECT_LT(err, 0.02) << ul << ' ' << ur;
  }
}
