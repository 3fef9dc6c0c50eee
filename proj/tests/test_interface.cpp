#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hetflux/interface.hpp"

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

// The four-case table for the interface flux, written out independently.
double case_table_flux(const InterfaceContext& c, double ul, double ur) {
  const double minl = c.left.minimum(), minr = c.right.minimum();
  if (ul <= c.left.alpha() && ur <= c.right.alpha()) return std::max(minl, c.right(ur));
  if (ul <= c.left.alpha()) return std::max(minl, minr);
  if (ur <= c.right.alpha()) return std::max(c.left(ul), c.right(ur));
  return std::max(c.left(ul), minr);
}

// Remainder at a constant pair (k, k), from the closed form for equal states.
double constant_remainder(const InterfaceContext& c, double k) {
  if (c.right.alpha() <= k && k < c.left.alpha()) {
    const double m = std::max(c.left.minimum(), c.right.minimum());
    return std::abs(m - c.left(k)) + std::abs(m - c.right(k));
  }
  return std::abs(c.left(k) - c.right(k));
}

// A random member of the germ, or nothing when f_l(k_l) < min f_r.
bool random_germ_pair(const InterfaceContext& c, std::mt19937_64& rng, GermPair& out) {
  std::uniform_real_distribution<double> kd(c.left.alpha() - 2.5, c.left.alpha() + 2.5);
  std::uniform_int_distribution<int> which(0, 1);
  const double kl = kd(rng);
  const double y = c.left(kl);
  if (y < c.right.minimum()) return false;
  const Branch b = kl < c.left.alpha() ? Branch::minus : (which(rng) ? Branch::plus : Branch::minus);
  out = {kl, c.right.inverse(y, b)};
  return true;
}

}  // namespace

TEST(EntropyFlux, Examples) {
  auto half = [](double u) { return 0.5 * u * u; };
  auto sq = [](double u) { return u * u; };
  EXPECT_DOUBLE_EQ(entropy_flux(half, 2.0, 1.0), 1.5);
  EXPECT_EQ(entropy_flux(sq, 0.7, 0.7), 0.0);
  EXPECT_EQ(entropy_flux(sq, -1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(entropy_flux(half, 1.0, 2.0), entropy_flux(half, 2.0, 1.0));
}

TEST(GodunovFlux, ExamplesAndMonotonicity) {
  auto half = [](double u) { return 0.5 * u * u; };
  auto sq = [](double u) { return u * u; };
  EXPECT_DOUBLE_EQ(godunov_flux(half, 0.0, 1.0, -1.0), 0.5);
  EXPECT_EQ(godunov_flux(half, 0.0, -1.0, 1.0), 0.0);
  EXPECT_EQ(godunov_flux(sq, 0.0, 3.0, 3.0), 9.0);
  for (double a = -2.0; a <= 2.0; a += 0.1) {
    for (double b = -2.0; b <= 2.0; b += 0.1) {
      EXPECT_LE(godunov_flux(half, 0.0, a, b), godunov_flux(half, 0.0, a + 0.1, b));
      EXPECT_GE(godunov_flux(half, 0.0, a, b), godunov_flux(half, 0.0, a, b + 0.1));
    }
  }
}

TEST(InterfaceFlux, WorkedExamples) {
  const InterfaceContext c = burgers_pair();
  EXPECT_DOUBLE_EQ(interface_flux(c, -1.0, -1.0), 1.0);  // case I: f_r(-1)
  EXPECT_EQ(interface_flux(c, -1.0, 1.0), 0.0);           // case II
  EXPECT_THROW(interface_flux(c, NAN, 1.0), PreconditionError);
}

TEST(InterfaceFlux, AgreesWithCaseTableAndIsMonotone) {
  for (const InterfaceContext& c : flux_pairs()) {
    for (double ul = -2.5; ul <= 2.5; ul += 0.05) {
      for (double ur = -2.5; ur <= 2.5; ur += 0.05) {
        const double f = interface_flux(c, ul, ur);
        EXPECT_EQ(f, case_table_flux(c, ul, ur));
        EXPECT_LE(f, interface_flux(c, ul + 0.05, ur));
        EXPECT_GE(f, interface_flux(c, ul, ur + 0.05));
      }
    }
  }
}

TEST(InterfaceFlux, LocallyLipschitz) {
  for (const InterfaceContext& c : flux_pairs()) {
    // |f'| <= 2 a |u - b| + ... bounded by 20 on [-3, 3] for every pair above.
    const double h = 1e-3;
    for (double ul = -3.0; ul <= 3.0; ul += 0.1) {
      for (double ur = -3.0; ur <= 3.0; ur += 0.1) {
        EXPECT_LE(std::abs(interface_flux(c, ul + h, ur) - interface_flux(c, ul, ur)), 20.0 * h);
        EXPECT_LE(std::abs(interface_flux(c, ul, ur + h) - interface_flux(c, ul, ur)), 20.0 * h);
      }
    }
  }
}

TEST(InterfaceFlux, HomogeneousReductionIsGodunov) {
  const CellFlux f(FluxModel::power(0.5), 0.0);
  const InterfaceContext c{f, f};
  for (double a = -2.0; a <= 2.0; a += 0.02) {
    for (double b = -2.0; b <= 2.0; b += 0.02) {
      EXPECT_EQ(interface_flux(c, a, b), godunov_flux(f, f.alpha(), a, b));
    }
    EXPECT_EQ(interface_flux(c, a, a), f(a));
  }
}

TEST(Remainder, Examples) {
  const InterfaceContext c = burgers_pair();
  EXPECT_NEAR(remainder(c, kSqrt2, 1.0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(remainder(c, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(remainder(c, -1.0, -1.0), 0.5);
}

TEST(Remainder, ConstantPairsMatchClosedForm) {
  for (const InterfaceContext& c : flux_pairs()) {
    for (double k = -3.0; k <= 3.0; k += 0.01) EXPECT_NEAR(remainder(c, k, k), constant_remainder(c, k), 1e-13);
  }
}

TEST(ClassifyGerm, Examples) {
  const InterfaceContext c = burgers_pair();
  EXPECT_EQ(classify_germ(c, kSqrt2, 1.0), GermClass::G1);
  EXPECT_EQ(classify_germ(c, -kSqrt2, -1.0), GermClass::G2);
  EXPECT_EQ(classify_germ(c, -kSqrt2, 1.0), GermClass::not_member);
  EXPECT_EQ(classify_germ(c, kSqrt2, -1.0), GermClass::G3);
  EXPECT_EQ(classify_germ(c, 1.0, 1.0), GermClass::not_member);
}

TEST(Dissipativity, Examples) {
  const InterfaceContext c = burgers_pair();
  EXPECT_EQ(dissipativity_gap(c, {kSqrt2, 1.0}, {kSqrt2, 1.0}), 0.0);
  EXPECT_NEAR(dissipativity_gap(c, {kSqrt2, 1.0}, {2.0, c.right.inverse(2.0, Branch::plus)}), 0.0, 1e-14);
  const GermPair k3{2.0, c.right.inverse(2.0, Branch::minus)};
  ASSERT_EQ(classify_germ(c, k3.left, k3.right), GermClass::G3);
  EXPECT_NEAR(dissipativity_gap(c, {kSqrt2, 1.0}, k3), 2.0 * (c.left(2.0) - c.left(kSqrt2)), 1e-14);
  EXPECT_THROW(dissipativity_gap(c, {1.0, 1.0}, k3), PreconditionError);
}

TEST(GermProperties, RandomizedAlgebra) {
  std::mt19937_64 rng(2024);
  for (const InterfaceContext& c : flux_pairs()) {
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    std::vector<GermPair> germ;
    while (germ.size() < 300) {
      GermPair p;
      if (random_germ_pair(c, rng, p)) germ.push_back(p);
    }
    for (std::size_t i = 0; i < germ.size(); ++i) {
      const GermPair& u = germ[i];
      // Membership, Rankine-Hugoniot and zero remainder.
      EXPECT_NE(classify_germ(c, u.left, u.right), GermClass::not_member);
      EXPECT_LE(std::abs(c.left(u.left) - c.right(u.right)), 1e-12);
      EXPECT_LE(remainder(c, u.left, u.right), 1e-12);
      // L1 dissipativity against another germ pair.
      const GermPair& k = germ[(i * 7 + 3) % germ.size()];
      EXPECT_GE(dissipativity_gap(c, u, k), -1e-12);
      // Bound by the remainder for arbitrary states.
      const double ul = ud(rng), ur = ud(rng);
      EXPECT_LE(entropy_flux(c.right, ur, k.right) - entropy_flux(c.left, ul, k.left), remainder(c, ul, ur) + 1e-12);
      EXPECT_EQ(classify_germ(c, ul, ur) != GermClass::not_member, remainder(c, ul, ur) <= 1e-9);
    }
  }
}

TEST(GermProperties, NearCriticalStates) {
  for (const InterfaceContext& c : flux_pairs()) {
    // Within rounding of the critical value both branches belong to the germ.
    for (double eps : {0.0, 1e-13, 1e-11}) {
      for (double kl : {c.left.alpha() + eps, c.left.alpha() - eps}) {
        const double y = c.left(kl);
        if (y < c.right.minimum()) continue;
        for (Branch b : {Branch::plus, Branch::minus}) {
          const double kr = c.right.inverse(y, b);
          EXPECT_TRUE(in_germ(c, kl, kr)) << kl << ' ' << kr;
          EXPECT_LE(remainder(c, kl, kr), 1e-12);
        }
      }
    }
    // Away from it the germ and the zero set of the remainder coincide.
    for (double eps : {1e-3, 1e-2, 0.1}) {
      for (double kl : {c.left.alpha() + eps, c.left.alpha() - eps}) {
        const double y = c.left(kl);
        if (y < c.right.minimum()) continue;
        for (Branch b : {Branch::plus, Branch::minus}) {
          const double kr = c.right.inverse(y, b);
          EXPECT_EQ(in_germ(c, kl, kr), remainder(c, kl, kr) <= 1e-12) << kl << ' ' << kr;
        }
      }
    }
  }
}

TEST(GermProperties, ExcludedBranchFailsMaximality) {
  for (const InterfaceContext& c : flux_pairs()) {
    int checked = 0;
    for (double ul = c.left.alpha() - 2.0; ul < c.left.alpha() - 0.05; ul += 0.1) {
      const double y = c.left(ul);
      if (y <= c.right.minimum()) continue;
      const double ur = c.right.inverse(y, Branch::plus);
      ASSERT_EQ(classify_germ(c, ul, ur), GermClass::not_member);
      // A germ pair k in G2 with k_l between u_l and alpha_l makes the gap negative.
      const double floor = std::max(c.left.minimum(), c.right.minimum());
      const double kl = 0.5 * (ul + c.left.inverse(floor, Branch::minus));
      const double kr = c.right.inverse(c.left(kl), Branch::minus);
      ASSERT_TRUE(in_germ(c, kl, kr));
      EXPECT_LT(entropy_flux(c.left, ul, kl) - entropy_flux(c.right, ur, kr), 0.0) << "ul=" << ul;
      ++checked;
    }
    EXPECT_GT(checked, 0);
  }
}
