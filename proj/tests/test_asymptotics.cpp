#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <wallsim/asymptotics.hpp>

using namespace wallsim;

using JP = JacobiParam;

TEST(Scaling, ConstantsAtHalf) {
  const auto sp = ScalingParams::from_q(0.5);
  EXPECT_DOUBLE_EQ(sp.alpha, 2.0);
  EXPECT_NEAR(sp.c_alpha, 2.0 * std::numbers::sqrt2 / 9.0, 1e-15);
  EXPECT_NEAR(sp.c_alpha, 0.314269680527354, 1e-14);
  EXPECT_NEAR(sp.density, 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(sp.theta(1.0, 0.1), 1.0 - 1.0 / 36.0, 1e-15);
  EXPECT_THROW(sp.theta(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ScalingParams::from_q(0.0), std::invalid_argument);
}

TEST(Pearcey, GaussianTermOnlyWhenEtaDecreases) {
  const PearceyPoint a{0.4, 0.5}, b{0.9, -0.5};
  const double d = b.eta - a.eta;
  const double expected = (std::exp(1.3 * 1.3 / d) + std::exp(0.5 * 0.5 / d)) / std::sqrt(std::numbers::pi);
  EXPECT_NEAR(pearcey_gaussian_term(a, b), expected, 1e-15);
  EXPECT_EQ(pearcey_gaussian_term(b, a), 0.0);
  EXPECT_EQ(pearcey_gaussian_term(a, a), 0.0);
}

TEST(Pearcey, ZeroNuLeavesOnlyGaussianTerm) {
  const PearceyPoint a{0.0, 0.5}, b{0.9, -0.5};
  EXPECT_EQ(pearcey_kernel(a, b).value, pearcey_gaussian_term(a, b));
  EXPECT_EQ(pearcey_kernel(b, a).value, 0.0);
}

TEST(Pearcey, SubstitutionConstantDoesNotMatter) {
  const std::vector<std::pair<PearceyPoint, PearceyPoint>> pairs{
      {{0.7, 0.3}, {0.7, 0.3}}, {{0.5, -0.4}, {1.1, 0.2}}, {{1.2, 0.6}, {0.3, -0.1}}};
  for (const auto &[p1, p2] : pairs) {
    const double base = pearcey_kernel(p1, p2).value;
    for (double c : {0.5, 2.0, 3.0})
      EXPECT_NEAR(pearcey_kernel(p1, p2, {}, c).value, base, 1e-9) << "c=" << c;
  }
}

TEST(Pearcey, FrozenDiagonalValue) {
  const auto v = pearcey_kernel({0.7, 0.3}, {0.7, 0.3});
  EXPECT_NEAR(v.value, -0.22196, 5e-5);
  EXPECT_LT(v.imag_residue, 1e-9);
}

TEST(Pearcey, RejectsBadArguments) {
  EXPECT_THROW(pearcey_kernel({-0.1, 0.0}, {0.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(pearcey_kernel({0.1, 0.0}, {0.5, 0.0}, {}, 0.0), std::invalid_argument);
}

TEST(DiscreteJacobi, FullRangeIsOrthonormal) {
  const double u = -1.0 + 1e-12;
  for (auto a : {JP::minus_half, JP::plus_half})
    for (int s = 0; s <= 6; ++s)
      for (int t = 0; t <= 6; ++t)
        EXPECT_NEAR(discrete_jacobi_kernel(2, a, s, 2, a, t, 0.5, u).value, s == t ? 1.0 : 0.0, 1e-10)
            << "s=" << s << " t=" << t;
}

TEST(DiscreteJacobi, DependsOnLevelDifferenceOnly) {
  for (double u : {-0.5, 0.2, 0.9})
    for (auto a1 : {JP::minus_half, JP::plus_half})
      for (auto a2 : {JP::minus_half, JP::plus_half}) {
        const double x = discrete_jacobi_kernel(5, a1, 2, 3, a2, 4, 0.5, u).value;
        const double y = discrete_jacobi_kernel(2, a1, 2, 0, a2, 4, 0.5, u).value;
        EXPECT_NEAR(x, y, 1e-12);
        const double lo = discrete_jacobi_kernel(3, a1, 1, 5, a2, 3, 0.5, u).value;
        const double lo0 = discrete_jacobi_kernel(0, a1, 1, 2, a2, 3, 0.5, u).value;
        EXPECT_NEAR(lo, lo0, 1e-12);
      }
}

TEST(DiscreteJacobi, SameSiteMatchesDirectIntegral) {
  // L(r,a,0,r,a,0,1/2;u) = (2^{a+1/2}/π) ∫_u^1 (1-x)^a (1+x)^{1/2} dx, a = 1/2
  const double u = 0.3;
  const int n = 200000;
  double direct = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = u + (1.0 - u) * (i + 0.5) / n;
    direct += std::sqrt(1.0 - x) * std::sqrt(1.0 + x);
  }
  direct *= (1.0 - u) / n * 2.0 / std::numbers::pi;
  EXPECT_NEAR(discrete_jacobi_kernel(1, JP::plus_half, 0, 1, JP::plus_half, 0, 0.5, u).value, direct, 1e-8);
}

TEST(DiscreteJacobi, RejectsOutOfRange) {
  EXPECT_THROW(discrete_jacobi_kernel(1, JP::plus_half, 0, 1, JP::plus_half, 0, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(discrete_jacobi_kernel(1, JP::plus_half, 0, 1, JP::plus_half, 0, 0.5, -1.0), std::invalid_argument);
  EXPECT_THROW(discrete_jacobi_kernel(1, JP::plus_half, -1, 1, JP::plus_half, 0, 0.5, 0.0), std::invalid_argument);
}

TEST(ScalingMap, RoundsToLatticeSites) {
  const auto sp = ScalingParams::from_q(0.5);
  const auto m = scaling_map_pearcey({{1.0, 0.0}, {0.5, 1.0}}, {JP::plus_half, JP::minus_half}, 10000, 0.5);
  ASSERT_EQ(m.sites.size(), 2u);
  EXPECT_EQ(m.T, 10000);
  EXPECT_EQ(m.sites[0].s, 6);
  EXPECT_EQ(m.sites[0].r, 8889);
  EXPECT_EQ(m.sites[0].level(), 2 * 8889);
  EXPECT_EQ(m.sites[1].level(), 2 * m.sites[1].r - 1);
  EXPECT_NEAR(m.scale, 10.0 / std::sqrt(sp.c_alpha), 1e-12);
  EXPECT_NEAR(m.effective[0].nu, 6.0 / (std::sqrt(sp.c_alpha) * 10.0), 1e-12);
  EXPECT_NEAR(m.effective[0].eta, (8889 - sp.density * 10000) / (sp.c_alpha * 100.0), 1e-12);
  EXPECT_THROW(scaling_map_pearcey({{1.0, 0.0}}, {}, 100, 0.5), std::invalid_argument);
  EXPECT_THROW(scaling_map_pearcey({{1.0, 0.0}}, {JP::plus_half}, 0, 0.5), std::invalid_argument);
}

TEST(JacobiRegime, FiniteDeterminantsApproachLimit) {
  const auto rows =
      convergence_diagnostic_jacobi({0, 1}, {0, 1}, {JP::plus_half, JP::minus_half}, 1.0, 0.1, 0.5, {50, 100, 200});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[1].abs_err, rows[0].abs_err);
  EXPECT_LT(rows[2].abs_err, rows[1].abs_err);
  EXPECT_LT(rows[2].abs_err, 0.15 * rows[2].det_limit);
  const auto one = convergence_diagnostic_jacobi({0}, {0}, {JP::plus_half}, 1.0, 0.1, 0.5, {50, 100, 200});
  EXPECT_LT(one[1].abs_err, one[0].abs_err);
  EXPECT_LT(one[2].abs_err, one[1].abs_err);
  EXPECT_LT(one[2].abs_err, 2e-4);
}

TEST(JacobiRegime, FrozenRegionHasLimitOne) {
  const auto rows = convergence_diagnostic_jacobi({0}, {0}, {JP::plus_half}, 1.0, 0.95, 0.5, {50, 100, 200});
  for (const auto &r : rows)
    EXPECT_EQ(r.det_limit, 1.0);
  EXPECT_LT(rows.back().abs_err, rows.front().abs_err);
}
