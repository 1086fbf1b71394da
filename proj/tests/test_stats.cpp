#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include <wallsim/stats.hpp>

using namespace wallsim;

namespace {

struct SumAcc {
  std::int64_t sum = 0;
  void merge(const SumAcc &o) { sum += o.sum; }
};

RunConfig small_config(int depth, int steps, std::int64_t replicas) {
  RunConfig c;
  c.q = 0.5;
  c.depth = depth;
  c.steps = steps;
  c.replicas = replicas;
  c.seed = 17;
  return c;
}

} // namespace

TEST(Threshold, FamilywiseLevels) {
  EXPECT_NEAR(familywise_threshold(1), 3.0, 1e-4);
  EXPECT_GT(familywise_threshold(100), familywise_threshold(10));
  EXPECT_NEAR(std::erfc(familywise_threshold(50) / std::sqrt(2.0)), 0.0027 / 50, 1e-12);
  EXPECT_THROW(familywise_threshold(0), std::invalid_argument);
}

TEST(Parallel, ResultIndependentOfThreadCount) {
  auto body = [](SumAcc &a, std::int64_t rep) {
    RandomDraws d(0.5, 3, static_cast<std::uint64_t>(rep));
    a.sum += d(2, 1, DrawTag::full, 0);
  };
  const auto one = parallel_replicas<SumAcc>(1001, body, 1);
  const auto four = parallel_replicas<SumAcc>(1001, body, 4);
  EXPECT_EQ(one.sum, four.sum);
}

TEST(ExactLaw, LevelOneIsReflectionPower) {
  const double q = 0.4;
  double lost = 1.0;
  const auto law = level_law_exact(1, 2, q, 1e-16, &lost);
  EXPECT_LT(std::abs(lost), 1e-12);
  for (int y = 0; y < 6; ++y) {
    double two_step = 0.0;
    for (int m = 0; m < 200; ++m)
      two_step += r_kernel(0, m, q) * r_kernel(m, y, q);
    EXPECT_NEAR(law.at({y}), two_step, 1e-13);
  }
}

TEST(ExactLaw, MassIsConserved) {
  for (int k = 2; k <= 4; ++k) {
    double lost = 1.0;
    level_law_exact(k, 2, 0.5, 1e-14, &lost);
    EXPECT_LT(std::abs(lost), 1e-9) << "k=" << k;
  }
}

TEST(CompareLaw, ExpectedCountsGiveZeroDistance) {
  const Distribution exact{{{0}, 0.5}, {{1}, 0.25}, {{2}, 0.25}};
  CountTable t;
  for (int i = 0; i < 200; ++i)
    t.add({0});
  for (int i = 0; i < 100; ++i) {
    t.add({1});
    t.add({2});
  }
  const auto c = compare_law(t, exact);
  EXPECT_NEAR(c.total_variation, 0.0, 1e-15);
  EXPECT_NEAR(c.max_abs_z, 0.0, 1e-12);
  EXPECT_EQ(c.compared_states, 3);
}

TEST(MonteCarlo, LevelLawsAgreeWithKernel) {
  const auto cfg = small_config(3, 2, 200000);
  for (int k = 1; k <= 3; ++k) {
    const auto tables = empirical_level_laws(cfg, k);
    ASSERT_EQ(tables.size(), 2u);
    for (int n = 1; n <= 2; ++n) {
      const auto cmp = compare_law(tables[n - 1], level_law_exact(k, n, cfg.q));
      EXPECT_LT(cmp.total_variation, 0.01) << "k=" << k << " n=" << n;
      EXPECT_LT(cmp.max_abs_z, familywise_threshold(cmp.compared_states)) << "k=" << k << " n=" << n;
    }
  }
}

TEST(MonteCarlo, NoImpossibleTransitions) {
  const auto cfg = small_config(4, 2, 100000);
  for (int k = 2; k <= 4; ++k) {
    const auto tab = empirical_transitions(cfg, k, 2);
    const auto cmp = compare_transitions(tab, k, cfg.q);
    EXPECT_EQ(cmp.impossible_count, 0) << "k=" << k;
    EXPECT_GT(cmp.compared_entries, 10);
    EXPECT_LT(cmp.max_abs_z, familywise_threshold(cmp.compared_entries)) << "k=" << k;
  }
  EXPECT_THROW(empirical_transitions(cfg, 2, 3), std::invalid_argument);
}

TEST(MonteCarlo, CorrelationAgreesWithKernel) {
  const auto cfg = small_config(3, 2, 200000);
  const std::vector<std::vector<SpacePoint>> sets{{{0, 1}}, {{1, 2}}, {{0, 3}, {2, 3}}, {{1, 2}, {1, 3}}};
  const auto est = empirical_correlation(cfg, 2, sets);
  ASSERT_EQ(est.size(), sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double det = correlation_det(2, sets[i], cfg.q);
    EXPECT_LT(std::abs(est[i].mean - det), familywise_threshold(4) * est[i].sigma) << "set " << i;
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeCounts) {
  const auto cfg = small_config(2, 2, 5000);
  setenv("WALLSIM_THREADS", "1", 1);
  const auto a = empirical_level_laws(cfg, 2);
  setenv("WALLSIM_THREADS", "3", 1);
  const auto b = empirical_level_laws(cfg, 2);
  unsetenv("WALLSIM_THREADS");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i].counts, b[i].counts);
}

TEST(MonteCarlo, EmptyEnsembleThrows) {
  auto cfg = small_config(2, 1, 1);
  cfg.replicas = 0;
  EXPECT_THROW(empirical_correlation(cfg, 1, {{{0, 1}}}), std::invalid_argument);
  EXPECT_THROW(empirical_level_laws(cfg, 1), std::invalid_argument);
}
