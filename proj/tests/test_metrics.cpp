#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "slq/metrics.hpp"

using slq::JobCount;

TEST(PerpNorm, Examples) {
  EXPECT_DOUBLE_EQ(slq::perp_norm_sq(std::vector<JobCount>{3, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(slq::perp_norm_sq(std::vector<JobCount>{4, 1, 1}), 6.0);
  EXPECT_DOUBLE_EQ(slq::perp_norm_sq(std::vector<JobCount>(5, 0)), 0.0);
}

TEST(PerpNorm, PythagoreanIdentity) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<JobCount> q(1 + gen() % 20);
    double norm_sq = 0.0;
    for (auto& v : q) {
      v = static_cast<JobCount>(gen() % 5000);
      norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    const auto s = slq::ssc_snapshot(q, false);
    ASSERT_GE(s.perp_norm_sq, 0.0);
    ASSERT_NEAR(s.parallel_norm_sq + s.perp_norm_sq, norm_sq, 1e-9 * std::max(1.0, norm_sq));
  }
}

TEST(CollapseRatio, Examples) {
  EXPECT_DOUBLE_EQ(slq::collapse_ratio(0.0, 300.0, 3), 0.0);
  EXPECT_NEAR(slq::collapse_ratio(6.0, 600.0, 3), std::sqrt(18.0) / 600.0, 1e-15);
  EXPECT_NEAR(slq::collapse_ratio(6.0, 600.0, 3), 0.00707, 1e-5);
  EXPECT_THROW(slq::collapse_ratio(1.0, 0.0, 3), slq::PreconditionError);
}

TEST(BatchMeans, ConstantSeries) {
  const std::vector<double> series(1000, 4.5);
  const auto e = slq::batch_means(series, 20);
  EXPECT_DOUBLE_EQ(e.mean, 4.5);
  EXPECT_DOUBLE_EQ(e.half_width, 0.0);
}

TEST(BatchMeans, IidHalfWidthMatchesStandardError) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> series(1'000'000);
  for (auto& x : series) x = normal(gen);
  const auto e = slq::batch_means(series, 20);
  const double se = 1.0 / std::sqrt(1e6);
  EXPECT_NEAR(e.mean, 0.0, 5 * se);
  // t_{0.975,19} = 2.093; the sample sd of 20 batch means fluctuates by
  // roughly 1/sqrt(38), so allow a generous band around the nominal width.
  EXPECT_GT(e.half_width, 0.5 * 2.093 * se);
  EXPECT_LT(e.half_width, 1.6 * 2.093 * se);
}

TEST(BatchMeans, TooShort) {
  const std::vector<double> series(199, 1.0);
  EXPECT_THROW(slq::batch_means(series, 20), slq::PreconditionError);
}

TEST(StudentT, KnownQuantiles) {
  EXPECT_NEAR(slq::student_t_975(19), 2.093, 1e-3);
  EXPECT_NEAR(slq::student_t_975(1000), 1.962, 1e-3);
}

TEST(BatchAccumulator, WeightsIrregularSamples) {
  slq::BatchAccumulator acc(2);
  acc.add(0, 1.0);
  acc.add(0, 3.0);
  acc.add(1, 5.0);
  EXPECT_EQ(acc.means(), (std::vector<double>{2.0, 5.0}));
  EXPECT_DOUBLE_EQ(acc.overall_mean(), 3.0);
}
