#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "slq/policy.hpp"

using slq::DispatchState;
using slq::JobCount;

TEST(SampleAndSelect, UniqueMaximum) {
  slq::RngStream rng(1, 1);
  const std::vector<JobCount> q{5, 2, 7};
  EXPECT_EQ(slq::sample_and_select(q, 1, rng), (std::vector<std::size_t>{2}));
}

TEST(SampleAndSelect, DRangeChecked) {
  slq::RngStream rng(1, 1);
  const std::vector<JobCount> q{5, 2, 7};
  EXPECT_THROW(slq::sample_and_select(q, 0, rng), slq::ConfigError);
  EXPECT_THROW(slq::sample_and_select(q, 3, rng), slq::ConfigError);
}

TEST(SampleAndSelect, TwoWayTieIsFair) {
  const std::vector<JobCount> q{5, 5, 2};
  int first = 0;
  const int draws = 20000;
  slq::RngStream rng(77, 0);
  for (int i = 0; i < draws; ++i) {
    const auto s = slq::sample_and_select(q, 1, rng);
    ASSERT_EQ(s.size(), 1u);
    ASSERT_NE(s[0], 2u);
    first += s[0] == 0;
  }
  // 5 standard deviations of a fair coin.
  EXPECT_NEAR(first, draws / 2, 5 * std::sqrt(draws / 4.0));
}

TEST(SampleAndSelect, AllTiedSubsetsUniformChiSquare) {
  const std::vector<JobCount> q{4, 4, 4, 4};
  std::map<std::vector<std::size_t>, int> counts;
  const int draws = 100000;
  slq::RngStream rng(2024, 9);
  for (int i = 0; i < draws; ++i) ++counts[slq::sample_and_select(q, 2, rng)];
  ASSERT_EQ(counts.size(), 6u);
  const double expected = draws / 6.0;
  double chi2 = 0.0;
  for (const auto& [subset, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 0.999 quantile of chi-square with 5 degrees of freedom.
  EXPECT_LT(chi2, 20.515);
}

TEST(SampleAndSelect, PartialTieOnlyAtBoundary) {
  const std::vector<JobCount> q{9, 3, 3, 3, 1};
  slq::RngStream rng(5, 5);
  std::map<std::size_t, int> second;
  for (int i = 0; i < 30000; ++i) {
    const auto s = slq::sample_and_select(q, 2, rng);
    ASSERT_EQ(s.size(), 2u);
    ASSERT_EQ(s[0], 0u);
    ++second[s[1]];
  }
  ASSERT_EQ(second.size(), 3u);
  for (const auto& [idx, c] : second) EXPECT_NEAR(c, 10000, 500) << idx;
}

TEST(NextTarget, RoundRobinOverAllowedSet) {
  DispatchState s(3, 2, {2});
  std::vector<std::size_t> seen;
  while (!s.exhausted()) seen.push_back(s.next_target());
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_THROW(s.next_target(), slq::StateError);
}

TEST(NextTarget, FunctionalFormAdvancesCopy) {
  DispatchState s(4, 1, {0, 3});
  auto [t1, s1] = slq::next_target(s);
  auto [t2, s2] = slq::next_target(s1);
  EXPECT_EQ(t1, 1u);
  EXPECT_EQ(t2, 2u);
  EXPECT_TRUE(s2.exhausted());
  EXPECT_FALSE(s.exhausted());
  EXPECT_EQ(s.slot_in_cycle(), 0u);
  EXPECT_EQ(s1.slot_in_cycle(), 1u);
}

TEST(NextTarget, RepeatedJsqHitsSingleQueue) {
  const slq::PolicyKind kind = slq::PolicyKind::repeated_jsq(2);
  EXPECT_EQ(kind.effective_k(10), 18u);
  EXPECT_EQ(kind.effective_d(10), 9u);
  DispatchState s(10, 18, {0, 1, 2, 3, 5, 6, 7, 8, 9});
  int count = 0;
  while (!s.exhausted()) {
    EXPECT_EQ(s.next_target(), 4u);
    ++count;
  }
  EXPECT_EQ(count, 18);
}

TEST(CycleLength, Examples) {
  EXPECT_EQ(slq::cycle_length(1, 10, 1), 9u);
  EXPECT_EQ(slq::cycle_length(5, 10, 1), 45u);
  EXPECT_EQ(slq::cycle_length(9, 10, 9), 9u);
  EXPECT_EQ(slq::PolicyKind::round_robin().cycle(10), 10u);
}

TEST(PolicyKind, Labels) {
  EXPECT_EQ(slq::PolicyKind::slq(1, 1).label(10), "1-SLQ-1");
  EXPECT_EQ(slq::PolicyKind::repeated_jsq(1).label(20), "19-SLQ-19");
  EXPECT_EQ(slq::PolicyKind::jsq().label(5), "1-SLQ-4");
  EXPECT_EQ(slq::PolicyKind::round_robin().label(10), "Round-Robin");
  EXPECT_THROW(slq::PolicyKind::slq(1, 4).validate(4), slq::ConfigError);
  EXPECT_THROW(slq::PolicyKind::slq(0, 1).validate(4), slq::ConfigError);
}

TEST(Dispatcher, RoundRobinChargesNothing) {
  slq::Dispatcher disp(slq::PolicyKind::round_robin(), 4, slq::RngStream(1, 1));
  const std::vector<JobCount> q{0, 9, 0, 0};
  for (int t = 0; t < 12; ++t) {
    const auto dec = disp.dispatch(q);
    EXPECT_EQ(dec.target, static_cast<std::size_t>(t % 4));
    EXPECT_EQ(dec.messages, 0u);
  }
}

TEST(Dispatcher, SampleAppliesToBoundarySlot) {
  slq::Dispatcher disp(slq::PolicyKind::slq(1, 1), 3, slq::RngStream(1, 1));
  const std::vector<JobCount> q{0, 0, 9};
  const auto first = disp.dispatch(q);
  EXPECT_TRUE(first.cycle_start);
  EXPECT_EQ(first.messages, 6u);
  EXPECT_EQ(first.target, 0u);
  const auto second = disp.dispatch(std::vector<JobCount>{9, 0, 0});
  EXPECT_FALSE(second.cycle_start);
  EXPECT_EQ(second.target, 1u);
  const auto third = disp.dispatch(std::vector<JobCount>{9, 0, 0});
  EXPECT_TRUE(third.cycle_start);
  EXPECT_EQ(third.target, 1u);
}
