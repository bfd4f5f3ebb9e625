#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <vector>

#include "slq/model.hpp"

using slq::JobCount;
using slq::QueueVector;

TEST(Step, ArrivalAndServiceInOneMax) {
  const std::vector<JobCount> services{3, 3, 3};
  auto [next, out] = slq::step({5, 2, 7}, 4, 1, services);
  EXPECT_EQ(next, (QueueVector{2, 3, 4}));
  EXPECT_EQ(out.unused, (std::vector<JobCount>{0, 0, 0}));
  EXPECT_EQ(out.arrivals_total, 4);
  EXPECT_EQ(out.target, 1u);
}

TEST(Step, UnusedServiceWhenQueuesEmpty) {
  const std::vector<JobCount> services{3, 1, 3};
  auto [next, out] = slq::step({1, 0, 2}, 2, 0, services);
  EXPECT_EQ(next, (QueueVector{0, 0, 0}));
  EXPECT_EQ(out.unused, (std::vector<JobCount>{0, 1, 1}));
}

TEST(Step, IdentityOnEmptySystem) {
  const std::vector<JobCount> services{0, 0};
  auto [next, out] = slq::step({0, 0}, 0, 0, services);
  EXPECT_EQ(next, (QueueVector{0, 0}));
  EXPECT_EQ(out.unused, (std::vector<JobCount>{0, 0}));
}

TEST(Step, DimensionMismatchIsConfigError) {
  const std::vector<JobCount> services{1, 1};
  EXPECT_THROW(slq::step({1, 2, 3}, 0, 0, services), slq::ConfigError);
  EXPECT_THROW(slq::step({1, 2}, 0, 2, services), slq::ConfigError);
}

TEST(TotalJobs, Sums) {
  EXPECT_EQ(slq::total_jobs(QueueVector{2, 3, 4}), 9);
  EXPECT_EQ(slq::total_jobs(QueueVector(7, 0)), 0);
  EXPECT_EQ(slq::total_jobs(QueueVector{5, 2, 7}), 14);
}

TEST(Step, RandomizedInvariants) {
  std::mt19937_64 gen(12345);
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t n = 1 + gen() % 8;
    const JobCount s_max = 1 + static_cast<JobCount>(gen() % 5);
    const JobCount a_max = 1 + static_cast<JobCount>(gen() % 4);
    QueueVector q(n);
    for (auto& v : q) v = static_cast<JobCount>(gen() % 6);
    std::vector<JobCount> services(n);
    for (auto& s : services) s = static_cast<JobCount>(gen() % (s_max + 1));
    const JobCount arrivals = static_cast<JobCount>(gen() % (a_max * static_cast<JobCount>(n) + 1));
    const std::size_t target = gen() % n;
    auto [next, out] = slq::step(q, arrivals, target, services);
    JobCount unused_sum = 0, service_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const JobCount arrived = i == target ? arrivals : 0;
      ASSERT_GE(next[i], 0);
      ASSERT_EQ(next[i] - q[i], arrived - services[i] + out.unused[i]);
      ASSERT_EQ(next[i] * out.unused[i], 0);
      ASSERT_LE(out.unused[i], services[i]);
      ASSERT_LE(std::llabs(next[i] - q[i]), std::max(a_max * static_cast<JobCount>(n), s_max));
      unused_sum += out.unused[i];
      service_sum += services[i];
    }
    ASSERT_EQ(slq::total_jobs(next), slq::total_jobs(q) + arrivals - service_sum + unused_sum);
  }
}
