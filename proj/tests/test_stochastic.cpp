#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "slq/stochastic.hpp"

namespace {

double atom_mass(const slq::BoundedDiscreteDist& d, slq::JobCount v) {
  for (const auto& a : d.atoms())
    if (a.value == v) return a.probability;
  return 0.0;
}

}  // namespace

TEST(BoundedDiscrete, IntegerAnchorsGiveExactTwoPointLaw) {
  const auto d = slq::make_bounded_discrete(2.0, 1.0, 3);
  ASSERT_EQ(d.atoms().size(), 2u);
  EXPECT_DOUBLE_EQ(atom_mass(d, 1), 0.5);
  EXPECT_DOUBLE_EQ(atom_mass(d, 3), 0.5);
  EXPECT_DOUBLE_EQ(d.mean(), 2.0);
  EXPECT_DOUBLE_EQ(d.variance(), 1.0);
}

TEST(BoundedDiscrete, FractionalAnchorsAreRandomizedRounded) {
  const auto d = slq::make_bounded_discrete(19.99, 25.0, 30);
  ASSERT_EQ(d.atoms().size(), 4u);
  EXPECT_NEAR(atom_mass(d, 14), 0.005, 1e-12);
  EXPECT_NEAR(atom_mass(d, 15), 0.495, 1e-12);
  EXPECT_NEAR(atom_mass(d, 24), 0.005, 1e-12);
  EXPECT_NEAR(atom_mass(d, 25), 0.495, 1e-12);
  // Direct summation over the atoms.
  double m = 0.0, m2 = 0.0, p = 0.0;
  for (const auto& a : d.atoms()) {
    p += a.probability;
    m += a.probability * static_cast<double>(a.value);
    m2 += a.probability * static_cast<double>(a.value * a.value);
  }
  EXPECT_NEAR(p, 1.0, 1e-12);
  EXPECT_NEAR(m, 19.99, 1e-12);
  EXPECT_GE(m2 - m * m, 25.0 - 1e-9);
  EXPECT_LE(m2 - m * m, 25.25 + 1e-9);
}

TEST(BoundedDiscrete, InfeasibleAnchorsRejected) {
  EXPECT_THROW(slq::make_bounded_discrete(2.0, 10.0, 3), slq::InfeasibleError);
  EXPECT_THROW(slq::make_bounded_discrete(2.5, 1.0, 3), slq::InfeasibleError);  // 3.5 > 3
  EXPECT_THROW(slq::make_bounded_discrete(0.0, 0.0, 3), slq::InfeasibleError);
  EXPECT_THROW(slq::make_bounded_discrete(3.0, 0.0, 3), slq::InfeasibleError);
  try {
    slq::make_bounded_discrete(2.0, 10.0, 3);
  } catch (const slq::InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("lower anchor"), std::string::npos);
  }
}

TEST(BoundedDiscrete, MomentFidelityProperty) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int built = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const slq::JobCount bound = 1 + static_cast<slq::JobCount>(gen() % 60);
    const double b = static_cast<double>(bound);
    const double mean = b * (0.01 + 0.98 * unit(gen));
    const double max_sd = std::min(mean, b - mean);
    const double variance = std::pow(max_sd * unit(gen), 2);
    const auto d = slq::make_bounded_discrete(mean, variance, bound);
    ++built;
    double p = 0.0;
    for (const auto& a : d.atoms()) {
      ASSERT_GE(a.value, 0);
      ASSERT_LE(a.value, bound);
      p += a.probability;
    }
    ASSERT_NEAR(p, 1.0, 1e-12);
    ASSERT_NEAR(d.mean(), mean, 1e-9 * std::max(1.0, mean));
    ASSERT_GE(d.variance(), variance - 1e-9 * std::max(1.0, variance));
    ASSERT_LE(d.variance(), variance + 0.25 + 1e-9 * std::max(1.0, variance));
  }
  EXPECT_EQ(built, 5000);
}

TEST(Sample, DegenerateLawIsConstant) {
  const auto d = slq::make_bounded_discrete(5.0, 0.0, 9);
  slq::RngStream rng(1, 2);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(d.sample(rng), 5);
}

TEST(Sample, LawOfLargeNumbers) {
  const auto d = slq::make_bounded_discrete(2.0, 1.0, 3);
  slq::RngStream rng(2024, 0);
  const int count = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < count; ++i) {
    const double x = static_cast<double>(slq::sample(d, rng));
    ASSERT_TRUE(x == 1.0 || x == 3.0);
    s += x;
    s2 += x * x;
  }
  const double m = s / count;
  EXPECT_NEAR(m, 2.0, 0.01);
  EXPECT_NEAR(s2 / count - m * m, 1.0, 0.02);
}

TEST(RngStream, DeterministicPerKey) {
  slq::RngStream a(99, 5), b(99, 5), c(99, 6), e(100, 5);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    ASSERT_EQ(x, b.next_u64());
    differs_stream |= x != c.next_u64();
    differs_seed |= x != e.next_u64();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
}

// Frozen from tests/oracles/pcg64_oracle.py.
TEST(RngStream, MatchesReferenceSequence) {
  slq::RngStream a(1, 0);
  EXPECT_EQ(a.next_u64(), 8166798131594814449ULL);
  EXPECT_EQ(a.next_u64(), 501888437550476719ULL);
  slq::RngStream b(1, slq::StreamIds::key(3, slq::StreamIds::server(0)));
  EXPECT_EQ(b.next_u64(), 1020061342031024576ULL);
}

TEST(RngStream, UniformInUnitInterval) {
  slq::RngStream rng(3, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
