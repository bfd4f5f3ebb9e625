#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slq/slq.hpp"

namespace {

constexpr const char* kSmallConfig = R"(
# four homogeneous servers
n = 4
policy = slq
k = 2
d = 1
arrival_mean = 7.0
arrival_var = 4
a_max = 3
service_mu = 2
service_var = 1
s_max = 3
horizon = 60000
warmup = 600
batches = 20
seed = 42
)";

slq::SystemConfig small() { return slq::parse_config(kSmallConfig); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST(Config, ParsesFlatKeyValues) {
  const auto cfg = small();
  EXPECT_EQ(cfg.n, 4u);
  EXPECT_EQ(cfg.policy.family, slq::PolicyFamily::slq);
  EXPECT_EQ(cfg.effective_k(), 2u);
  EXPECT_EQ(cfg.service.mu, std::vector<double>(4, 2.0));
  EXPECT_EQ(cfg.horizon_slots, 60000u);
  ASSERT_TRUE(cfg.warmup_slots.has_value());
  EXPECT_EQ(*cfg.warmup_slots, 600u);
  EXPECT_DOUBLE_EQ(cfg.epsilon(), 1.0);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ListsAndScientificNotation) {
  const auto cfg = slq::parse_config(
      "n=4\npolicy=slq\nd=2\narrival_mean=5\narrival_var=4\na_max=3\n"
      "service_mu=3,1,1,1\nservice_var=1, 0.5,0.5,0.5\ns_max=4\nhorizon=2e3\nwarmup=auto\n");
  EXPECT_EQ(cfg.service.mu, (std::vector<double>{3, 1, 1, 1}));
  EXPECT_EQ(cfg.horizon_slots, 2000u);
  EXPECT_FALSE(cfg.warmup_slots.has_value());
}

TEST(Config, Errors) {
  EXPECT_THROW(slq::parse_config("n=4\n"), slq::ConfigError);
  EXPECT_THROW(slq::parse_config(std::string(kSmallConfig) + "bogus = 1\n"), slq::ConfigError);
  EXPECT_THROW(slq::parse_config(std::string(kSmallConfig) + "n = 5\n"), slq::ConfigError);
  auto cfg = small();
  cfg.horizon_slots = 60001;
  EXPECT_THROW(cfg.validate(), slq::ConfigError);
  cfg = small();
  cfg.service.mu = {2, 2, 2};
  cfg.service.sigma_mu_sq = {1, 1, 1};
  EXPECT_THROW(cfg.validate(), slq::ConfigError);
  cfg = small();
  cfg.service.mu = {3, 1, 1, 1};
  cfg.require_throughput_optimal = true;
  EXPECT_THROW(cfg.validate(), slq::ConfigError);
}

TEST(RunExperiment, RefusesUnstableWithoutOverride) {
  auto cfg = small();
  cfg.arrival.n_lambda = 8.5;
  cfg.arrival.a_max = 3;
  EXPECT_THROW(slq::run_experiment(cfg), slq::RefusalError);
  try {
    slq::run_experiment(cfg);
  } catch (const slq::RefusalError& e) {
    EXPECT_NE(std::string(e.what()).find("theorem1_bound"), std::string::npos);
  }
}

TEST(RunExperiment, DeterministicDrain) {
  // Integer means, zero variance: 7 arrivals per slot against 8 units of service.
  auto cfg = small();
  cfg.arrival.n_sigma_lambda_sq = 0.0;
  cfg.service.sigma_mu_sq.assign(4, 0.0);
  const auto r = slq::run_experiment(cfg);
  // One cycle carries at most k(n-d) batches of 7 jobs.
  EXPECT_LE(r.avg_queue.mean, 2.0 * 3.0 * 7.0);
  // Periodic trajectory: batch means differ only by the phase at batch edges.
  EXPECT_LT(r.avg_queue.half_width, 0.05);
  EXPECT_EQ(r.arrival_variance, 0.0);
}

TEST(RunExperiment, MessageAccountingPerCycle) {
  const auto cfg = small();
  const auto laws = slq::build_laws(cfg);
  const auto warmup = slq::resolve_warmup(cfg);
  const auto t = slq::simulate_trajectory(cfg, laws, 0, warmup);
  EXPECT_EQ(t.cycles, cfg.horizon_slots / cfg.cycle());
  EXPECT_EQ(t.messages, 2 * cfg.n * t.cycles);
  EXPECT_EQ(static_cast<slq::JobCount>(t.initial_total + t.arrivals - t.services + t.unused), t.final_total);
}

TEST(RunExperiment, ResultConsistency) {
  const auto r = slq::run_experiment(small());
  EXPECT_DOUBLE_EQ(r.eps_x_avgq, r.epsilon * r.avg_queue.mean);
  EXPECT_NEAR(r.messages_per_slot, r.rates.per_slot_2n, 1e-12);
  EXPECT_EQ(r.policy, "2-SLQ-1");
  EXPECT_GT(r.avg_queue.mean, 0.0);
  EXPECT_TRUE(r.above_lower);
}

TEST(RunExperiment, ReplicationsAreDistinctAndOrdered) {
  auto cfg = small();
  cfg.replications = 3;
  cfg.threads = 3;
  const auto laws = slq::build_laws(cfg);
  const auto runs = slq::run_replications(cfg, laws, 600);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_NE(runs[0].stats.avg_queue_sum, runs[1].stats.avg_queue_sum);
  const auto again = slq::simulate_trajectory(cfg, laws, 1, 600);
  EXPECT_EQ(again.stats.avg_queue_sum, runs[1].stats.avg_queue_sum);
}

TEST(RunExperiment, CommonRandomNumbersAcrossPolicies) {
  auto a = small();
  auto b = small();
  b.policy = slq::PolicyKind::round_robin(2);
  b.horizon_slots = 60000;
  const auto laws = slq::build_laws(a);
  const auto ta = slq::simulate_trajectory(a, laws, 0, 600);
  const auto tb = slq::simulate_trajectory(b, laws, 0, 600);
  EXPECT_EQ(ta.arrivals, tb.arrivals);
  EXPECT_EQ(ta.services, tb.services);
}

TEST(Csv, HeaderOnlyAndOneRow) {
  EXPECT_EQ(slq::results_to_csv({}), std::string(slq::kResultHeader) + "\n");
  const auto text = slq::results_to_csv({slq::run_experiment(small())});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Csv, RoundTripNineSignificantDigits) {
  auto cfg = small();
  std::vector<slq::ExperimentResult> results;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.seed = seed;
    results.push_back(slq::run_experiment(cfg));
  }
  const auto parsed = slq::parse_csv(slq::results_to_csv(results));
  ASSERT_EQ(parsed.size(), results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto expected = slq::to_csv_row(results[i]);
    EXPECT_EQ(parsed[i].policy, expected.policy);
    EXPECT_EQ(parsed[i].n, expected.n);
    for (std::size_t j = 0; j < expected.values.size(); ++j) {
      const double want = expected.values[j];
      if (std::isnan(want)) {
        EXPECT_TRUE(std::isnan(parsed[i].values[j]));
      } else {
        EXPECT_NEAR(parsed[i].values[j], want, 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Csv, ByteIdenticalForSameSeed) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto p1 = (dir / "slq_det_1.csv").string();
  const auto p2 = (dir / "slq_det_2.csv").string();
  slq::write_csv({slq::run_experiment(small())}, p1);
  slq::write_csv({slq::run_experiment(small())}, p2);
  EXPECT_EQ(read_file(p1), read_file(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  EXPECT_THROW(slq::write_csv({}, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST(Sweep, SortedAndWarnsAboveDelta) {
  auto cfg = small();
  cfg.horizon_slots = 21000;
  cfg.warmup_slots = 2004;
  // Delta = min{2, 8/3 - 2}/2 = 1/3.
  const auto rows = slq::sweep_heavy_traffic(cfg, {0.2, 0.5, 0.3});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].epsilon, 0.5);
  EXPECT_FALSE(rows[0].admissible);
  EXPECT_TRUE(rows[1].admissible);
  EXPECT_TRUE(rows[2].admissible);
  EXPECT_NEAR(rows[2].result.epsilon, 0.2, 1e-12);
  EXPECT_FALSE(std::isnan(rows[2].result.upper_rhs));
  const auto csv = slq::sweep_to_csv(rows);
  EXPECT_NE(csv.find("warning"), std::string::npos);
}

TEST(Table1Preset, SevenRows) {
  const auto rows = slq::table1_preset(0.001);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].label(), "Round-Robin");
  EXPECT_EQ(rows[4].label(), "19-SLQ-19");
  EXPECT_EQ(rows[4].effective_k(), 19u);
  EXPECT_EQ(rows[4].effective_d(), 19u);
  for (const auto& cfg : rows) {
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_NEAR(cfg.epsilon(), 0.001 * static_cast<double>(cfg.n), 1e-9);
    EXPECT_EQ(cfg.arrival.bound(cfg.n), static_cast<slq::JobCount>(3 * cfg.n));
  }
  EXPECT_NEAR(rows[6].arrival.n_lambda, 99.95, 1e-9);
}

TEST(InstabilityDemo, OverloadSlope) {
  auto cfg = small();
  cfg.policy = slq::PolicyKind::slq(1, 1);
  cfg.arrival.n_lambda = 8.4;  // 1.05 * sum(mu)
  cfg.arrival.n_sigma_lambda_sq = 4.0;
  cfg.allow_unstable = true;
  cfg.warmup_slots = 0;
  cfg.horizon_slots = 300000;
  const auto rep = slq::instability_demo(cfg);
  EXPECT_TRUE(rep.beyond_bound);
  EXPECT_GT(rep.lower(), 0.0);
  EXPECT_NEAR(rep.slope, 0.4, 0.05);
}
