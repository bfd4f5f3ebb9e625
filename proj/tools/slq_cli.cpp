// Command-line front end for the k-SLQ-d simulator and bound calculator.
//
// Exit status: 0 success, 2 configuration refusal, 1 runtime error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slq/slq.hpp"

namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::string out;
  bool allow_unstable = false;
};

slq::SystemConfig load(const std::string& path, const GlobalFlags& flags) {
  slq::SystemConfig cfg = slq::load_config(path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.replications) cfg.replications = *flags.replications;
  if (flags.allow_unstable) cfg.allow_unstable = true;
  if (!flags.out.empty()) cfg.output = flags.out;
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  std::cout << text;
  if (!path.empty()) slq::write_text(text, path);
}

slq::BoundsParams bounds_params(const slq::SystemConfig& cfg) {
  slq::BoundsParams p;
  p.n = cfg.n;
  p.k = cfg.effective_k();
  p.d = cfg.effective_d();
  p.mu = cfg.service.mu;
  p.a_max = cfg.arrival.a_max;
  p.s_max = static_cast<double>(cfg.service.s_max);
  p.sigma_lambda_sq = cfg.arrival.n_sigma_lambda_sq / static_cast<double>(cfg.n);
  p.sigma_mu_max_sq = cfg.service.sigma_sq_max();
  p.sigma_mu_sq_sum = cfg.service.sigma_sq_sum();
  p.epsilon = cfg.epsilon();
  return p;
}

constexpr const char* kReportHeader =
    "theorem1_bound,stable,throughput_optimal,min_skips,epsilon,delta,n2,upper_rhs,lower_rhs";

struct ReportRow {
  double theorem1_bound = 0.0;
  bool stable = false;
  bool throughput_optimal = false;
  std::size_t min_skips = 1;
  double epsilon = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double n2 = std::numeric_limits<double>::quiet_NaN();
  double upper_rhs = std::numeric_limits<double>::quiet_NaN();
  double lower_rhs = std::numeric_limits<double>::quiet_NaN();
};

ReportRow stability_row(const slq::SystemConfig& cfg) {
  ReportRow row;
  const double n_lambda = cfg.arrival.n_lambda;
  row.epsilon = cfg.epsilon();
  row.min_skips = slq::min_skips(cfg.service.mu).d;
  row.theorem1_bound = slq::policy_capacity(cfg);
  row.stable = n_lambda < row.theorem1_bound;
  if (cfg.policy.samples()) {
    row.throughput_optimal = slq::is_throughput_optimal(cfg.service.mu, cfg.effective_d());
    try {
      row.delta = slq::delta(cfg.service.mu, cfg.effective_d()).value;
    } catch (const slq::PreconditionError&) {
    }
  } else {
    row.throughput_optimal = row.theorem1_bound >= cfg.service.mu_sum() * (1.0 - 1e-12);
  }
  if (row.epsilon > 0.0)
    row.lower_rhs = slq::lower_bound_rhs(row.epsilon, cfg.n, cfg.arrival.n_sigma_lambda_sq,
                                         cfg.service.sigma_sq_sum(), static_cast<double>(cfg.service.s_max))
                        .value;
  return row;
}

std::string format_report(const ReportRow& r) {
  using slq::format_number;
  return fmt::format("{},{},{},{},{},{},{},{},{}", format_number(r.theorem1_bound), r.stable, r.throughput_optimal,
                     r.min_skips, format_number(r.epsilon), format_number(r.delta), format_number(r.n2),
                     format_number(r.upper_rhs), format_number(r.lower_rhs));
}

int cmd_stability(const std::string& path, const GlobalFlags& flags) {
  const auto cfg = load(path, flags);
  cfg.validate();
  ReportRow row = stability_row(cfg);
  if (cfg.policy.samples() && row.epsilon > 0.0) {
    try {
      const auto b = slq::n2_bound(bounds_params(cfg));
      row.n2 = b.n2;
      row.upper_rhs = b.upper_rhs;
    } catch (const slq::PreconditionError&) {
    }
  }
  emit(fmt::format("{}\n{}\n", kReportHeader, format_report(row)), cfg.output);
  return 0;
}

int cmd_bounds(const std::string& path, const GlobalFlags& flags) {
  const auto cfg = load(path, flags);
  cfg.validate();
  if (!cfg.policy.samples()) throw slq::PreconditionError("bounds: round-robin has no collapse bounds");
  ReportRow row = stability_row(cfg);
  const auto b = slq::n2_bound(bounds_params(cfg));
  row.delta = b.delta;
  row.n2 = b.n2;
  row.upper_rhs = b.upper_rhs;
  row.lower_rhs = b.lower_rhs;
  using slq::format_number;
  emit(fmt::format("{},z,c1_prime,c2,eta,rho,a,ssc_eps_threshold\n{},{},{},{},{},{},{},{}\n", kReportHeader,
                   format_report(row), format_number(b.z), format_number(b.c1_prime), format_number(b.c2),
                   format_number(b.eta), format_number(b.rho), format_number(b.a),
                   format_number(b.ssc_eps_threshold)),
       cfg.output);
  return 0;
}

int cmd_simulate(const std::string& path, const GlobalFlags& flags) {
  const auto cfg = load(path, flags);
  emit(slq::results_to_csv({slq::run_experiment(cfg)}), cfg.output);
  return 0;
}

int cmd_sweep(const std::string& path, const std::vector<double>& eps, const GlobalFlags& flags) {
  const auto cfg = load(path, flags);
  const auto rows = slq::sweep_heavy_traffic(cfg, eps);
  for (const auto& row : rows)
    if (!row.admissible) std::cerr << "warning: eps=" << row.epsilon << " " << row.note << "\n";
  emit(slq::sweep_to_csv(rows), cfg.output);
  return 0;
}

int cmd_table1(double scale, const GlobalFlags& flags) {
  auto configs = slq::table1_preset(scale, flags.seed.value_or(1));
  std::vector<slq::ExperimentResult> results;
  for (auto& cfg : configs) {
    if (flags.replications) cfg.replications = *flags.replications;
    std::cerr << "running " << cfg.label() << " n=" << cfg.n << " (" << cfg.horizon_slots << " slots)\n";
    results.push_back(slq::run_experiment(cfg));
  }
  emit(slq::results_to_csv(results), flags.out);
  return 0;
}

int cmd_unstable_demo(const std::string& path, const GlobalFlags& flags) {
  auto cfg = load(path, flags);
  cfg.allow_unstable = true;
  const auto rep = slq::instability_demo(cfg);
  using slq::format_number;
  emit(fmt::format("n_lambda,theorem1_bound,beyond_bound,slope,slope_ci_low,slope_ci_high\n{},{},{},{},{},{}\n",
                   format_number(rep.n_lambda), format_number(rep.theorem1_bound), rep.beyond_bound,
                   format_number(rep.slope), format_number(rep.lower()), format_number(rep.upper())),
       cfg.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-SLQ-d parallel-queue simulator and heavy-traffic bound calculator"};
  app.require_subcommand(1);
  GlobalFlags flags;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the configured seed");
  auto* rep_opt = app.add_option("--replications", replications, "Override the replication count");
  app.add_option("--out", flags.out, "Also write the output table to this path");
  app.add_flag("--allow-unstable", flags.allow_unstable, "Simulate configurations outside the stability region");
  app.fallthrough();

  std::string config;
  std::vector<double> eps;
  double scale = 1.0;

  auto* simulate = app.add_subcommand("simulate", "Run one experiment and print a result row");
  simulate->add_option("config", config, "Config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Heavy-traffic sweep over slack values");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("--eps", eps, "Slack values")->required()->delimiter(',');
  auto* stability = app.add_subcommand("stability", "Stability region report");
  stability->add_option("config", config, "Config file")->required();
  auto* bounds = app.add_subcommand("bounds", "State-space-collapse and heavy-traffic bounds");
  bounds->add_option("config", config, "Config file")->required();
  auto* table1 = app.add_subcommand("table1", "Homogeneous round-robin / SLQ / repeated-JSQ comparison");
  table1->add_option("--scale", scale, "Horizon multiplier relative to 2e8 slots");
  auto* unstable = app.add_subcommand("unstable-demo", "Growth rate of the total queue");
  unstable->add_option("config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (*seed_opt) flags.seed = seed;
  if (*rep_opt) flags.replications = replications;

  try {
    if (*simulate) return cmd_simulate(config, flags);
    if (*sweep) return cmd_sweep(config, eps, flags);
    if (*stability) return cmd_stability(config, flags);
    if (*bounds) return cmd_bounds(config, flags);
    if (*table1) return cmd_table1(scale, flags);
    if (*unstable) return cmd_unstable_demo(config, flags);
  } catch (const slq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const slq::RefusalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const slq::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const slq::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
