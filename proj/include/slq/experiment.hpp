#pragma once

// Experiment orchestration: trajectories, replication fan-out, heavy-traffic
// sweeps, the instability demonstration and the published-table preset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "slq/analysis.hpp"
#include "slq/config.hpp"
#include "slq/errors.hpp"
#include "slq/metrics.hpp"
#include "slq/model.hpp"
#include "slq/policy.hpp"
#include "slq/stochastic.hpp"

namespace slq {

// Runs fn(0..count-1) on up to `threads` workers; results keep index order.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<R> out;
  out.reserve(count);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
    return out;
  }
  for (std::size_t start = 0; start < count; start += threads) {
    std::vector<std::future<R>> wave;
    for (std::size_t i = start; i < std::min(count, start + threads); ++i)
      wave.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : wave) out.push_back(f.get());
  }
  return out;
}

struct Laws {
  BoundedDiscreteDist arrivals;
  std::vector<BoundedDiscreteDist> services;

  double arrival_variance() const { return arrivals.variance(); }
  double service_variance_sum() const {
    double s = 0.0;
    for (const auto& d : services) s += d.variance();
    return s;
  }
  double service_variance_max() const {
    double m = 0.0;
    for (const auto& d : services) m = std::max(m, d.variance());
    return m;
  }
};

inline Laws build_laws(const SystemConfig& cfg) {
  std::vector<BoundedDiscreteDist> services;
  services.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i)
    services.push_back(make_bounded_discrete(cfg.service.mu[i], cfg.service.sigma_mu_sq[i], cfg.service.s_max));
  return {make_bounded_discrete(cfg.arrival.n_lambda, cfg.arrival.n_sigma_lambda_sq, cfg.arrival.bound(cfg.n)),
          std::move(services)};
}

// Stability threshold on n*lambda for the configured policy. Round-robin is
// the d = 0 case of the subset formula, n * min(mu).
inline double policy_capacity(const SystemConfig& cfg) {
  if (!cfg.policy.samples()) return static_cast<double>(cfg.n) * cfg.service.mu_min();
  return capacity_bound(cfg.service.mu, cfg.effective_d()).value;
}

// Automatic burn-in: 20 relaxation times, each estimated as E[avg queue] / eps
// with E[avg queue] taken from the single-server heavy-traffic constant.
inline std::uint64_t resolve_warmup(const SystemConfig& cfg) {
  std::uint64_t slots = 0;
  if (cfg.warmup_slots) {
    slots = *cfg.warmup_slots;
  } else {
    const double eps = cfg.epsilon();
    if (eps > 0.0) {
      const double n = static_cast<double>(cfg.n);
      const double est_queue = (cfg.arrival.n_sigma_lambda_sq + cfg.service.sigma_sq_sum()) / (2.0 * n * eps);
      slots = static_cast<std::uint64_t>(std::ceil(20.0 * est_queue / eps));
    }
  }
  return round_to_cycles(slots, cfg.cycle());
}

// Within-batch least-squares sums for a total-jobs-versus-time slope.
struct OlsSums {
  double count = 0.0;
  double t = 0.0;
  double y = 0.0;
  double tt = 0.0;
  double ty = 0.0;

  void add(double time, double value) {
    count += 1.0;
    t += time;
    y += value;
    tt += time * time;
    ty += time * value;
  }

  double slope() const {
    const double sxx = tt - t * t / count;
    return sxx > 0.0 ? (ty - t * y / count) / sxx : 0.0;
  }
};

struct TrajectoryStats {
  RunningStats stats;
  std::vector<OlsSums> ols;
  std::uint64_t messages = 0;
  std::uint64_t cycles = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t services = 0;
  std::uint64_t unused = 0;
  JobCount initial_total = 0;
  JobCount final_total = 0;
};

// One trajectory from the empty state. Measurements use the queue vector at
// the start of each slot; slots before `warmup` are simulated but not recorded.
inline TrajectoryStats simulate_trajectory(const SystemConfig& cfg, const Laws& laws, std::uint64_t replication,
                                           std::uint64_t warmup) {
  const std::size_t n = cfg.n;
  const std::uint64_t horizon = cfg.horizon_slots;
  const std::size_t batches = cfg.batches;

  RngStream arrival_rng(cfg.seed, StreamIds::key(replication, StreamIds::arrivals));
  std::vector<RngStream> service_rng;
  service_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    service_rng.emplace_back(cfg.seed, StreamIds::key(replication, StreamIds::server(i)));
  Dispatcher dispatcher(cfg.policy, n, RngStream(cfg.seed, StreamIds::key(replication, StreamIds::tie_break)));

  TrajectoryStats out;
  out.stats = RunningStats(static_cast<std::size_t>(warmup), batches);
  out.ols.assign(batches, OlsSums{});

  QueueVector q(n, 0);
  std::vector<JobCount> services(n, 0);
  std::vector<JobCount> unused(n, 0);
  const double nn = static_cast<double>(n);
  const std::uint64_t total_slots = warmup + horizon;
  // Batch b covers rel in [ceil(b*H/B), ceil((b+1)*H/B)), i.e. floor(rel*B/H) == b.
  std::size_t batch = 0;
  auto batch_end = [&](std::size_t b) { return ((b + 1) * horizon + batches - 1) / batches; };
  std::uint64_t next_batch_at = batch_end(0);

  for (std::uint64_t t = 0; t < total_slots; ++t) {
    const Dispatcher::Decision decision = dispatcher.dispatch(q);
    const JobCount arrivals = laws.arrivals.sample(arrival_rng);
    JobCount service_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      services[i] = laws.services[i].sample(service_rng[i]);
      service_total += services[i];
    }

    if (t >= warmup) {
      const std::uint64_t rel = t - warmup;
      if (rel == next_batch_at) next_batch_at = batch_end(++batch);
      JobCount total = 0;
      __int128 sumsq = 0;
      for (JobCount v : q) {
        total += v;
        sumsq += static_cast<__int128>(v) * v;
      }
      const double perp =
          static_cast<double>(static_cast<__int128>(n) * sumsq - static_cast<__int128>(total) * total) / nn;
      const double avg = static_cast<double>(total) / nn;
      RunningStats& s = out.stats;
      s.avg_queue.add(batch, avg);
      s.cross_stdev.add(batch, std::sqrt(perp / nn));
      s.perp_sq_all.add(batch, perp);
      s.avg_queue_sum += avg;
      s.avg_queue_sumsq += avg * avg;
      ++s.slots;
      if (decision.cycle_start) {
        s.perp_sq_boundary.add(batch, perp);
        s.l1_boundary.add(batch, static_cast<double>(total));
        ++out.cycles;
      }
      s.messages.add(batch, static_cast<double>(decision.messages));
      out.messages += decision.messages;
      out.ols[batch].add(static_cast<double>(rel), static_cast<double>(total));
      if (rel == 0) out.initial_total = total;
      out.arrivals += static_cast<std::uint64_t>(arrivals);
      out.services += static_cast<std::uint64_t>(service_total);
    }

    const JobCount unused_total = apply_slot(q, arrivals, decision.target, services, unused);
    if (t >= warmup) {
      out.stats.unused.add(batch, static_cast<double>(unused_total));
      out.unused += static_cast<std::uint64_t>(unused_total);
    }
  }
  out.final_total = total_jobs(q);
  return out;
}

struct ExperimentResult {
  std::string policy;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t d = 0;
  double epsilon = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t warmup = 0;
  std::size_t replications = 0;

  Estimate avg_queue;
  double cross_stdev = 0.0;
  double temporal_stdev = 0.0;
  Estimate perp_sq;          // cycle boundaries
  double perp_sq_all = 0.0;  // every slot
  Estimate l1_boundary;
  double l1_mean = 0.0;
  double messages_per_slot = 0.0;
  double unused_per_slot = 0.0;
  MessageRates rates;

  double eps_x_avgq = 0.0;
  double lower_rhs = std::numeric_limits<double>::quiet_NaN();
  double upper_rhs = std::numeric_limits<double>::quiet_NaN();
  bool above_lower = false;
  std::optional<bool> below_upper;  // empty when the upper bound does not apply
  double collapse_ratio = std::numeric_limits<double>::quiet_NaN();

  double arrival_variance = 0.0;
  double service_variance_sum = 0.0;
};

namespace detail {

inline std::vector<double> pooled_means(const std::vector<TrajectoryStats>& runs,
                                        BatchAccumulator RunningStats::*field) {
  std::vector<double> out;
  for (const auto& r : runs) {
    const auto m = (r.stats.*field).means();
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

inline double pooled_overall(const std::vector<TrajectoryStats>& runs, BatchAccumulator RunningStats::*field) {
  double s = 0.0;
  for (const auto& r : runs) s += (r.stats.*field).overall_mean();
  return s / static_cast<double>(runs.size());
}

inline Estimate pooled_estimate(const std::vector<TrajectoryStats>& runs, BatchAccumulator RunningStats::*field) {
  const auto means = pooled_means(runs, field);
  if (means.size() < 2) return {pooled_overall(runs, field), std::numeric_limits<double>::quiet_NaN()};
  return estimate_from_batches(means);
}

inline void require_stable(const SystemConfig& cfg) {
  const double bound = policy_capacity(cfg);
  if (cfg.arrival.n_lambda >= bound && !cfg.allow_unstable)
    throw RefusalError("refusing unstable configuration: n*lambda = " + std::to_string(cfg.arrival.n_lambda) +
                       " >= theorem1_bound = " + std::to_string(bound) + " (set allow_unstable to override)");
}

}  // namespace detail

inline std::vector<TrajectoryStats> run_replications(const SystemConfig& cfg, const Laws& laws,
                                                     std::uint64_t warmup) {
  return parallel_map(cfg.replications, cfg.threads,
                      [&](std::size_t r) { return simulate_trajectory(cfg, laws, r, warmup); });
}

inline ExperimentResult summarize(const SystemConfig& cfg, const Laws& laws, std::uint64_t warmup,
                                  const std::vector<TrajectoryStats>& runs) {
  ExperimentResult r;
  r.policy = cfg.label();
  r.n = cfg.n;
  r.k = cfg.effective_k();
  r.d = cfg.effective_d();
  r.epsilon = cfg.epsilon();
  r.horizon = cfg.horizon_slots;
  r.warmup = warmup;
  r.replications = runs.size();

  r.avg_queue = detail::pooled_estimate(runs, &RunningStats::avg_queue);
  r.cross_stdev = detail::pooled_overall(runs, &RunningStats::cross_stdev);
  r.perp_sq = detail::pooled_estimate(runs, &RunningStats::perp_sq_boundary);
  r.perp_sq_all = detail::pooled_overall(runs, &RunningStats::perp_sq_all);
  r.l1_boundary = detail::pooled_estimate(runs, &RunningStats::l1_boundary);
  r.l1_mean = r.avg_queue.mean * static_cast<double>(cfg.n);
  r.messages_per_slot = detail::pooled_overall(runs, &RunningStats::messages);
  r.unused_per_slot = detail::pooled_overall(runs, &RunningStats::unused);

  double sum = 0.0, sumsq = 0.0, slots = 0.0;
  for (const auto& t : runs) {
    sum += t.stats.avg_queue_sum;
    sumsq += t.stats.avg_queue_sumsq;
    slots += static_cast<double>(t.stats.slots);
  }
  if (slots > 1.0) {
    const double m = sum / slots;
    r.temporal_stdev = std::sqrt(std::max(0.0, sumsq / slots - m * m));
  }

  if (cfg.policy.samples())
    r.rates = message_rates(cfg.arrival.n_lambda / static_cast<double>(cfg.n), r.k, cfg.n, r.d);

  r.arrival_variance = laws.arrival_variance();
  r.service_variance_sum = laws.service_variance_sum();
  r.eps_x_avgq = r.epsilon * r.avg_queue.mean;
  if (r.epsilon > 0.0) {
    r.lower_rhs = lower_bound_rhs(r.epsilon, cfg.n, r.arrival_variance, r.service_variance_sum,
                                  static_cast<double>(cfg.service.s_max))
                      .value;
    r.above_lower = r.eps_x_avgq >= r.lower_rhs;
  }
  if (cfg.policy.samples() && r.epsilon > 0.0) {
    BoundsParams p;
    p.n = cfg.n;
    p.k = r.k;
    p.d = r.d;
    p.mu = cfg.service.mu;
    p.a_max = cfg.arrival.a_max;
    p.s_max = static_cast<double>(cfg.service.s_max);
    p.sigma_lambda_sq = r.arrival_variance / static_cast<double>(cfg.n);
    p.sigma_mu_max_sq = laws.service_variance_max();
    p.sigma_mu_sq_sum = r.service_variance_sum;
    p.epsilon = r.epsilon;
    try {
      r.upper_rhs = n2_bound(p).upper_rhs;
      r.below_upper = r.eps_x_avgq <= r.upper_rhs;
    } catch (const PreconditionError&) {
      // Outside the collapse regime; no upper bound is reported.
    }
  }
  if (r.l1_boundary.mean > 0.0) r.collapse_ratio = collapse_ratio(r.perp_sq.mean, r.l1_boundary.mean, cfg.n);
  return r;
}

inline ExperimentResult run_experiment(const SystemConfig& cfg) {
  cfg.validate();
  detail::require_stable(cfg);
  const Laws laws = build_laws(cfg);
  const std::uint64_t warmup = resolve_warmup(cfg);
  return summarize(cfg, laws, warmup, run_replications(cfg, laws, warmup));
}

struct SweepRow {
  double epsilon = 0.0;
  bool admissible = false;
  std::string note;
  ExperimentResult result;
};

// One experiment per slack value with n*lambda = sum(mu) - eps. Rows are
// returned by decreasing eps; values above Delta produce a warning row.
inline std::vector<SweepRow> sweep_heavy_traffic(const SystemConfig& base, std::vector<double> eps_list) {
  base.validate();
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  double delta_value = std::numeric_limits<double>::infinity();
  std::string delta_problem;
  if (base.policy.samples()) {
    try {
      const DeltaResult dr = delta(base.service.mu, base.effective_d());
      delta_value = dr.value;
      if (dr.degenerate) delta_problem = "Delta = 0";
    } catch (const PreconditionError& e) {
      delta_problem = e.what();
    }
  } else {
    delta_problem = "round-robin has no collapse regime";
  }

  std::vector<SweepRow> rows(eps_list.size());
  std::vector<std::size_t> runnable;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    rows[i].epsilon = eps_list[i];
    if (!delta_problem.empty()) {
      rows[i].note = "skipped: " + delta_problem;
    } else if (!(eps_list[i] > 0.0)) {
      rows[i].note = "skipped: eps must be positive";
    } else if (eps_list[i] > delta_value) {
      rows[i].note = "skipped: eps exceeds Delta = " + std::to_string(delta_value);
    } else {
      rows[i].admissible = true;
      runnable.push_back(i);
    }
  }

  const auto results = parallel_map(runnable.size(), base.threads, [&](std::size_t j) {
    SystemConfig cfg = base;
    cfg.threads = 1;
    cfg.arrival.n_lambda = base.service.mu_sum() - eps_list[runnable[j]];
    return run_experiment(cfg);
  });
  for (std::size_t j = 0; j < runnable.size(); ++j) rows[runnable[j]].result = results[j];
  return rows;
}

struct SlopeReport {
  double slope = 0.0;
  double half_width = 0.0;
  double theorem1_bound = 0.0;
  double n_lambda = 0.0;
  bool beyond_bound = false;
  std::size_t batches = 0;

  double lower() const { return slope - half_width; }
  double upper() const { return slope + half_width; }
};

// Least-squares growth rate of the total number of jobs, estimated within
// each batch and pooled across batches and replications for the interval.
inline SlopeReport instability_demo(const SystemConfig& cfg) {
  cfg.validate();
  const Laws laws = build_laws(cfg);
  const std::uint64_t warmup = resolve_warmup(cfg);
  const auto runs = run_replications(cfg, laws, warmup);
  std::vector<double> slopes;
  for (const auto& r : runs)
    for (const auto& o : r.ols)
      if (o.count > 1.0) slopes.push_back(o.slope());
  const Estimate e = estimate_from_batches(slopes);
  SlopeReport rep;
  rep.slope = e.mean;
  rep.half_width = e.half_width;
  rep.theorem1_bound = policy_capacity(cfg);
  rep.n_lambda = cfg.arrival.n_lambda;
  rep.beyond_bound = cfg.arrival.n_lambda >= rep.theorem1_bound;
  rep.batches = slopes.size();
  return rep;
}

// Seven-row homogeneous comparison: round-robin at n = 10, then 1-SLQ-1 and
// repeated JSQ at n = 10, 20, 50. Service law {1, 3} equiprobable (mean 2,
// variance 1); arrivals with slack 0.001 per server, Var(A) = 25, A_max = 3.
inline std::vector<SystemConfig> table1_preset(double scale = 1.0, std::uint64_t seed = 1) {
  struct Row {
    std::size_t n;
    PolicyKind policy;
  };
  const Row rows[] = {
      {10, PolicyKind::round_robin()},  {10, PolicyKind::slq(1, 1)}, {10, PolicyKind::repeated_jsq(1)},
      {20, PolicyKind::slq(1, 1)},      {20, PolicyKind::repeated_jsq(1)},
      {50, PolicyKind::slq(1, 1)},      {50, PolicyKind::repeated_jsq(1)},
  };
  std::vector<SystemConfig> out;
  for (const Row& row : rows) {
    SystemConfig cfg;
    cfg.n = row.n;
    cfg.policy = row.policy;
    cfg.arrival = {static_cast<double>(row.n) * 1.999, 25.0, 3.0};
    cfg.service.mu.assign(row.n, 2.0);
    cfg.service.sigma_mu_sq.assign(row.n, 1.0);
    cfg.service.s_max = 3;
    const auto slots = static_cast<std::uint64_t>(std::llround(2e8 * scale));
    cfg.horizon_slots = round_to_cycles(std::max<std::uint64_t>(slots, 10 * cfg.batches), cfg.cycle());
    cfg.warmup_slots = round_to_cycles(cfg.horizon_slots / 10, cfg.cycle());
    cfg.seed = seed;
    out.push_back(std::move(cfg));
  }
  return out;
}

}  // namespace slq
