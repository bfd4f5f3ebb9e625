#pragma once

// Closed-form stability region, skip thresholds, state-space-collapse
// constants and heavy-traffic bounds for k-SLQ-d.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "slq/errors.hpp"

namespace slq {

namespace detail {

inline void require_skip_range(std::size_t n, std::size_t d, const char* who) {
  if (n < 2 || d < 1 || d > n - 1)
    throw ConfigError(std::string(who) + ": d=" + std::to_string(d) + " outside [1, n-1] for n=" +
                      std::to_string(n));
}

inline void require_positive_rates(std::span<const double> mu, const char* who) {
  if (mu.empty()) throw ConfigError(std::string(who) + ": empty rate vector");
  for (double m : mu)
    if (!(m > 0.0)) throw ConfigError(std::string(who) + ": service rates must be positive");
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }
inline double max(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }
inline double min(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace detail

struct CapacityBound {
  double value = 0.0;
  std::size_t argmin_size = 0;
};

// min over |I| >= d+1 of (n-d)/(|I|-d) * sum_{l in I} mu_l. For a fixed |I| = m
// the minimising subset is the m slowest servers, so one ascending sort and a
// prefix sum cover every candidate. Ties in value keep the smallest m. The
// full set uses the input-order sum so a throughput-optimal d reports the same
// sum(mu) as every other caller, to the bit.
inline CapacityBound capacity_bound(std::span<const double> mu, std::size_t d) {
  const std::size_t n = mu.size();
  detail::require_skip_range(n, d, "capacity_bound");
  detail::require_positive_rates(mu, "capacity_bound");
  std::vector<double> sorted(mu.begin(), mu.end());
  std::sort(sorted.begin(), sorted.end());
  CapacityBound best{std::numeric_limits<double>::infinity(), 0};
  double prefix = 0.0;
  for (std::size_t m = 1; m <= n; ++m) {
    prefix += sorted[m - 1];
    if (m < d + 1) continue;
    const double subset_sum = m == n ? detail::sum(mu) : prefix;
    const double value = static_cast<double>(n - d) / static_cast<double>(m - d) * subset_sum;
    if (value < best.value) best = {value, m};
  }
  return best;
}

// Exhaustive evaluation over all subsets; exponential, kept as an oracle.
inline double capacity_bound_bruteforce(std::span<const double> mu, std::size_t d) {
  const std::size_t n = mu.size();
  if (n > 20) throw ConfigError("capacity_bound_bruteforce: n > 20 would enumerate 2^n subsets");
  detail::require_skip_range(n, d, "capacity_bound_bruteforce");
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size < d + 1) continue;
    double subset_sum = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      if (mask & (1u << l)) subset_sum += mu[l];
    best = std::min(best, static_cast<double>(n - d) / static_cast<double>(size - d) * subset_sum);
  }
  return best;
}

// Full-capacity condition: sum(mu) >= (n-d) * max(mu).
inline bool is_throughput_optimal(std::span<const double> mu, std::size_t d) {
  detail::require_skip_range(mu.size(), d, "is_throughput_optimal");
  const double total = detail::sum(mu);
  return total >= static_cast<double>(mu.size() - d) * detail::max(mu) - 1e-12 * total;
}

struct MinSkips {
  std::size_t d = 1;
  // Asymptotic fraction of servers that must be skipped, 1 - mean(mu)/max(mu).
  double skip_fraction = 0.0;
};

inline MinSkips min_skips(std::span<const double> mu) {
  detail::require_positive_rates(mu, "min_skips");
  const std::size_t n = mu.size();
  if (n < 2) throw ConfigError("min_skips: need at least two servers");
  const double mean = detail::sum(mu) / static_cast<double>(n);
  MinSkips out{n - 1, 1.0 - mean / detail::max(mu)};
  for (std::size_t d = 1; d < n; ++d)
    if (is_throughput_optimal(mu, d)) {
      out.d = d;
      break;
    }
  return out;
}

struct StabilityReport {
  double capacity_sum = 0.0;
  double theorem1_bound = 0.0;
  std::size_t argmin_size = 0;
  bool stable = false;
  bool throughput_optimal = false;
  std::size_t min_skips = 1;
  double epsilon = 0.0;
};

inline StabilityReport stability_report(std::span<const double> mu, std::size_t d, double n_lambda) {
  const CapacityBound cb = capacity_bound(mu, d);
  StabilityReport r;
  r.capacity_sum = detail::sum(mu);
  r.theorem1_bound = cb.value;
  r.argmin_size = cb.argmin_size;
  r.stable = n_lambda < cb.value;
  r.throughput_optimal = is_throughput_optimal(mu, d);
  r.min_skips = min_skips(mu).d;
  r.epsilon = r.capacity_sum - n_lambda;
  return r;
}

struct DeltaResult {
  double value = 0.0;
  // Sum(mu) = (n-d) max(mu) exactly: throughput optimal but the SSC and
  // heavy-traffic bounds are void.
  bool degenerate = false;
};

// Delta = min{mu_min, sum(mu)/(n-d) - mu_max} / 2. This is also the largest
// slack for which the collapse and heavy-traffic bounds apply.
inline DeltaResult delta(std::span<const double> mu, std::size_t d) {
  const std::size_t n = mu.size();
  detail::require_skip_range(n, d, "delta");
  detail::require_positive_rates(mu, "delta");
  const double total = detail::sum(mu);
  const double headroom = total / static_cast<double>(n - d) - detail::max(mu);
  const double tol = 1e-12 * std::max(1.0, total);
  if (headroom < -tol) {
    const double threshold = static_cast<double>(n) - total / detail::max(mu);
    throw PreconditionError("delta: skip threshold violated, need d > " +
                            std::to_string(threshold) + " but d=" + std::to_string(d));
  }
  if (headroom <= tol) return {0.0, true};
  return {std::min(detail::min(mu), headroom) / 2.0, false};
}

struct BoundsParams {
  std::size_t n = 0;
  std::size_t k = 1;
  std::size_t d = 1;
  std::vector<double> mu;
  double a_max = 0.0;
  double s_max = 0.0;
  double sigma_lambda_sq = 0.0;   // per-server: Var(A) / n
  double sigma_mu_max_sq = 0.0;   // max over servers of Var(S_i)
  double sigma_mu_sq_sum = 0.0;   // sum over servers of Var(S_i)
  double epsilon = 0.0;
};

struct BoundsReport {
  double delta = 0.0;
  double z = 0.0;
  double c1_prime = 0.0;
  double c2 = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double a = 0.0;
  double n2 = 0.0;
  double upper_rhs = 0.0;
  double lower_rhs = 0.0;
  double ssc_eps_threshold = 0.0;
  double denominator = 0.0;
};

inline double upper_bound_rhs(double epsilon, std::size_t n, std::size_t k, std::size_t d,
                              double sigma_lambda_sq_total, double sigma_mu_sq_sum, double a_max,
                              double s_max, double n2) {
  if (epsilon < 0.0) throw PreconditionError("upper_bound_rhs: negative slack");
  const double nn = static_cast<double>(n);
  const double cycle = static_cast<double>(k * (n - d));
  return (sigma_lambda_sq_total + sigma_mu_sq_sum) / (2.0 * nn) +
         epsilon * epsilon * cycle / (2.0 * nn) +
         epsilon * cycle * (2.0 * nn * a_max + s_max) / 2.0 +
         std::sqrt(epsilon) * std::sqrt(n2 * nn * s_max);
}

struct LowerBound {
  double value = 0.0;
  // The raw expression was non-positive and has been clamped to zero.
  bool vacuous = false;
};

// Universal lower bound on eps * E[average queue] for any dispatching policy.
inline LowerBound lower_bound_rhs(double epsilon, std::size_t n, double sigma_lambda_sq_total,
                                  double sigma_mu_sq_sum, double s_max) {
  if (!(epsilon > 0.0)) throw PreconditionError("lower_bound_rhs: slack must be positive");
  const double raw = (sigma_lambda_sq_total + sigma_mu_sq_sum + epsilon * epsilon - s_max * epsilon) /
                     (2.0 * static_cast<double>(n));
  if (raw <= 0.0) return {0.0, true};
  return {raw, false};
}

// Constant chain behind the perpendicular second-moment bound N2(n, k, d).
inline BoundsReport n2_bound(const BoundsParams& p) {
  const std::size_t n = p.n;
  if (p.mu.size() != n) throw ConfigError("n2_bound: rate vector does not have n entries");
  const DeltaResult dr = delta(p.mu, p.d);
  if (dr.degenerate)
    throw PreconditionError("n2_bound: Delta = 0 (boundary of the full-capacity condition)");
  if (!(p.epsilon > 0.0)) throw PreconditionError("n2_bound: slack must be positive");
  if (p.epsilon > dr.value)
    throw PreconditionError("n2_bound: slack " + std::to_string(p.epsilon) +
                            " exceeds Delta = " + std::to_string(dr.value));

  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(p.k);
  const double nd = static_cast<double>(n - p.d);
  const double dd = static_cast<double>(p.d);
  const double mu_max = detail::max(p.mu);
  const double mu_sum = detail::sum(p.mu);
  const double sq_n = std::sqrt(nn);
  const double e = std::numbers::e;
  const double eps = p.epsilon;
  const double sig_mu = p.sigma_mu_max_sq;
  const double sig_lam = p.sigma_lambda_sq;

  BoundsReport r;
  r.delta = dr.value;
  r.ssc_eps_threshold = dr.value;
  r.z = 2.0 * kk * nd * nn * (p.a_max + p.s_max);

  const double per_queue = kk * kk * nd * nd * mu_max * mu_max + kk * nd * sig_mu;
  const double with_skip = mu_sum - eps + nd * mu_max;
  r.c1_prime = 2.0 * kk * kk * (nn - 1.0) * nd * nd * mu_max * p.s_max + per_queue +
               (dd - 1.0) * per_queue +
               nd * (kk * kk * with_skip * with_skip + kk * nn * sig_lam + kk * nd * sig_mu) +
               nd * (kk * kk * (mu_sum - eps) * (mu_sum - eps) + kk * nn * sig_lam);
  r.c2 = 2.0 * kk * kk * nd * nd * nn * p.s_max * p.s_max;
  const double c = r.c1_prime + r.c2;

  const double drift = kk * nd * r.delta;  // k(n-d)Delta
  const double z2e = r.z * r.z * (e - 2.0);
  r.a = c * sq_n / drift;
  const double eps0 = drift / (2.0 * sq_n);
  r.eta = std::min({1.0 / r.z, drift / (4.0 * sq_n * z2e), drift / (c * sq_n)});
  r.rho = 1.0 - eps0 * r.eta + z2e * r.eta * r.eta;
  const double eta3 = r.eta * r.eta * r.eta;
  r.denominator = drift * eta3 - 2.0 * sq_n * z2e * eta3 * r.eta;
  if (!(r.denominator > 0.0))
    throw PreconditionError("n2_bound: non-positive denominator (numerical breakdown)");
  if (!(r.rho > 0.0 && r.rho < 1.0))
    throw PreconditionError("n2_bound: rho outside (0, 1)");
  r.n2 = 4.0 * sq_n * e * e / r.denominator;

  const double sigma_total = nn * sig_lam;
  r.upper_rhs = upper_bound_rhs(eps, n, p.k, p.d, sigma_total, p.sigma_mu_sq_sum, p.a_max,
                                p.s_max, r.n2);
  r.lower_rhs = lower_bound_rhs(eps, n, sigma_total, p.sigma_mu_sq_sum, p.s_max).value;
  return r;
}

struct MessageRates {
  double per_job = 0.0;
  double per_slot_2n = 0.0;
  double per_slot_n = 0.0;
};

// Three overhead conventions: 2 messages per job-batch-rate, 2n messages per
// cycle, and n per cycle (the convention that matches published tables).
inline MessageRates message_rates(double lambda_per_server, std::size_t k, std::size_t n,
                                  std::size_t d) {
  const double cycle = static_cast<double>(k * (n - d));
  const double nn = static_cast<double>(n);
  return {2.0 / (lambda_per_server * cycle), 2.0 * nn / cycle, nn / cycle};
}

inline double many_server_diagnostic(double epsilon, double k, double n) {
  return epsilon * k * k * std::pow(n, 11.0);
}

struct ManyServerPoint {
  double n = 0.0;
  double epsilon = 0.0;
  double k = 0.0;
  double diagnostic = 0.0;
};

struct ManyServerSweep {
  std::vector<ManyServerPoint> points;
  bool decreasing = true;
};

inline ManyServerSweep many_server_sweep(std::span<const ManyServerPoint> sequence) {
  ManyServerSweep out;
  for (ManyServerPoint p : sequence) {
    p.diagnostic = many_server_diagnostic(p.epsilon, p.k, p.n);
    if (!out.points.empty() && !(p.diagnostic < out.points.back().diagnostic))
      out.decreasing = false;
    out.points.push_back(p);
  }
  return out;
}

}  // namespace slq
