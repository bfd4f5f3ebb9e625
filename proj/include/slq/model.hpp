#pragma once

// Discrete-time parallel queue dynamics.
//
// One slot moves the queue vector by
//   q'[i] = max(q[i] + arrivals * 1{i == target} - services[i], 0)
// and records the unused service that the max() clipped away. Arrivals and
// service are applied simultaneously; there is no intra-slot ordering.
// Queue indices are zero-based throughout the library.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slq/errors.hpp"

namespace slq {

using JobCount = std::int64_t;
using QueueVector = std::vector<JobCount>;

struct SlotOutcome {
  JobCount arrivals_total = 0;
  std::size_t target = 0;
  std::vector<JobCount> services;
  std::vector<JobCount> unused;
  std::uint64_t messages_exchanged = 0;
};

// Per-server service law parameters. s_max bounds every server's per-slot service.
struct ServiceSpec {
  std::vector<double> mu;
  std::vector<double> sigma_mu_sq;
  JobCount s_max = 1;

  std::size_t size() const { return mu.size(); }
  double mu_sum() const { return std::accumulate(mu.begin(), mu.end(), 0.0); }
  double mu_max() const { return *std::max_element(mu.begin(), mu.end()); }
  double mu_min() const { return *std::min_element(mu.begin(), mu.end()); }
  double sigma_sq_sum() const {
    return std::accumulate(sigma_mu_sq.begin(), sigma_mu_sq.end(), 0.0);
  }
  double sigma_sq_max() const {
    return sigma_mu_sq.empty() ? 0.0 : *std::max_element(sigma_mu_sq.begin(), sigma_mu_sq.end());
  }

  void validate() const {
    if (mu.empty()) throw ConfigError("service spec: no servers");
    if (sigma_mu_sq.size() != mu.size())
      throw ConfigError("service spec: " + std::to_string(sigma_mu_sq.size()) +
                        " variances for " + std::to_string(mu.size()) + " servers");
    if (s_max < 1) throw ConfigError("service spec: s_max must be positive");
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!(mu[i] > 0.0) || mu[i] > static_cast<double>(s_max))
        throw ConfigError("service spec: mu[" + std::to_string(i) + "] outside (0, s_max]");
      const double cap = mu[i] * (static_cast<double>(s_max) - mu[i]);
      if (sigma_mu_sq[i] < 0.0 || sigma_mu_sq[i] > cap + 1e-12)
        throw ConfigError("service spec: variance of server " + std::to_string(i) +
                          " infeasible on {0..s_max}");
    }
  }
};

// Batch arrival law: E[A] = n_lambda, Var(A) = n_sigma_lambda_sq, A <= floor(n * a_max).
struct ArrivalSpec {
  double n_lambda = 0.0;
  double n_sigma_lambda_sq = 0.0;
  double a_max = 1.0;

  JobCount bound(std::size_t n) const {
    return static_cast<JobCount>(static_cast<double>(n) * a_max + 1e-9);
  }

  void validate(std::size_t n) const {
    if (!(n_lambda > 0.0)) throw ConfigError("arrival spec: mean must be positive");
    if (!(a_max > 0.0)) throw ConfigError("arrival spec: a_max must be positive");
    if (n_lambda >= static_cast<double>(n) * a_max)
      throw ConfigError("arrival spec: mean must be below n * a_max");
    const double b = static_cast<double>(bound(n));
    if (n_sigma_lambda_sq < 0.0 || n_sigma_lambda_sq > n_lambda * (b - n_lambda) + 1e-12)
      throw ConfigError("arrival spec: variance infeasible on {0..floor(n * a_max)}");
  }
};

inline JobCount total_jobs(std::span<const JobCount> q) {
  return std::accumulate(q.begin(), q.end(), JobCount{0});
}

// In-place slot update used by the simulator hot loop. Writes unused service
// into `unused` and returns the total unused service of the slot.
inline JobCount apply_slot(std::span<JobCount> q, JobCount arrivals, std::size_t target,
                           std::span<const JobCount> services, std::span<JobCount> unused) {
  JobCount unused_total = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const JobCount load = q[i] + (i == target ? arrivals : 0);
    const JobCount next = load - services[i];
    if (next >= 0) {
      q[i] = next;
      unused[i] = 0;
    } else {
      q[i] = 0;
      unused[i] = -next;
      unused_total -= next;
    }
  }
  return unused_total;
}

inline std::pair<QueueVector, SlotOutcome> step(const QueueVector& q, JobCount arrivals,
                                                std::size_t target,
                                                std::span<const JobCount> services) {
  if (services.size() != q.size())
    throw ConfigError("step: " + std::to_string(services.size()) + " services for " +
                      std::to_string(q.size()) + " queues");
  if (target >= q.size()) throw ConfigError("step: target index out of range");
  if (arrivals < 0) throw ConfigError("step: negative arrivals");
  for (JobCount s : services)
    if (s < 0) throw ConfigError("step: negative service");

  SlotOutcome out;
  out.arrivals_total = arrivals;
  out.target = target;
  out.services.assign(services.begin(), services.end());
  out.unused.assign(q.size(), 0);
  QueueVector next = q;
  apply_slot(next, arrivals, target, services, out.unused);
  return {std::move(next), std::move(out)};
}

}  // namespace slq
