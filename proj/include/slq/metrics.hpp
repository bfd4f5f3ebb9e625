#pragma once

// Collapse projections and steady-state estimators.

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slq/errors.hpp"
#include "slq/model.hpp"

namespace slq {

// ||Q_perp||_2^2 = sum_l (q_l - mean(q))^2.
inline double perp_norm_sq(std::span<const JobCount> q) {
  if (q.empty()) return 0.0;
  const double mean = static_cast<double>(total_jobs(q)) / static_cast<double>(q.size());
  double acc = 0.0;
  for (JobCount v : q) {
    const double dev = static_cast<double>(v) - mean;
    acc += dev * dev;
  }
  return acc;
}

// ||Q_par||_2^2 = ||Q||_1^2 / n.
inline double parallel_norm_sq(std::span<const JobCount> q) {
  if (q.empty()) return 0.0;
  const double total = static_cast<double>(total_jobs(q));
  return total * total / static_cast<double>(q.size());
}

struct SscSnapshot {
  double parallel_norm_sq = 0.0;
  double perp_norm_sq = 0.0;
  JobCount l1_total = 0;
  bool sampled_at_cycle_boundary = false;
};

inline SscSnapshot ssc_snapshot(std::span<const JobCount> q, bool at_cycle_boundary) {
  return {parallel_norm_sq(q), perp_norm_sq(q), total_jobs(q), at_cycle_boundary};
}

// sqrt(n E||Q_perp||^2) / E||Q||_1, an upper bound on E||Q_perp||_1 / E||Q||_1.
inline double collapse_ratio(double e_perp_norm_sq, double e_l1, std::size_t n) {
  if (!(e_l1 > 0.0)) throw PreconditionError("collapse_ratio: E||Q||_1 must be positive");
  return std::sqrt(static_cast<double>(n) * e_perp_norm_sq) / e_l1;
}

inline double student_t_975(std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;
};

// 95% confidence interval from already-formed batch means.
inline Estimate estimate_from_batches(std::span<const double> batch_means) {
  const std::size_t b = batch_means.size();
  if (b < 2) throw PreconditionError("batch means: need at least two batches");
  double mean = 0.0;
  for (double x : batch_means) mean += x;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double x : batch_means) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(b - 1));
  return {mean, student_t_975(b - 1) * sd / std::sqrt(static_cast<double>(b))};
}

// Nonoverlapping batch means over a stored series. The trailing remainder
// (length mod batches) is dropped.
inline Estimate batch_means(std::span<const double> series, std::size_t batches) {
  if (batches < 2) throw PreconditionError("batch_means: need at least two batches");
  if (series.size() < 10 * batches)
    throw PreconditionError("batch_means: series of length " + std::to_string(series.size()) +
                            " too short for " + std::to_string(batches) + " batches");
  const std::size_t len = series.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) acc += series[i];
    means[b] = acc / static_cast<double>(len);
  }
  Estimate e = estimate_from_batches(means);
  // A constant series must report an exact zero-width interval.
  bool constant = true;
  for (double x : series.subspan(0, batches * len))
    if (x != series.front()) {
      constant = false;
      break;
    }
  if (constant) e = {series.front(), 0.0};
  return e;
}

// Streaming accumulator: a fixed horizon split into equal batches, each
// holding a sum and a count so irregularly sampled series (cycle boundaries)
// are weighted correctly.
class BatchAccumulator {
 public:
  BatchAccumulator() = default;
  explicit BatchAccumulator(std::size_t batches) : sums_(batches, 0.0), counts_(batches, 0) {}

  void add(std::size_t batch, double value) {
    sums_[batch] += value;
    ++counts_[batch];
  }

  std::size_t batches() const { return sums_.size(); }

  std::vector<double> means() const {
    std::vector<double> out;
    out.reserve(sums_.size());
    for (std::size_t b = 0; b < sums_.size(); ++b)
      if (counts_[b] > 0) out.push_back(sums_[b] / static_cast<double>(counts_[b]));
    return out;
  }

  double overall_mean() const {
    double s = 0.0;
    std::uint64_t c = 0;
    for (std::size_t b = 0; b < sums_.size(); ++b) {
      s += sums_[b];
      c += counts_[b];
    }
    return c ? s / static_cast<double>(c) : 0.0;
  }

 private:
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
};

// Per-trajectory steady-state statistics; every slot before `warmup_slots`
// is excluded by the caller.
struct RunningStats {
  std::size_t warmup_slots = 0;
  std::size_t batch_count = 0;
  BatchAccumulator avg_queue;
  BatchAccumulator cross_stdev;
  BatchAccumulator perp_sq_boundary;
  BatchAccumulator l1_boundary;
  BatchAccumulator perp_sq_all;
  BatchAccumulator messages;
  BatchAccumulator unused;
  double avg_queue_sum = 0.0;
  double avg_queue_sumsq = 0.0;
  std::uint64_t slots = 0;

  RunningStats() = default;
  RunningStats(std::size_t warmup, std::size_t batches)
      : warmup_slots(warmup), batch_count(batches), avg_queue(batches), cross_stdev(batches),
        perp_sq_boundary(batches), l1_boundary(batches), perp_sq_all(batches), messages(batches),
        unused(batches) {}

  // Temporal standard deviation of the per-slot average queue.
  double temporal_stdev() const {
    if (slots < 2) return 0.0;
    const double m = avg_queue_sum / static_cast<double>(slots);
    const double var = avg_queue_sumsq / static_cast<double>(slots) - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace slq
