#pragma once

// Seeded random streams and bounded integer laws with prescribed moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <pcg_random.hpp>

#include "slq/errors.hpp"
#include "slq/model.hpp"

namespace slq {

// A reproducible stream keyed by (seed, stream id): PCG64 with the seed as
// initial state and the id selecting the increment. Only integer outputs and
// the fixed conversion below are used, never the implementation-defined std
// distributions, so a key yields the same sequence on every platform. The
// 32-byte state keeps one stream per server cheap.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(seed, stream_id) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  pcg64 engine_;
};

struct Atom {
  JobCount value = 0;
  double probability = 0.0;
};

class BoundedDiscreteDist {
 public:
  BoundedDiscreteDist(std::vector<Atom> atoms, double mean_target, double var_target,
                      JobCount bound)
      : atoms_(std::move(atoms)), mean_target_(mean_target), var_target_(var_target),
        bound_(bound) {
    // Integer thresholds on a 64-bit draw; the last atom takes the remainder.
    double acc = 0.0;
    thresholds_.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
      acc += a.probability;
      thresholds_.push_back(acc >= 1.0 ? std::numeric_limits<std::uint64_t>::max()
                                       : static_cast<std::uint64_t>(std::ldexp(acc, 64)));
    }
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double mean_target() const { return mean_target_; }
  double var_target() const { return var_target_; }
  JobCount bound() const { return bound_; }

  double mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.probability * static_cast<double>(a.value);
    return m;
  }

  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (const Atom& a : atoms_) {
      const double dv = static_cast<double>(a.value) - m;
      v += a.probability * dv * dv;
    }
    return v;
  }

  JobCount sample(RngStream& rng) const {
    if (atoms_.size() == 1) return atoms_.front().value;
    // Branch-free: counts the thresholds at or below the draw.
    const std::uint64_t x = rng.next_u64();
    std::size_t idx = 0;
    for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) idx += x >= thresholds_[i];
    return atoms_[idx].value;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::uint64_t> thresholds_;
  double mean_target_;
  double var_target_;
  JobCount bound_;
};

inline JobCount sample(const BoundedDiscreteDist& dist, RngStream& rng) { return dist.sample(rng); }

// Two-anchor randomized rounding: mass 1/2 on mean -/+ sqrt(variance), each
// anchor split over its two neighbouring integers so the mean is preserved.
// Realized variance exceeds the target by the rounding term f(1 - f)/2 summed
// over both anchors, which is at most 0.25.
inline BoundedDiscreteDist make_bounded_discrete(double mean, double variance, JobCount bound) {
  if (bound < 1) throw InfeasibleError("bounded law: bound must be positive");
  const double b = static_cast<double>(bound);
  if (!(mean > 0.0) || !(mean < b))
    throw InfeasibleError("bounded law: mean " + std::to_string(mean) + " outside (0, " +
                          std::to_string(bound) + ")");
  if (variance < 0.0) throw InfeasibleError("bounded law: negative variance");

  const double spread = std::sqrt(variance);
  const double low_anchor = mean - spread;
  const double high_anchor = mean + spread;
  if (low_anchor < 0.0)
    throw InfeasibleError("bounded law: lower anchor " + std::to_string(low_anchor) +
                          " below 0 (mean - sqrt(variance) < 0)");
  if (high_anchor > b)
    throw InfeasibleError("bounded law: upper anchor " + std::to_string(high_anchor) +
                          " above bound " + std::to_string(bound));
  // Anchors inside [0, bound] already imply variance <= mean * (bound - mean).

  std::vector<Atom> atoms;
  auto add = [&atoms](JobCount v, double p) {
    if (p <= 0.0) return;
    for (Atom& a : atoms)
      if (a.value == v) {
        a.probability += p;
        return;
      }
    atoms.push_back({v, p});
  };
  for (double anchor : {low_anchor, high_anchor}) {
    const double floor_v = std::floor(anchor);
    const double frac = anchor - floor_v;
    add(static_cast<JobCount>(floor_v), 0.5 * (1.0 - frac));
    add(static_cast<JobCount>(floor_v) + 1, 0.5 * frac);
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.value < r.value; });
  return BoundedDiscreteDist(std::move(atoms), mean, variance, bound);
}

// Stream ids: one per (replication, purpose). Purposes are the arrival
// process, each server, and dispatcher tie-breaking.
struct StreamIds {
  static constexpr std::uint64_t arrivals = 0;
  static constexpr std::uint64_t tie_break = 1;
  static constexpr std::uint64_t server(std::size_t i) { return 2 + i; }
  static constexpr std::uint64_t key(std::uint64_t replication, std::uint64_t purpose) {
    return (replication << 32) | purpose;
  }
};

}  // namespace slq
