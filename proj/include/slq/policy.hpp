#pragma once

// k-SLQ-d dispatching: every k(n-d) slots the dispatcher samples all queue
// lengths (2n messages), marks the d longest as skipped, and then sends each
// slot's batch round-robin over the remaining n-d queues in ascending index
// order for k full rounds.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slq/errors.hpp"
#include "slq/model.hpp"
#include "slq/stochastic.hpp"

namespace slq {

enum class PolicyFamily { slq, round_robin, repeated_jsq, jsq };

inline std::size_t cycle_length(std::size_t k, std::size_t n, std::size_t d) { return k * (n - d); }

// Policy as configured. Aliases resolve to an (effective k, effective d) pair
// once n is known.
struct PolicyKind {
  PolicyFamily family = PolicyFamily::slq;
  std::size_t k = 1;
  std::size_t d = 1;

  static PolicyKind slq(std::size_t k, std::size_t d) { return {PolicyFamily::slq, k, d}; }
  static PolicyKind round_robin(std::size_t k = 1) { return {PolicyFamily::round_robin, k, 0}; }
  static PolicyKind repeated_jsq(std::size_t k) { return {PolicyFamily::repeated_jsq, k, 0}; }
  static PolicyKind jsq() { return {PolicyFamily::jsq, 1, 0}; }

  bool samples() const { return family != PolicyFamily::round_robin; }

  std::size_t effective_k(std::size_t n) const {
    return family == PolicyFamily::repeated_jsq ? k * (n - 1) : family == PolicyFamily::jsq ? 1 : k;
  }
  std::size_t effective_d(std::size_t n) const {
    switch (family) {
      case PolicyFamily::round_robin: return 0;
      case PolicyFamily::repeated_jsq:
      case PolicyFamily::jsq: return n - 1;
      case PolicyFamily::slq: break;
    }
    return d;
  }
  std::size_t cycle(std::size_t n) const { return cycle_length(effective_k(n), n, effective_d(n)); }

  void validate(std::size_t n) const {
    if (n < 2) throw ConfigError("policy: need at least two servers");
    if (k < 1) throw ConfigError("policy: k must be at least 1");
    if (family == PolicyFamily::slq && (d < 1 || d > n - 1))
      throw ConfigError("policy: d=" + std::to_string(d) + " outside [1, " +
                        std::to_string(n - 1) + "]");
  }

  std::string label(std::size_t n) const {
    if (family == PolicyFamily::round_robin) return "Round-Robin";
    return std::to_string(effective_k(n)) + "-SLQ-" + std::to_string(effective_d(n));
  }
};

// Indices of the d longest queues, ascending. Ties at the boundary are broken
// by independent uniform priorities, so every tied subset is equally likely.
inline std::vector<std::size_t> sample_and_select(std::span<const JobCount> q, std::size_t d,
                                                  RngStream& rng) {
  const std::size_t n = q.size();
  if (d < 1 || d + 1 > n)
    throw ConfigError("sample_and_select: d=" + std::to_string(d) + " outside [1, n-1]");
  struct Ranked {
    JobCount length;
    std::uint64_t priority;
    std::size_t index;
  };
  std::vector<Ranked> ranked(n);
  for (std::size_t i = 0; i < n; ++i) ranked[i] = {q[i], rng.next_u64(), i};
  auto longer = [](const Ranked& l, const Ranked& r) {
    if (l.length != r.length) return l.length > r.length;
    if (l.priority != r.priority) return l.priority > r.priority;
    return l.index < r.index;
  };
  std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(d - 1),
                   ranked.end(), longer);
  std::vector<std::size_t> skipped;
  skipped.reserve(d);
  const Ranked pivot = ranked[d - 1];
  for (const Ranked& r : ranked)
    if (!longer(pivot, r)) skipped.push_back(r.index);
  std::sort(skipped.begin(), skipped.end());
  return skipped;
}

// The dispatcher's memory between samples.
class DispatchState {
 public:
  DispatchState() = default;

  // Fresh cycle with the given skipped set (ascending or not).
  DispatchState(std::size_t n, std::size_t k, std::vector<std::size_t> skipped)
      : n_(n), k_(k), skipped_(std::move(skipped)) {
    std::sort(skipped_.begin(), skipped_.end());
    if (k_ < 1) throw ConfigError("dispatch state: k must be at least 1");
    if (skipped_.size() >= n_) throw ConfigError("dispatch state: every queue skipped");
    if (std::adjacent_find(skipped_.begin(), skipped_.end()) != skipped_.end())
      throw ConfigError("dispatch state: duplicate skipped index");
    if (!skipped_.empty() && skipped_.back() >= n_)
      throw ConfigError("dispatch state: skipped index out of range");
    allowed_.reserve(n_ - skipped_.size());
    for (std::size_t i = 0, s = 0; i < n_; ++i) {
      if (s < skipped_.size() && skipped_[s] == i) {
        ++s;
        continue;
      }
      allowed_.push_back(i);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t d() const { return skipped_.size(); }
  const std::vector<std::size_t>& skipped() const { return skipped_; }
  const std::vector<std::size_t>& allowed() const { return allowed_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t round() const { return round_; }
  std::size_t slot_in_cycle() const { return round_ * allowed_.size() + cursor_; }
  std::size_t cycle_slots() const { return k_ * allowed_.size(); }
  bool exhausted() const { return round_ >= k_; }

  std::size_t next_target() {
    if (allowed_.empty()) throw StateError("dispatch state: not initialised");
    if (exhausted()) throw StateError("dispatch state: cycle exhausted, resample first");
    const std::size_t target = allowed_[cursor_];
    if (++cursor_ == allowed_.size()) {
      cursor_ = 0;
      ++round_;
    }
    return target;
  }

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 1;
  std::vector<std::size_t> skipped_;
  std::vector<std::size_t> allowed_;
  std::size_t cursor_ = 0;
  std::size_t round_ = 0;
};

inline std::pair<std::size_t, DispatchState> next_target(DispatchState state) {
  const std::size_t target = state.next_target();
  return {target, std::move(state)};
}

// Drives a DispatchState across cycles for one trajectory.
class Dispatcher {
 public:
  Dispatcher(PolicyKind kind, std::size_t n, RngStream tie_break)
      : n_(n), k_(kind.effective_k(n)), d_(kind.effective_d(n)), samples_(kind.samples()),
        rng_(std::move(tie_break)) {
    kind.validate(n);
  }

  struct Decision {
    std::size_t target;
    bool cycle_start;
    std::uint64_t messages;
  };

  // Target for the current slot. `q` is the queue vector at the start of the
  // slot; when a new cycle begins it is sampled and this slot already uses the
  // new skipped set.
  Decision dispatch(std::span<const JobCount> q) {
    bool cycle_start = false;
    std::uint64_t messages = 0;
    if (state_.allowed().empty() || state_.exhausted()) {
      cycle_start = true;
      if (samples_) {
        state_ = DispatchState(n_, k_, sample_and_select(q, d_, rng_));
        messages = 2 * n_;
      } else {
        state_ = DispatchState(n_, k_, {});
      }
    }
    return {state_.next_target(), cycle_start, messages};
  }

  const DispatchState& state() const { return state_; }
  std::size_t cycle_slots() const { return cycle_length(k_, n_, d_); }

 private:
  std::size_t n_;
  std::size_t k_;
  std::size_t d_;
  bool samples_;
  RngStream rng_;
  DispatchState state_;
};

}  // namespace slq
