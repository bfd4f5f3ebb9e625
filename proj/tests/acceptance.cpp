// Acceptance checks 1-10. One PASS/FAIL line per criterion; exit status is the
// number of failures (0 when everything passes). Pass criterion numbers as
// arguments to run a subset, e.g. `acceptance 1 4 9`.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "slq/slq.hpp"

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

// Pinned tolerances.
constexpr double kCapacityAbsTol = 1e-12;
constexpr std::size_t kRandomInstances = 1000;
constexpr double kCriterion1Seconds = 10.0;
constexpr double kCriterion4Seconds = 5.0;
constexpr double kAnchorRelTol = 1e-9;
constexpr double kLowerAnchorAbsTol = 1e-6;
constexpr double kRatioTol = 0.05;
constexpr double kTableRelTol = 0.25;
constexpr double kLimitRelTol = 0.50;
constexpr double kCriterion6Seconds = 15.0 * 60.0;
constexpr double kCriterion8Seconds = 120.0;
constexpr std::uint64_t kSweepHorizon = 100'000'000;
constexpr std::size_t kStepCalls = 1'000'000;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Instance {
  std::vector<double> mu;
};

// n in [2, 12], mu uniform on (0.1, 5).
std::vector<Instance> random_instances() {
  slq::RngStream rng(20240601, 7);
  std::vector<Instance> out(kRandomInstances);
  for (auto& inst : out) {
    const std::size_t n = 2 + rng.next_u64() % 11;
    inst.mu.resize(n);
    for (double& m : inst.mu) {
      do m = 0.1 + 4.9 * rng.uniform();
      while (m <= 0.1);
    }
  }
  return out;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checks = 0;
  double worst = 0.0;
  for (const auto& inst : random_instances()) {
    for (std::size_t d = 1; d < inst.mu.size(); ++d) {
      const double fast = slq::capacity_bound(inst.mu, d).value;
      const double brute = slq::capacity_bound_bruteforce(inst.mu, d);
      worst = std::max(worst, std::abs(fast - brute));
      ++checks;
    }
  }
  const double secs = seconds_since(t0);
  if (!(worst < kCapacityAbsTol)) o.fail(fmt::format("max |fast - brute| = {:.3g}", worst));
  if (secs >= kCriterion1Seconds) o.fail(fmt::format("took {:.2f}s", secs));
  if (o.pass) o.detail = fmt::format("{} (instance, d) pairs, max |diff| {:.2g}, {:.2f}s", checks, worst, secs);
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::size_t checks = 0, optimal = 0;
  for (const auto& inst : random_instances()) {
    const double total = std::accumulate(inst.mu.begin(), inst.mu.end(), 0.0);
    double previous = 0.0;
    for (std::size_t d = 1; d < inst.mu.size(); ++d) {
      const double bound = slq::capacity_bound(inst.mu, d).value;
      const bool reaches = bound == total;
      const bool opt = slq::is_throughput_optimal(inst.mu, d);
      if (opt != reaches) {
        o.fail(fmt::format("n={} d={}: optimal={} but bound={:.17g} sum={:.17g}", inst.mu.size(), d, opt, bound,
                           total));
        return o;
      }
      if (bound < previous) {
        o.fail(fmt::format("n={} d={}: bound {:.17g} below d-1 value {:.17g}", inst.mu.size(), d, bound, previous));
        return o;
      }
      previous = bound;
      optimal += opt;
      ++checks;
    }
  }
  o.detail = fmt::format("{} pairs, {} throughput optimal, equivalence and monotonicity exact", checks, optimal);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const std::vector<double> mu{3, 1, 1, 1};
  const double b1 = slq::capacity_bound(mu, 1).value;
  if (b1 != 4.5) o.fail(fmt::format("bound at d=1 is {}", b1));
  if (slq::is_throughput_optimal(mu, 1)) o.fail("d=1 reported throughput optimal");
  if (!slq::is_throughput_optimal(mu, 2)) o.fail("d=2 not throughput optimal");
  if (slq::capacity_bound(mu, 2).value != 6.0) o.fail("bound at d=2 is not 6");
  if (slq::min_skips(mu).d != 2) o.fail(fmt::format("min_skips = {}", slq::min_skips(mu).d));
  for (std::size_t n = 2; n <= 12; ++n) {
    const std::vector<double> h(n, 1.7);
    const double total = std::accumulate(h.begin(), h.end(), 0.0);
    for (std::size_t d = 1; d < n; ++d)
      if (std::abs(slq::capacity_bound(h, d).value - total) > 1e-12 * total)
        o.fail(fmt::format("homogeneous n={} d={} below sum", n, d));
  }
  if (o.pass) o.detail = "4.5 at d=1, optimal at d=2, min_skips 2, homogeneous reaches sum for n<=12";
  return o;
}

slq::BoundsParams reference_params(std::size_t k) {
  slq::BoundsParams p;
  p.n = 10;
  p.k = k;
  p.d = 1;
  p.mu.assign(10, 2.0);
  p.a_max = 3.0;
  p.s_max = 3.0;
  p.sigma_lambda_sq = 2.5;
  p.sigma_mu_max_sq = 1.0;
  p.sigma_mu_sq_sum = 10.0;
  p.epsilon = 0.01;
  return p;
}

bool rel_close(double got, double want, double tol) { return std::abs(got / want - 1.0) <= tol; }

Outcome criterion4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();

  // Anchors frozen from the 50-digit oracle in tests/oracles/bounds_oracle.py.
  const auto r = slq::n2_bound(reference_params(1));
  if (!rel_close(r.n2, 2.2247750030092633057e+23, kAnchorRelTol)) o.fail(fmt::format("N2 = {:.12g}", r.n2));
  if (!rel_close(r.upper_rhs, 258347150347.44812757, kAnchorRelTol))
    o.fail(fmt::format("upper = {:.12g}", r.upper_rhs));
  if (!rel_close(r.eta, 9.4362104511670272798e-8, kAnchorRelTol)) o.fail("eta anchor");

  slq::BoundsParams h;
  h.n = 4;
  h.k = 2;
  h.d = 2;
  h.mu = {3, 1, 1.5, 2};
  h.a_max = 2;
  h.s_max = 4;
  h.sigma_lambda_sq = 1.25;
  h.sigma_mu_max_sq = 2;
  h.sigma_mu_sq_sum = 5;
  h.epsilon = 0.05;
  const auto rh = slq::n2_bound(h);
  if (!rel_close(rh.n2, 221975928872331239.43, kAnchorRelTol)) o.fail("heterogeneous N2 anchor");
  if (!rel_close(rh.upper_rhs, 421403305.44270768032, kAnchorRelTol)) o.fail("heterogeneous upper anchor");

  // (25 + 10 + 0.01^2 - 3*0.01) / 20 = 1.748505 exactly, printed as 1.74851 at six digits.
  const double lower = slq::lower_bound_rhs(0.01, 10, 25.0, 10.0, 3.0).value;
  if (std::abs(lower - 1.748505) > kLowerAnchorAbsTol) o.fail(fmt::format("lower = {:.9g}", lower));
  if (fmt::format("{:.6g}", lower) != "1.74851") o.fail(fmt::format("lower prints as {:.6g}", lower));

  // 10 x 10 x 10 grid over n, k and eps / Delta; d cycles through its range.
  const std::size_t ns[] = {2, 3, 4, 5, 6, 8, 10, 12, 16, 20};
  const std::size_t ks[] = {1, 2, 3, 4, 8, 16, 32, 64, 128, 256};
  const double fracs[] = {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  std::size_t grid = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      for (std::size_t l = 0; l < 10; ++l) {
        slq::BoundsParams p;
        p.n = ns[i];
        p.k = ks[j];
        p.d = 1 + (i + j + l) % (p.n - 1);
        p.mu.assign(p.n, 2.0);
        p.a_max = 3.0;
        p.s_max = 3.0;
        p.sigma_lambda_sq = 2.5;
        p.sigma_mu_max_sq = 1.0;
        p.sigma_mu_sq_sum = static_cast<double>(p.n);
        p.epsilon = fracs[l] * slq::delta(p.mu, p.d).value;
        const auto b = slq::n2_bound(p);
        if (!(b.denominator > 0.0) || !(b.n2 > 0.0) || !std::isfinite(b.n2)) {
          o.fail(fmt::format("denominator {} at n={} k={} d={} eps={}", b.denominator, p.n, p.k, p.d, p.epsilon));
          return o;
        }
        ++grid;
      }

  const double n256 = slq::n2_bound(reference_params(256)).n2;
  const double n512 = slq::n2_bound(reference_params(512)).n2;
  const double n1024 = slq::n2_bound(reference_params(1024)).n2;
  const double r1 = n512 / n256, r2 = n1024 / n512;
  if (std::abs(r1 / 4.0 - 1.0) > kRatioTol) o.fail(fmt::format("N2(512)/N2(256) = {:.4f}", r1));
  if (std::abs(r2 / 4.0 - 1.0) > kRatioTol) o.fail(fmt::format("N2(1024)/N2(512) = {:.4f}", r2));

  const double secs = seconds_since(t0);
  if (secs >= kCriterion4Seconds) o.fail(fmt::format("took {:.2f}s", secs));
  if (o.pass)
    o.detail = fmt::format("anchors match, lower {:.7g}, {} grid points positive, ratios {:.4f} {:.4f}, {:.2f}s",
                           lower, grid, r1, r2, secs);
  return o;
}

Outcome criterion5() {
  Outcome o;
  const double published[] = {1738.597, 231.805, 300.7, 109.5, 471.1, 144.8, 2537.7};
  const double rates[] = {1.111, 1.111, 1.053, 1.020};  // SLQ rows at n = 10, 10, 20, 50
  const auto configs = slq::table1_preset(1.0, 1);
  std::vector<double> avg;
  std::string summary;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto r = slq::run_experiment(configs[i]);
    avg.push_back(r.avg_queue.mean);
    summary += fmt::format("{}{}(n={})={:.1f}", i ? " " : "", r.policy, r.n, r.avg_queue.mean);
    if (std::abs(r.avg_queue.mean / published[i] - 1.0) > kTableRelTol)
      o.fail(fmt::format("{} n={}: {:.1f} vs {}", r.policy, r.n, r.avg_queue.mean, published[i]));
    if (i == 1 || i == 3 || i == 5) {
      const double want = rates[i == 1 ? 0 : (i == 3 ? 2 : 3)];
      const double got = std::round(r.rates.per_slot_n * 1000.0) / 1000.0;
      if (got != want) o.fail(fmt::format("{} n={} message rate {:.4f}", r.policy, r.n, r.rates.per_slot_n));
    }
  }
  if (!(avg[0] > avg[2] && avg[2] > avg[1])) o.fail("ordering RR > 9-SLQ-9 > 1-SLQ-1 at n=10 violated");
  if (!(avg[4] > 2.0 * avg[3])) o.fail(fmt::format("n=20 repeated-JSQ/SLQ ratio {:.2f}", avg[4] / avg[3]));
  if (!(avg[6] > 2.0 * avg[5])) o.fail(fmt::format("n=50 repeated-JSQ/SLQ ratio {:.2f}", avg[6] / avg[5]));
  o.detail = (o.pass ? "" : o.detail + " | ") + summary + fmt::format(", {:.0f}s", seconds_since(t0));
  return o;
}

// n = 4, mu = 2 with service law {1, 3}, Var(A) = 8. d = 2 is the smallest
// skip count whose Delta (= 1) admits every eps in the sweep.
slq::SystemConfig sweep_base() {
  slq::SystemConfig c;
  c.n = 4;
  c.policy = slq::PolicyKind::slq(1, 2);
  c.arrival = {8.0 - 0.4, 8.0, 3.0};
  c.service.mu.assign(4, 2.0);
  c.service.sigma_mu_sq.assign(4, 1.0);
  c.service.s_max = 3;
  c.horizon_slots = kSweepHorizon;
  c.seed = 11;
  c.threads = 1;
  return c;
}

struct SweepData {
  std::vector<slq::SweepRow> rows;
  double seconds = 0.0;
};

const SweepData& sweep_data() {
  static const SweepData data = [] {
    const auto t0 = std::chrono::steady_clock::now();
    SweepData d;
    d.rows = slq::sweep_heavy_traffic(sweep_base(), {0.4, 0.2, 0.1, 0.05});
    d.seconds = seconds_since(t0);
    return d;
  }();
  return data;
}

Outcome criterion6() {
  Outcome o;
  const auto& data = sweep_data();
  const auto& rows = data.rows;
  const double limit = (8.0 + 4.0) / (2.0 * 4.0);
  std::string summary;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].admissible) {
      o.fail(fmt::format("eps={:g} skipped: {}", rows[i].epsilon, rows[i].note));
      continue;
    }
    const auto& r = rows[i].result;
    const double hw = r.epsilon * r.avg_queue.half_width;
    summary += fmt::format("{}eps={:g} {:.3f}+-{:.3f} (lower {:.3f})", i ? " " : "", r.epsilon, r.eps_x_avgq, hw,
                           r.lower_rhs);
    if (!(r.lower_rhs <= r.eps_x_avgq + hw))
      o.fail(fmt::format("eps={}: {:.4f} below lower {:.4f}", r.epsilon, r.eps_x_avgq, r.lower_rhs));
    if (i > 0 && rows[i - 1].admissible) {
      const auto& p = rows[i - 1].result;
      const double noise = hw + p.epsilon * p.avg_queue.half_width;
      if (r.eps_x_avgq > p.eps_x_avgq + noise)
        o.fail(fmt::format("increase from eps={:g} to eps={:g}", p.epsilon, r.epsilon));
    }
  }
  const auto& last = rows.back().result;
  if (std::abs(last.eps_x_avgq / limit - 1.0) > kLimitRelTol)
    o.fail(fmt::format("eps=0.05 value {:.4f} vs limit {}", last.eps_x_avgq, limit));
  if (data.seconds >= kCriterion6Seconds) o.fail(fmt::format("took {:.0f}s", data.seconds));
  o.detail = (o.pass ? "" : o.detail + " | ") + summary + fmt::format(", limit {}, {:.0f}s", limit, data.seconds);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto& rows = sweep_data().rows;
  std::string summary;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i].admissible || !rows[i - 1].admissible) {
      o.fail("sweep row skipped");
      continue;
    }
    const auto& p = rows[i - 1].result;
    const auto& r = rows[i].result;
    const double perp = std::max(r.perp_sq.mean / p.perp_sq.mean, p.perp_sq.mean / r.perp_sq.mean);
    const double l1 = r.l1_mean / p.l1_mean;
    summary += fmt::format("{}{:g}->{:g}: perp x{:.3f} l1 x{:.3f} collapse {:.4f}->{:.4f}", i > 1 ? " " : "",
                           p.epsilon, r.epsilon, perp, l1, p.collapse_ratio, r.collapse_ratio);
    if (!(perp < 2.0)) o.fail(fmt::format("perp factor {:.3f} at {:g}->{:g}", perp, p.epsilon, r.epsilon));
    if (!(l1 >= 1.6 && l1 <= 2.4)) o.fail(fmt::format("l1 factor {:.3f} at {:g}->{:g}", l1, p.epsilon, r.epsilon));
    // Relative noise in a ratio of two estimates: sum of the relative half-widths.
    const double noise = p.perp_sq.half_width / p.perp_sq.mean + p.l1_boundary.half_width / p.l1_boundary.mean +
                         r.perp_sq.half_width / r.perp_sq.mean + r.l1_boundary.half_width / r.l1_boundary.mean;
    if (r.collapse_ratio > p.collapse_ratio * (1.0 + noise))
      o.fail(fmt::format("collapse ratio rose at {:g}->{:g}", p.epsilon, r.epsilon));
  }
  o.detail = (o.pass ? "" : o.detail + " | ") + summary;
  return o;
}

slq::SystemConfig instability_config(std::size_t d) {
  slq::SystemConfig c;
  c.n = 4;
  c.policy = slq::PolicyKind::slq(1, d);
  c.arrival = {5.0, 4.0, 2.0};
  c.service.mu = {3, 1, 1, 1};
  c.service.sigma_mu_sq.assign(4, 1.0);
  c.service.s_max = 4;
  c.horizon_slots = slq::round_to_cycles(2'000'000, c.cycle());
  c.warmup_slots = slq::round_to_cycles(10'000, c.cycle());
  c.seed = 5;
  c.threads = 1;
  c.allow_unstable = true;
  return c;
}

Outcome criterion8() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto unstable = slq::instability_demo(instability_config(1));
  const auto stable = slq::instability_demo(instability_config(2));
  const double secs = seconds_since(t0);
  if (!unstable.beyond_bound) o.fail("d=1 not beyond its bound");
  if (!(unstable.lower() > 0.0))
    o.fail(fmt::format("d=1 slope CI [{:.4g}, {:.4g}] not positive", unstable.lower(), unstable.upper()));
  if (!(stable.lower() <= 0.0 && stable.upper() >= 0.0))
    o.fail(fmt::format("d=2 slope CI [{:.4g}, {:.4g}] excludes 0", stable.lower(), stable.upper()));
  if (secs >= kCriterion8Seconds) o.fail(fmt::format("took {:.0f}s", secs));
  o.detail = (o.pass ? "" : o.detail + " | ") +
             fmt::format("d=1 bound {} slope [{:.4g}, {:.4g}]; d=2 bound {} slope [{:.3g}, {:.3g}]; {:.1f}s",
                         unstable.theorem1_bound, unstable.lower(), unstable.upper(), stable.theorem1_bound,
                         stable.lower(), stable.upper(), secs);
  return o;
}

Outcome criterion9() {
  Outcome o;
  constexpr std::size_t kCycles = 400;
  std::size_t configs = 0, cycles_checked = 0;
  slq::RngStream qrng(77, 0);
  for (std::size_t n = 2; n <= 6; ++n)
    for (std::size_t k = 1; k <= 3; ++k)
      for (std::size_t d = 1; d < n; ++d) {
        ++configs;
        const auto kind = slq::PolicyKind::slq(k, d);
        slq::Dispatcher disp(kind, n, slq::RngStream(3, n * 100 + k * 10 + d));
        const std::size_t m = n - d;
        const std::size_t cycle = k * m;
        slq::QueueVector q(n);
        for (std::size_t c = 0; c < kCycles; ++c) {
          std::vector<std::size_t> hits(n, 0);
          std::vector<std::size_t> targets;
          std::uint64_t messages = 0;
          slq::QueueVector at_sample;
          for (std::size_t s = 0; s < cycle; ++s) {
            // Small values force frequent ties.
            for (auto& v : q) v = static_cast<slq::JobCount>(qrng.next_u64() % 4);
            const auto dec = disp.dispatch(q);
            if (dec.cycle_start != (s == 0)) {
              o.fail(fmt::format("n={} k={} d={}: cycle boundary at slot {}", n, k, d, s));
              return o;
            }
            if (s == 0) at_sample = q;
            messages += dec.messages;
            ++hits[dec.target];
            targets.push_back(dec.target);
          }
          const auto& skipped = disp.state().skipped();
          if (skipped.size() != d) o.fail(fmt::format("n={} k={} d={}: {} skipped", n, k, d, skipped.size()));
          slq::JobCount min_skipped = std::numeric_limits<slq::JobCount>::max();
          for (std::size_t i : skipped) min_skipped = std::min(min_skipped, at_sample[i]);
          for (std::size_t i = 0; i < n; ++i) {
            const bool is_skipped = std::binary_search(skipped.begin(), skipped.end(), i);
            if (is_skipped && hits[i] != 0) o.fail(fmt::format("n={} k={} d={}: skipped queue hit", n, k, d));
            if (!is_skipped && hits[i] != k)
              o.fail(fmt::format("n={} k={} d={}: queue {} hit {} times", n, k, d, i, hits[i]));
            if (!is_skipped && at_sample[i] > min_skipped)
              o.fail(fmt::format("n={} k={} d={}: a longer queue was not skipped", n, k, d));
          }
          for (std::size_t s = 0; s + 1 < targets.size(); ++s)
            for (std::size_t t = s + 1; t < std::min(targets.size(), s + m); ++t)
              if (targets[s] == targets[t]) o.fail(fmt::format("n={} k={} d={}: repeat within {} slots", n, k, d, m));
          if (messages != 2 * n) o.fail(fmt::format("n={} k={} d={}: {} messages", n, k, d, messages));
          if (!o.pass) return o;
          ++cycles_checked;
        }
      }
  o.detail = fmt::format("{} (n,k,d) combinations, {} cycles", configs, cycles_checked);
  return o;
}

Outcome criterion10() {
  Outcome o;
  slq::RngStream rng(31337, 1);
  auto below = [&rng](std::uint64_t bound) { return static_cast<slq::JobCount>(rng.next_u64() % bound); };
  for (std::size_t call = 0; call < kStepCalls; ++call) {
    const std::size_t n = 1 + rng.next_u64() % 12;
    slq::QueueVector q(n), s(n);
    for (auto& v : q) v = below(rng.next_u64() % 2 ? 4 : 40);
    for (auto& v : s) v = below(6);
    const slq::JobCount a = below(30);
    const std::size_t target = rng.next_u64() % n;
    const auto [next, out] = slq::step(q, a, target, s);
    slq::JobCount before = 0, after = 0, served = 0, unused = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const slq::JobCount u = out.unused[i];
      if (next[i] < 0 || u < 0 || u > s[i] || next[i] * u != 0 ||
          next[i] != q[i] + (i == target ? a : 0) - s[i] + u) {
        o.fail(fmt::format("call {} queue {} violates the slot identities", call, i));
        return o;
      }
      before += q[i];
      after += next[i];
      served += s[i];
      unused += u;
    }
    if (after != before + a - served + unused) {
      o.fail(fmt::format("call {} breaks conservation", call));
      return o;
    }
  }
  o.detail = fmt::format("{} calls", kStepCalls);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    fmt::print("criterion {:>2}: {}  {}\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failures;
}
