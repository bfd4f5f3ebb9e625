#pragma once

// Experiment description and its flat `key = value` file format.
//
//   # comment
//   n = 10
//   policy = slq            # slq | jsq | repeated_jsq | round_robin
//   k = 1
//   d = 1
//   arrival_mean = 19.99    # E[A(1)], jobs per slot over all servers
//   arrival_var = 25        # Var(A(1))
//   a_max = 3               # A(1) <= floor(n * a_max)
//   service_mu = 2          # one value for all servers, or a comma list of n
//   service_var = 1
//   s_max = 3
//   horizon = 200000000     # measured slots, a whole number of cycles
//   warmup = auto           # or a slot count
//   replications = 1
//   batches = 20
//   seed = 1
//   threads = 0             # 0 = hardware concurrency
//   output = results.csv
//   require_throughput_optimal = false
//   allow_unstable = false

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slq/analysis.hpp"
#include "slq/errors.hpp"
#include "slq/model.hpp"
#include "slq/policy.hpp"

namespace slq {

struct SystemConfig {
  std::string name;
  std::size_t n = 0;
  PolicyKind policy;
  ArrivalSpec arrival;
  ServiceSpec service;
  std::uint64_t horizon_slots = 0;
  std::optional<std::uint64_t> warmup_slots;  // empty = automatic
  std::size_t replications = 1;
  std::size_t batches = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string output;
  bool require_throughput_optimal = false;
  bool allow_unstable = false;

  std::size_t cycle() const { return policy.cycle(n); }
  std::size_t effective_k() const { return policy.effective_k(n); }
  std::size_t effective_d() const { return policy.effective_d(n); }
  std::string label() const { return name.empty() ? policy.label(n) : name; }
  double epsilon() const { return service.mu_sum() - arrival.n_lambda; }

  void validate() const {
    if (n < 2) throw ConfigError("config: n must be at least 2");
    policy.validate(n);
    if (service.size() != n)
      throw ConfigError("config: " + std::to_string(service.size()) + " service rates for n=" +
                        std::to_string(n));
    service.validate();
    arrival.validate(n);
    if (horizon_slots == 0) throw ConfigError("config: horizon must be positive");
    if (horizon_slots % cycle() != 0)
      throw ConfigError("config: horizon " + std::to_string(horizon_slots) +
                        " is not a multiple of the cycle length " + std::to_string(cycle()));
    if (batches < 10) throw ConfigError("config: at least 10 batches are required");
    if (horizon_slots < 10 * batches)
      throw ConfigError("config: horizon too short for the requested batch count");
    if (replications < 1) throw ConfigError("config: replications must be at least 1");
    if (require_throughput_optimal && policy.samples() &&
        !is_throughput_optimal(service.mu, effective_d()))
      throw ConfigError("config: d=" + std::to_string(effective_d()) +
                        " is not throughput optimal, need d >= " +
                        std::to_string(min_skips(service.mu).d));
  }
};

// Rounds `slots` up to a whole number of cycles.
inline std::uint64_t round_to_cycles(std::uint64_t slots, std::size_t cycle) {
  return (slots + cycle - 1) / cycle * cycle;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  const std::string owned(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(owned, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (owned.empty() || used != owned.size())
    throw ConfigError("config: key '" + std::string(key) + "' expects a number, got '" + owned + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  const std::string_view t = trim(text);
  // Accept scientific notation such as 2e8 for slot counts.
  if (t.find_first_of(".eE") != std::string_view::npos) {
    const double v = parse_double(key, t);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
      throw ConfigError("config: key '" + std::string(key) + "' expects a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("config: key '" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(t) + "'");
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("config: key '" + std::string(key) + "' expects true/false");
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<double> broadcast(std::string_view key, std::vector<double> values,
                                     std::size_t n) {
  if (values.size() == 1) return std::vector<double>(n, values.front());
  if (values.size() != n)
    throw ConfigError("config: key '" + std::string(key) + "' has " + std::to_string(values.size()) +
                      " entries for n=" + std::to_string(n));
  return values;
}

inline PolicyFamily parse_family(std::string_view text) {
  const std::string_view t = trim(text);
  if (t == "slq") return PolicyFamily::slq;
  if (t == "jsq") return PolicyFamily::jsq;
  if (t == "repeated_jsq") return PolicyFamily::repeated_jsq;
  if (t == "round_robin" || t == "rr") return PolicyFamily::round_robin;
  throw ConfigError("config: unknown policy '" + std::string(t) + "'");
}

}  // namespace detail

inline SystemConfig parse_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(line_no));
    if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    kv.emplace(key, std::string(detail::trim(line.substr(eq + 1))));
  }

  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto require = [&take](const char* key) {
    auto v = take(key);
    if (!v) throw ConfigError(std::string("config: missing key '") + key + "'");
    return *v;
  };

  SystemConfig cfg;
  if (auto v = take("name")) cfg.name = *v;
  cfg.n = detail::parse_uint("n", require("n"));
  if (cfg.n < 2) throw ConfigError("config: n must be at least 2");
  cfg.policy.family = detail::parse_family(require("policy"));
  if (auto v = take("k")) cfg.policy.k = detail::parse_uint("k", *v);
  if (auto v = take("d")) cfg.policy.d = detail::parse_uint("d", *v);
  if (cfg.policy.family == PolicyFamily::slq && cfg.policy.d == 0)
    throw ConfigError("config: policy slq needs d >= 1 (use round_robin for d = 0)");

  cfg.arrival.n_lambda = detail::parse_double("arrival_mean", require("arrival_mean"));
  cfg.arrival.n_sigma_lambda_sq = detail::parse_double("arrival_var", require("arrival_var"));
  cfg.arrival.a_max = detail::parse_double("a_max", require("a_max"));

  cfg.service.mu = detail::broadcast("service_mu", detail::parse_list("service_mu", require("service_mu")), cfg.n);
  cfg.service.sigma_mu_sq =
      detail::broadcast("service_var", detail::parse_list("service_var", require("service_var")), cfg.n);
  cfg.service.s_max = static_cast<JobCount>(detail::parse_uint("s_max", require("s_max")));

  cfg.horizon_slots = detail::parse_uint("horizon", require("horizon"));
  if (auto v = take("warmup"); v && detail::trim(*v) != "auto")
    cfg.warmup_slots = detail::parse_uint("warmup", *v);
  if (auto v = take("replications")) cfg.replications = detail::parse_uint("replications", *v);
  if (auto v = take("batches")) cfg.batches = detail::parse_uint("batches", *v);
  if (auto v = take("seed")) cfg.seed = detail::parse_uint("seed", *v);
  if (auto v = take("threads")) cfg.threads = detail::parse_uint("threads", *v);
  if (auto v = take("output")) cfg.output = *v;
  if (auto v = take("require_throughput_optimal"))
    cfg.require_throughput_optimal = detail::parse_bool("require_throughput_optimal", *v);
  if (auto v = take("allow_unstable")) cfg.allow_unstable = detail::parse_bool("allow_unstable", *v);

  if (!kv.empty()) throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace slq
