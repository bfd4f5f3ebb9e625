#pragma once

#include <fmt/format.h>

#include <array>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slq/errors.hpp"
#include "slq/experiment.hpp"

namespace slq {

inline constexpr std::string_view kResultHeader =
    "policy,n,k,d,epsilon,avg_queue,avg_queue_ci,cross_stdev,temporal_stdev,perp_sq,msg_per_job,"
    "msg_per_slot_2n,msg_per_slot_n,eps_x_avgq,lower_rhs,upper_rhs";

// Extra columns appended for sweep tables.
inline constexpr std::string_view kSweepExtraHeader = "perp_sq_ci,l1_boundary,collapse_ratio,note";

struct CsvRow {
  std::string policy;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t d = 0;
  // epsilon .. upper_rhs in header order.
  std::array<double, 12> values{};
};

inline CsvRow to_csv_row(const ExperimentResult& r) {
  return {r.policy,
          r.n,
          r.k,
          r.d,
          {r.epsilon, r.avg_queue.mean, r.avg_queue.half_width, r.cross_stdev, r.temporal_stdev, r.perp_sq.mean,
           r.rates.per_job, r.rates.per_slot_2n, r.rates.per_slot_n, r.eps_x_avgq, r.lower_rhs, r.upper_rhs}};
}

inline std::string format_number(double v) { return fmt::format("{:.10g}", v); }

inline std::string format_row(const CsvRow& row) {
  std::string line = fmt::format("{},{},{},{}", row.policy, row.n, row.k, row.d);
  for (double v : row.values) {
    line += ',';
    line += format_number(v);
  }
  return line;
}

inline std::string results_to_csv(const std::vector<ExperimentResult>& results) {
  std::string out(kResultHeader);
  out += '\n';
  for (const auto& r : results) {
    out += format_row(to_csv_row(r));
    out += '\n';
  }
  return out;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = fmt::format("{},{}\n", kResultHeader, kSweepExtraHeader);
  for (const auto& row : rows) {
    if (row.admissible) {
      const auto& r = row.result;
      out += fmt::format("{},{},{},{},{}\n", format_row(to_csv_row(r)), format_number(r.perp_sq.half_width),
                         format_number(r.l1_boundary.mean), format_number(r.collapse_ratio), row.note);
    } else {
      out += fmt::format("warning,,,,{},,,,,,,,,,,,,,,{}\n", format_number(row.epsilon), row.note);
    }
  }
  return out;
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline void write_csv(const std::vector<ExperimentResult>& results, const std::string& path) {
  write_text(results_to_csv(results), path);
}

inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader) throw ConfigError("csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 16) throw ConfigError("csv: expected 16 cells, got " + std::to_string(cells.size()));
    CsvRow row;
    row.policy = cells[0];
    row.n = std::stoul(cells[1]);
    row.k = std::stoul(cells[2]);
    row.d = std::stoul(cells[3]);
    for (std::size_t i = 0; i < row.values.size(); ++i) row.values[i] = std::stod(cells[4 + i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace slq
