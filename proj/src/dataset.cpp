#include "comono/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "comono/error.hpp"

namespace comono {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

std::size_t NormalizedSample::index_of(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw Error("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

PairedSample::PairedSample(std::vector<double> x, std::vector<double> y, std::string x_name,
                           std::string y_name)
    : x_(std::move(x)), y_(std::move(y)), x_name_(std::move(x_name)), y_name_(std::move(y_name)) {
  if (x_.size() != y_.size())
    throw Error("paired sample: x has " + std::to_string(x_.size()) + " values but y has " +
                std::to_string(y_.size()));
  if (x_.size() < 2) throw Error("paired sample needs at least 2 observations");
}

std::vector<ColumnSpec> default_schema() {
  return {{"mathematics", 65}, {"reading", 45}, {"spelling", 80}};
}

RawScores read_csv(std::istream& in, const std::vector<ColumnSpec>& schema) {
  if (schema.empty()) throw Error("schema names no columns");
  std::string line;
  while (std::getline(in, line) && blank(line)) {
  }
  if (blank(line)) throw ParseError("missing header row", 0);

  const auto header = split_csv_line(line);
  std::vector<std::size_t> positions;
  RawScores raw;
  for (const auto& spec : schema) {
    if (spec.max_items <= 0)
      throw Error("column '" + spec.name + "': max_items must be positive");
    const auto it = std::find(header.begin(), header.end(), spec.name);
    if (it == header.end()) throw ParseError("missing column '" + spec.name + "'", 0);
    positions.push_back(static_cast<std::size_t>(it - header.begin()));
    raw.column_names.push_back(spec.name);
    raw.max_items.push_back(spec.max_items);
  }

  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    ++row_index;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row_index) + ": expected " +
                           std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row_index);
    std::vector<long> row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = cells[positions[c]];
      long value = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError("row " + std::to_string(row_index) + ", column '" + schema[c].name +
                             "': '" + cell + "' is not an integer",
                         row_index);
      if (value < 0 || value > schema[c].max_items)
        throw ParseError("row " + std::to_string(row_index) + ", column '" + schema[c].name +
                             "': count " + cell + " outside [0, " +
                             std::to_string(schema[c].max_items) + "]",
                         row_index);
      row.push_back(value);
    }
    raw.rows.push_back(std::move(row));
  }
  if (raw.rows.empty()) throw ParseError("no rows", 0);
  return raw;
}

RawScores load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in, schema);
}

NormalizedSample normalize(const RawScores& raw) {
  NormalizedSample out;
  out.column_names = raw.column_names;
  out.columns.assign(raw.column_names.size(), std::vector<double>(raw.size()));
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto& row = raw.rows[r];
    if (row.size() != raw.column_names.size())
      throw ParseError("row " + std::to_string(r + 1) + " has wrong arity", r + 1);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] < 0 || row[c] > raw.max_items[c])
        throw ParseError("row " + std::to_string(r + 1) + ", column '" + raw.column_names[c] +
                             "': count out of range",
                         r + 1);
      out.columns[c][r] = static_cast<double>(row[c]) / static_cast<double>(raw.max_items[c]);
    }
  }
  return out;
}

bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

PairedSample jitter(const PairedSample& sample, double sd, std::uint64_t seed) {
  if (!(sd >= 0)) throw Error("jitter: sd must be non-negative");
  if (sd == 0) return sample;

  constexpr int max_attempts = 101;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<double> x(sample.x().begin(), sample.x().end());
    std::vector<double> y(sample.y().begin(), sample.y().end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += noise(rng);
      y[i] += noise(rng);
    }
    if (!has_ties(x) && !has_ties(y))
      return PairedSample(std::move(x), std::move(y), sample.x_name(), sample.y_name());
  }
  throw Error("jitter: ties persist after 100 retries; increase sd");
}

double sample_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty column");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> column) {
  if (column.empty()) throw Error("summarize: empty column");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());

  const auto n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0;
  for (double v : sorted) ss += (v - mean) * (v - mean);

  SummaryStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = sample_quantile(sorted, 0.25);
  s.median = sample_quantile(sorted, 0.5);
  s.q3 = sample_quantile(sorted, 0.75);
  s.mean = mean;
  s.sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return s;
}

std::vector<std::size_t> histogram(std::span<const double> column, std::size_t bin_count) {
  if (bin_count == 0) throw Error("histogram: bin_count must be positive");
  std::vector<std::size_t> counts(bin_count, 0);
  if (column.empty()) return counts;
  const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bin_count);
  for (double v : column) {
    std::size_t bin = 0;
    if (width > 0) {
      const double k = std::ceil((v - lo) / width) - 1.0;
      bin = k <= 0 ? 0 : std::min(static_cast<std::size_t>(k), bin_count - 1);
    }
    ++counts[bin];
  }
  return counts;
}

PairedSample pair(const NormalizedSample& sample, const std::string& x_name,
                  const std::string& y_name) {
  const auto xi = sample.index_of(x_name);
  const auto yi = sample.index_of(y_name);
  return PairedSample(sample.columns[xi], sample.columns[yi], x_name, y_name);
}

}  // namespace comono
