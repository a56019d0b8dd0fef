#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace comono {

/// One score column to read from a CSV file and the test length used to normalize it.
struct ColumnSpec {
  std::string name;
  long max_items = 0;
};

/// Raw integer marks, row-major, in file order.
struct RawScores {
  std::vector<std::string> column_names;
  std::vector<long> max_items;
  std::vector<std::vector<long>> rows;

  std::size_t size() const noexcept { return rows.size(); }
};

/// Column-major sample with every value in [0,1].
struct NormalizedSample {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;

  std::size_t size() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t index_of(const std::string& name) const;
};

/// Ordered pair of variables: x is explanatory, y is the response.
class PairedSample {
 public:
  PairedSample(std::vector<double> x, std::vector<double> y, std::string x_name = "x",
               std::string y_name = "y");

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t size() const noexcept { return x_.size(); }
  const std::string& x_name() const noexcept { return x_name_; }
  const std::string& y_name() const noexcept { return y_name_; }

  bool operator==(const PairedSample&) const = default;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::string x_name_;
  std::string y_name_;
};

struct SummaryStats {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double mean = 0;
  double max = 0;
  double sd = 0;
};

/// Default test lengths of the three score columns: 65 / 45 / 80 items.
std::vector<ColumnSpec> default_schema();

/// Reads the columns named in `schema` from a CSV stream with a header row.
/// Other columns (e.g. `student_id`) are ignored.
RawScores read_csv(std::istream& in, const std::vector<ColumnSpec>& schema);
RawScores load_csv(const std::string& path, const std::vector<ColumnSpec>& schema);

NormalizedSample normalize(const RawScores& raw);

/// Adds N(0, sd^2) noise to every coordinate. Redraws (up to 100 times) while any x or y tie remains.
PairedSample jitter(const PairedSample& sample, double sd, std::uint64_t seed);

/// Quartiles use linear interpolation at plotting positions (k-1)/(n-1); sd uses divisor n-1.
SummaryStats summarize(std::span<const double> column);

/// Quantile by linear interpolation between order statistics at position p*(n-1).
double sample_quantile(std::span<const double> sorted, double p);

/// Equal-width, right-closed bins over [min, max]; the first bin also holds the minimum.
std::vector<std::size_t> histogram(std::span<const double> column, std::size_t bin_count);

PairedSample pair(const NormalizedSample& sample, const std::string& x_name, const std::string& y_name);

bool has_ties(std::span<const double> values);

}  // namespace comono
