#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "comono/association.hpp"
#include "comono/dataset.hpp"

namespace comono::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int partial_failure = 1;
inline constexpr int input_error = 2;
}  // namespace exit_code

enum class OutputFormat { json, csv, table };
enum class LossSelection { mean, median, both };

/// Environment variable naming a JSON config file read when --config is absent.
inline constexpr const char* config_env_var = "COMONO_CONFIG";

struct RunConfig {
  std::string input;
  /// Score columns to read; empty means every header column except the id column.
  std::vector<std::string> columns;
  /// Test lengths aligned with the score columns; empty means the built-in defaults
  /// (mathematics 65, reading 45, spelling 80).
  std::vector<long> max_items;
  LossSelection loss = LossSelection::mean;
  std::size_t grid_size = 1000;
  std::size_t m = 1000;
  double jitter_sd = 1e-5;
  std::uint64_t seed = 1;
  OutputFormat format = OutputFormat::table;
  std::optional<double> bandwidth;
  std::size_t bins = 10;
  std::string output_dir = ".";
};

OutputFormat parse_format(const std::string& text);
LossSelection parse_loss(const std::string& text);
std::vector<long> parse_max_items(const std::string& text);

/// Overlays the keys present in a JSON config file onto `config`.
/// Keys: input, columns, max_items, loss, grid, m, jitter_sd, seed, format, bandwidth, bins,
/// output_dir.
void apply_config_file(const std::string& path, RunConfig& config);

/// Throws unless grid_size == m (the step function takes one piece per grid point).
void validate(const RunConfig& config);

/// Column specs for the configured input, reading its header when no columns are named.
std::vector<ColumnSpec> resolve_schema(const RunConfig& config);
NormalizedSample load_sample(const RunConfig& config);

LocPipeline pipeline(const RunConfig& config, const LossKind& loss);

/// Summary statistics and histogram counts per column.
int cmd_summarize(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes scatter, mean-curve and median-curve data files for (x, y) into output_dir and
/// reports the bandwidths used.
int cmd_fit(const RunConfig& config, const std::string& x_name, const std::string& y_name,
            std::ostream& out, std::ostream& err);

int cmd_loc_matrix(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_compare(const RunConfig& config, const std::string& x_name, const std::string& y_name,
                std::ostream& out, std::ostream& err);

/// Rank scatter, rank step function and rearranged curves for one pair, or every ordered
/// pair when both names are empty.
int cmd_plot_data(const RunConfig& config, const std::string& x_name, const std::string& y_name,
                  std::ostream& out, std::ostream& err);

}  // namespace comono::cli
