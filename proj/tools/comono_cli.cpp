// comono: lack-of-co-monotonicity analysis of paired score data.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "comono/cli.hpp"
#include "comono/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::string input;
  std::vector<std::string> columns;
  std::string max_items;
  std::string loss;
  std::size_t grid = 0;
  std::size_t m = 0;
  double jitter_sd = 0;
  std::uint64_t seed = 0;
  double bandwidth = 0;
  std::string format;
  std::size_t bins = 0;
  std::string output_dir;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON config file (default: $COMONO_CONFIG)");
  cmd.add_option("--input", f.input, "CSV file with a header row and integer raw counts");
  cmd.add_option("--columns", f.columns, "score columns to read (default: all but student_id)")
      ->delimiter(',');
  cmd.add_option("--max-items", f.max_items, "test lengths aligned with the columns, e.g. 65,45,80");
  cmd.add_option("--loss", f.loss, "mean|median|both");
  cmd.add_option("--grid", f.grid, "grid size of fitted curves (default 1000)");
  cmd.add_option("--m", f.m, "step-function pieces; must equal the grid size (default 1000)");
  cmd.add_option("--jitter-sd", f.jitter_sd, "sd of tie-breaking noise (default 1e-5)");
  cmd.add_option("--seed", f.seed, "master seed (default 1)");
  cmd.add_option("--bandwidth", f.bandwidth, "fixed bandwidth instead of the plug-in estimate");
  cmd.add_option("--format", f.format, "json|csv|table (default table)");
  cmd.add_option("--bins", f.bins, "histogram bins for summarize (default 10)");
  cmd.add_option("--output-dir", f.output_dir, "directory for data files (default .)");
}

// Flags > config file > defaults.
comono::cli::RunConfig resolve(const CLI::App& cmd, const Flags& f) {
  using namespace comono::cli;
  RunConfig config;
  std::string config_path = f.config;
  if (config_path.empty())
    if (const char* env = std::getenv(config_env_var)) config_path = env;
  if (!config_path.empty()) apply_config_file(config_path, config);

  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--input")) config.input = f.input;
  if (given("--columns")) config.columns = f.columns;
  if (given("--max-items")) config.max_items = parse_max_items(f.max_items);
  if (given("--loss")) config.loss = parse_loss(f.loss);
  if (given("--grid")) config.grid_size = f.grid;
  if (given("--m")) config.m = f.m;
  if (given("--grid") && !given("--m")) config.m = config.grid_size;
  if (given("--m") && !given("--grid")) config.grid_size = config.m;
  if (given("--jitter-sd")) config.jitter_sd = f.jitter_sd;
  if (given("--seed")) config.seed = f.seed;
  if (given("--bandwidth")) config.bandwidth = f.bandwidth;
  if (given("--format")) config.format = parse_format(f.format);
  if (given("--bins")) config.bins = f.bins;
  if (given("--output-dir")) config.output_dir = f.output_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace comono::cli;
  CLI::App app{"Lack-of-co-monotonicity (LOC) analysis of paired variables"};
  app.require_subcommand(1);

  Flags flags;
  std::string x_name, y_name;

  auto* summarize = app.add_subcommand("summarize", "summary statistics and histogram counts");
  auto* fit = app.add_subcommand("fit", "fit mean and median curves for one pair; write data files");
  auto* matrix = app.add_subcommand("loc-matrix", "LOC values over all ordered column pairs");
  auto* compare = app.add_subcommand("compare", "Pearson, Spearman, zeta, I and LOC for one pair");
  auto* plot = app.add_subcommand("plot-data", "rank-based and rearranged curve data files");
  for (auto* cmd : {summarize, fit, matrix, compare, plot}) add_common(*cmd, flags);
  for (auto* cmd : {fit, compare}) {
    cmd->add_option("x", x_name, "explanatory column")->required();
    cmd->add_option("y", y_name, "response column")->required();
  }
  plot->add_option("x", x_name, "explanatory column (default: every ordered pair)");
  plot->add_option("y", y_name, "response column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::input_error;
  }

  CLI::App* active = app.get_subcommands().front();
  RunConfig config;
  try {
    config = resolve(*active, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::input_error;
  }

  if (active == summarize) return cmd_summarize(config, std::cout, std::cerr);
  if (active == fit) return cmd_fit(config, x_name, y_name, std::cout, std::cerr);
  if (active == matrix) return cmd_loc_matrix(config, std::cout, std::cerr);
  if (active == compare) return cmd_compare(config, x_name, y_name, std::cout, std::cerr);
  if (x_name.empty() != y_name.empty()) {
    std::cerr << "error: plot-data takes both x and y, or neither\n";
    return exit_code::input_error;
  }
  return cmd_plot_data(config, x_name, y_name, std::cout, std::cerr);
}
