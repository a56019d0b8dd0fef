#include "comono/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "comono/error.hpp"

namespace comono::cli {

namespace {

using nlohmann::json;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

bool is_id_column(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "student_id" || lower == "id";
}

std::vector<LossKind> losses(LossSelection selection) {
  switch (selection) {
    case LossSelection::mean: return {LossKind::quadratic()};
    case LossSelection::median: return {LossKind::median()};
    case LossSelection::both: return {LossKind::quadratic(), LossKind::median()};
  }
  return {};
}

std::string describe_loss(const LossKind& loss) {
  return loss.is_quadratic() ? "conditional mean" : "conditional median";
}

json matrix_json(const LocMatrix& m) {
  json entries = json::array();
  json scaled = json::array();
  json errors = json::array();
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    json row = json::array(), srow = json::array(), erow = json::array();
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
      if (m.entries[i][j]) {
        row.push_back(*m.entries[i][j]);
        srow.push_back(*m.entries[i][j] * 1000.0);
        erow.push_back(nullptr);
      } else {
        row.push_back(nullptr);
        srow.push_back(nullptr);
        erow.push_back(m.errors[i][j]);
      }
    }
    entries.push_back(row);
    scaled.push_back(srow);
    errors.push_back(erow);
  }
  return json{{"labels", m.labels},
              {"loss", m.loss.name()},
              {"entries", entries},
              {"entries_x1000", scaled},
              {"errors", errors}};
}

void write_matrix_table(const LocMatrix& m, std::ostream& out) {
  std::size_t width = 1;
  for (const auto& l : m.labels) width = std::max(width, l.size());
  width += 2;
  const std::size_t cell = std::max<std::size_t>(width, 12);
  out << describe_loss(m.loss) << " based LOC matrix (entries multiplied by 1000)\n";
  out << pad("", width) << lpad("Y", cell) << "\n";
  out << pad("X", width);
  for (const auto& l : m.labels) out << lpad(l, cell);
  out << "\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << pad(m.labels[i], width);
    for (std::size_t j = 0; j < m.labels.size(); ++j)
      out << lpad(m.entries[i][j] ? fixed6(*m.entries[i][j] * 1000.0) : "ERROR", cell);
    out << "\n";
  }
}

void write_matrix_csv(const LocMatrix& m, std::ostream& out) {
  out << "," << "Y" << std::string(m.labels.size() - 1, ',') << "\n";
  out << "X";
  for (const auto& l : m.labels) out << "," << l;
  out << "\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.labels.size(); ++j)
      out << "," << (m.entries[i][j] ? fixed6(*m.entries[i][j] * 1000.0) : "ERROR");
    out << "\n";
  }
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.output_dir);
  const auto path = std::filesystem::path(config.output_dir) / name;
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << std::setprecision(10);
  return f;
}

std::pair<std::size_t, std::size_t> pair_indices(const NormalizedSample& sample,
                                                 const std::string& x_name,
                                                 const std::string& y_name) {
  return {sample.index_of(x_name), sample.index_of(y_name)};
}

// Runs `body`, mapping input problems to exit status 2.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::input_error;
  }
}

}  // namespace

OutputFormat parse_format(const std::string& text) {
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  if (text == "table") return OutputFormat::table;
  throw Error("unknown format '" + text + "' (expected json, csv or table)");
}

LossSelection parse_loss(const std::string& text) {
  if (text == "mean") return LossSelection::mean;
  if (text == "median") return LossSelection::median;
  if (text == "both") return LossSelection::both;
  throw Error("unknown loss '" + text + "' (expected mean, median or both)");
}

std::vector<long> parse_max_items(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v <= 0)
      throw Error("--max-items expects positive integers, got '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error("--max-items is empty");
  return out;
}

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
    if (j.contains("input")) config.input = j.at("input").get<std::string>();
    if (j.contains("columns")) config.columns = j.at("columns").get<std::vector<std::string>>();
    if (j.contains("max_items")) config.max_items = j.at("max_items").get<std::vector<long>>();
    if (j.contains("loss")) config.loss = parse_loss(j.at("loss").get<std::string>());
    if (j.contains("grid")) config.grid_size = j.at("grid").get<std::size_t>();
    if (j.contains("m")) config.m = j.at("m").get<std::size_t>();
    if (j.contains("jitter_sd")) config.jitter_sd = j.at("jitter_sd").get<double>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("format")) config.format = parse_format(j.at("format").get<std::string>());
    if (j.contains("bandwidth")) config.bandwidth = j.at("bandwidth").get<double>();
    if (j.contains("bins")) config.bins = j.at("bins").get<std::size_t>();
    if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error("config file '" + path + "': " + e.what());
  }
}

void validate(const RunConfig& config) {
  if (config.input.empty()) throw Error("no input file (use --input)");
  if (config.grid_size < 2) throw Error("grid size must be at least 2");
  if (config.grid_size != config.m)
    throw Error("m (" + std::to_string(config.m) + ") must equal the grid size (" +
                std::to_string(config.grid_size) + ")");
  if (!(config.jitter_sd >= 0)) throw Error("jitter sd must be non-negative");
  if (config.bandwidth && !(*config.bandwidth > 0)) throw Error("bandwidth must be positive");
  if (config.bins == 0) throw Error("bins must be positive");
}

std::vector<ColumnSpec> resolve_schema(const RunConfig& config) {
  std::vector<std::string> names = config.columns;
  if (names.empty()) {
    std::ifstream in(config.input);
    if (!in) throw Error("cannot open '" + config.input + "'");
    std::string header;
    std::getline(in, header);
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t\r\"");
      const auto last = cell.find_last_not_of(" \t\r\"");
      if (first == std::string::npos) continue;
      cell = cell.substr(first, last - first + 1);
      if (!is_id_column(cell)) names.push_back(cell);
    }
    if (names.empty()) throw Error("no score columns in '" + config.input + "'");
  }

  std::map<std::string, long> defaults;
  for (const auto& spec : default_schema()) defaults[spec.name] = spec.max_items;

  if (!config.max_items.empty() && config.max_items.size() != names.size())
    throw Error("--max-items lists " + std::to_string(config.max_items.size()) +
                " values for " + std::to_string(names.size()) + " columns");
  std::vector<ColumnSpec> schema;
  for (std::size_t i = 0; i < names.size(); ++i) {
    long max_items = 0;
    if (!config.max_items.empty()) {
      max_items = config.max_items[i];
    } else if (const auto it = defaults.find(names[i]); it != defaults.end()) {
      max_items = it->second;
    } else {
      throw Error("no max-items for column '" + names[i] + "' (use --max-items)");
    }
    schema.push_back({names[i], max_items});
  }
  return schema;
}

NormalizedSample load_sample(const RunConfig& config) {
  validate(config);
  return normalize(load_csv(config.input, resolve_schema(config)));
}

LocPipeline pipeline(const RunConfig& config, const LossKind& loss) {
  LocPipeline p;
  p.loss = loss;
  p.grid_size = config.grid_size;
  p.fixed_bandwidth = config.bandwidth;
  p.jitter_sd = config.jitter_sd;
  p.seed = config.seed;
  return p;
}

int cmd_summarize(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sample = load_sample(config);
    std::vector<SummaryStats> stats;
    std::vector<std::vector<std::size_t>> hist;
    for (const auto& column : sample.columns) {
      stats.push_back(summarize(column));
      hist.push_back(histogram(column, config.bins));
    }

    const std::vector<std::pair<std::string, double SummaryStats::*>> rows = {
        {"Minimum", &SummaryStats::min},      {"1st quartile", &SummaryStats::q1},
        {"2nd quartile (median)", &SummaryStats::median},
        {"3rd quartile", &SummaryStats::q3},  {"Mean", &SummaryStats::mean},
        {"Maximum", &SummaryStats::max},      {"Standard deviation", &SummaryStats::sd}};
    const auto& names = sample.column_names;

    if (config.format == OutputFormat::json) {
      json j{{"n", sample.size()}, {"columns", names}, {"bins", config.bins}};
      for (std::size_t c = 0; c < names.size(); ++c) {
        const auto& s = stats[c];
        j["summary"][names[c]] = {{"min", s.min},   {"q1", s.q1},     {"median", s.median},
                                  {"q3", s.q3},     {"mean", s.mean}, {"max", s.max},
                                  {"sd", s.sd}};
        j["histogram"][names[c]] = hist[c];
      }
      out << j.dump(2) << "\n";
    } else if (config.format == OutputFormat::csv) {
      out << "statistic";
      for (const auto& n : names) out << "," << n;
      out << "\n";
      for (const auto& [label, field] : rows) {
        out << label;
        for (const auto& s : stats) out << "," << fixed6(s.*field);
        out << "\n";
      }
      for (std::size_t b = 0; b < config.bins; ++b) {
        out << "bin " << (b + 1);
        for (const auto& h : hist) out << "," << h[b];
        out << "\n";
      }
    } else {
      std::size_t cell = 14;
      for (const auto& n : names) cell = std::max(cell, n.size() + 2);
      out << "Summary statistics (n = " << sample.size() << ")\n";
      out << pad("", 24);
      for (const auto& n : names) out << lpad(n, cell);
      out << "\n";
      for (const auto& [label, field] : rows) {
        out << pad(label, 24);
        for (const auto& s : stats) out << lpad(fixed6(s.*field), cell);
        out << "\n";
      }
      out << "\nFrequency histograms (" << config.bins << " equal-width bins over [min, max])\n";
      for (std::size_t b = 0; b < config.bins; ++b) {
        out << pad("bin " + std::to_string(b + 1), 24);
        for (const auto& h : hist) out << lpad(std::to_string(h[b]), cell);
        out << "\n";
      }
    }
    return exit_code::ok;
  });
}

int cmd_fit(const RunConfig& config, const std::string& x_name, const std::string& y_name,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sample = load_sample(config);
    const auto [xi, yi] = pair_indices(sample, x_name, y_name);
    const auto raw = pair(sample, x_name, y_name);
    const auto jittered = jitter(raw, config.jitter_sd, pair_seed(config.seed, xi, yi));
    const std::string stem = x_name + "_" + y_name;

    {
      auto f = open_output(config, stem + "_scatter.dat");
      f << "# " << x_name << " " << y_name << "\n";
      for (std::size_t i = 0; i < raw.size(); ++i) f << raw.x()[i] << " " << raw.y()[i] << "\n";
    }
    out << "pair: " << x_name << " -> " << y_name << " (n = " << raw.size() << ")\n";
    out << "wrote " << stem << "_scatter.dat\n";

    int status = exit_code::ok;
    for (const auto& loss : {LossKind::quadratic(), LossKind::median()}) {
      const std::string file = stem + "_" + loss.name() + ".dat";
      try {
        const auto result = pair_loc(jittered, pipeline(config, loss));
        const auto& b = result.bandwidth;
        out << loss.name() << " curve: bandwidth " << fixed6(b.value) << " (method "
            << to_string(b.method);
        if (b.diagnostics) {
          out << ", blocks " << b.diagnostics->blocks << ", curvature "
              << b.diagnostics->curvature << ", variance " << b.diagnostics->variance;
          if (b.diagnostics->fallback) out << ", warning: " << b.diagnostics->warning;
        }
        out << "), LOC x1000 " << fixed6(result.value * 1000.0) << "\n";
        auto f = open_output(config, file);
        f << "# t h(t) [" << describe_loss(loss) << "]\n";
        for (std::size_t i = 0; i < result.curve.grid.size(); ++i)
          f << result.curve.grid[i] << " " << std::clamp(result.curve.values[i], 0.0, 1.0) << "\n";
        out << "wrote " << file << "\n";
      } catch (const std::exception& e) {
        err << "error: " << loss.name() << " curve: " << e.what() << "\n";
        status = exit_code::partial_failure;
      }
    }
    return status;
  });
}

int cmd_loc_matrix(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sample = load_sample(config);
    std::vector<LocMatrix> matrices;
    for (const auto& loss : losses(config.loss))
      matrices.push_back(loc_matrix(sample, pipeline(config, loss)));

    std::size_t failures = 0;
    for (const auto& m : matrices) {
      failures += m.failures();
      for (std::size_t i = 0; i < m.labels.size(); ++i)
        for (std::size_t j = 0; j < m.labels.size(); ++j)
          if (!m.entries[i][j])
            err << "error: " << m.loss.name() << " (" << m.labels[i] << ", " << m.labels[j]
                << "): " << m.errors[i][j] << "\n";
    }

    if (config.format == OutputFormat::json) {
      if (matrices.size() == 1) {
        out << matrix_json(matrices.front()).dump(2) << "\n";
      } else {
        json all = json::array();
        for (const auto& m : matrices) all.push_back(matrix_json(m));
        out << all.dump(2) << "\n";
      }
    } else {
      for (std::size_t k = 0; k < matrices.size(); ++k) {
        if (k > 0) out << "\n";
        if (config.format == OutputFormat::csv)
          write_matrix_csv(matrices[k], out);
        else
          write_matrix_table(matrices[k], out);
      }
    }
    return failures == 0 ? exit_code::ok : exit_code::partial_failure;
  });
}

int cmd_compare(const RunConfig& config, const std::string& x_name, const std::string& y_name,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sample = load_sample(config);
    const auto [xi, yi] = pair_indices(sample, x_name, y_name);
    const auto report =
        associate(pair(sample, x_name, y_name), pipeline(config, LossKind::quadratic()), xi, yi);
    for (const auto& note : report.notes) err << "note: " << note << "\n";
    if (report.jittered)
      err << "note: rank coefficients and LOC values use data jittered with sd "
          << config.jitter_sd << "\n";

    const auto optional_json = [](const std::optional<double>& v) -> json {
      return v ? json(*v) : json(nullptr);
    };
    if (config.format == OutputFormat::json) {
      json j{{"x", report.x_name},
             {"y", report.y_name},
             {"pearson", report.pearson},
             {"spearman", report.spearman},
             {"zeta_quadratic", report.zeta_quadratic},
             {"zeta_absolute", report.zeta_absolute},
             {"finite_I", report.finite_I},
             {"rank_loc", report.rank_loc},
             {"rank_identity", report.rank_identity},
             {"loc_mean", optional_json(report.loc_mean)},
             {"loc_median", optional_json(report.loc_median)}};
      out << j.dump(2) << "\n";
    } else {
      const auto scaled = [](const std::optional<double>& v) {
        return v ? fixed6(*v * 1000.0) : std::string("ERROR");
      };
      const std::vector<std::pair<std::string, std::string>> rows = {
          {"pearson", fixed6(report.pearson)},
          {"spearman", fixed6(report.spearman)},
          {"zeta_quadratic", fixed6(report.zeta_quadratic)},
          {"zeta_absolute", fixed6(report.zeta_absolute)},
          {"finite_I", fixed6(report.finite_I)},
          {"rank_loc", fixed6(report.rank_loc)},
          {"rank_identity", report.rank_identity ? "true" : "false"},
          {"loc_mean_x1000", scaled(report.loc_mean)},
          {"loc_median_x1000", scaled(report.loc_median)}};
      if (config.format == OutputFormat::csv) {
        out << "x,y," << x_name << "," << y_name << "\n";
        for (const auto& [k, v] : rows) out << k << "," << v << "\n";
      } else {
        out << "pair: " << x_name << " -> " << y_name << "\n";
        for (const auto& [k, v] : rows) out << pad(k, 20) << lpad(v, 14) << "\n";
      }
    }
    const bool complete = report.loc_mean && report.loc_median && report.rank_identity;
    return complete ? exit_code::ok : exit_code::partial_failure;
  });
}

int cmd_plot_data(const RunConfig& config, const std::string& x_name, const std::string& y_name,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sample = load_sample(config);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (x_name.empty() && y_name.empty()) {
      for (std::size_t i = 0; i < sample.column_names.size(); ++i)
        for (std::size_t j = 0; j < sample.column_names.size(); ++j)
          if (i != j) pairs.emplace_back(i, j);
    } else {
      pairs.push_back(pair_indices(sample, x_name, y_name));
    }

    int status = exit_code::ok;
    for (const auto& [i, j] : pairs) {
      const auto& xn = sample.column_names[i];
      const auto& yn = sample.column_names[j];
      const std::string stem = xn + "_" + yn;
      auto jittered = jitter(pair(sample, xn, yn), config.jitter_sd, pair_seed(config.seed, i, j));
      if (has_ties(jittered.x()) || has_ties(jittered.y())) {
        err << "note: " << stem << ": ties with jitter sd " << config.jitter_sd
            << "; rank data use sd 1e-5\n";
        jittered = jitter(pair(sample, xn, yn), 1e-5, pair_seed(config.seed, i, j));
      }

      const auto ranks = empirical_ranks(jittered);
      {
        auto f = open_output(config, stem + "_ranks.dat");
        f << "# F_n(x) G_n(y)\n";
        for (std::size_t k = 0; k < ranks.fx.size(); ++k) f << ranks.fx[k] << " " << ranks.gy[k] << "\n";
      }
      {
        const auto step = rank_step_function(jittered);
        const auto sorted = increasing_rearrangement(step);
        auto f = open_output(config, stem + "_rank_step.dat");
        f << "# t h0(t) I(t) on ((i-1)/n, i/n]\n";
        const auto n = static_cast<double>(step.pieces());
        for (std::size_t k = 0; k < step.pieces(); ++k)
          f << (static_cast<double>(k) + 1) / n << " " << step.taus()[k] << " " << sorted.taus()[k]
            << "\n";
      }
      out << "wrote " << stem << "_ranks.dat, " << stem << "_rank_step.dat\n";

      for (const auto& loss : {LossKind::quadratic(), LossKind::median()}) {
        const std::string file = stem + "_" + loss.name() + "_rearranged.dat";
        try {
          const auto result = pair_loc(jittered, pipeline(config, loss));
          const auto step = step_from_curve(result.curve);
          const auto sorted = increasing_rearrangement(step);
          auto f = open_output(config, file);
          f << "# t h(t) I(t), t = i/m\n";
          const auto m = static_cast<double>(step.pieces());
          for (std::size_t k = 0; k < step.pieces(); ++k)
            f << (static_cast<double>(k) + 1) / m << " " << step.taus()[k] << " "
              << sorted.taus()[k] << "\n";
          out << "wrote " << file << "\n";
        } catch (const std::exception& e) {
          err << "error: " << stem << " " << loss.name() << ": " << e.what() << "\n";
          status = exit_code::partial_failure;
        }
      }
    }
    return status;
  });
}

}  // namespace comono::cli
