#include "comono/association.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "comono/error.hpp"

namespace comono {

namespace {

std::vector<std::size_t> ranks_of(std::span<const double> v, const char* which) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && v[order[k]] == v[order[k - 1]])
      throw TieError(std::string("tied ") + which +
                     " values; add negligible noise (jitter) before rank computations");
    rank[order[k]] = k + 1;
  }
  return rank;
}

}  // namespace

Ranks empirical_ranks(const PairedSample& sample) {
  const std::size_t n = sample.size();
  const auto rx = ranks_of(sample.x(), "x");
  const auto ry = ranks_of(sample.y(), "y");
  const auto nd = static_cast<double>(n);
  Ranks r;
  r.fx.resize(n);
  r.gy.resize(n);
  r.induced.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.fx[i] = static_cast<double>(rx[i]) / nd;
    r.gy[i] = static_cast<double>(ry[i]) / nd;
    r.induced[rx[i] - 1] = ry[i];
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: need at least 2 observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw Error("pearson: constant coordinate");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson(const PairedSample& sample) { return pearson(sample.x(), sample.y()); }

namespace {

// Sum over pairs of |rank x - rank y|^power, exact in integers (each term is below n^2).
std::int64_t rank_difference_sum(const Ranks& r, int power) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < r.induced.size(); ++i) {
    const auto d = static_cast<std::int64_t>(i + 1) - static_cast<std::int64_t>(r.induced[i]);
    total += power == 2 ? d * d : (d < 0 ? -d : d);
  }
  return total;
}

}  // namespace

// Pearson correlation of tie-free ranks, 1 - 6 S / (n (n^2 - 1)), as one correctly
// rounded integer ratio.
double spearman(const PairedSample& sample) {
  const auto r = empirical_ranks(sample);
  const auto n = static_cast<std::int64_t>(r.induced.size());
  const std::int64_t denom = n * (n * n - 1);
  return static_cast<double>(denom - 6 * rank_difference_sum(r, 2)) / static_cast<double>(denom);
}

PsiFunction PsiFunction::quadratic() {
  return PsiFunction(Kind::quadratic, [](double u) { return 0.5 * u * u; }, "quadratic");
}

PsiFunction PsiFunction::absolute() {
  return PsiFunction(Kind::absolute, [](double u) { return std::abs(u); }, "absolute");
}

PsiFunction PsiFunction::custom(std::function<double(double)> psi, std::string name) {
  if (!psi) throw Error("custom psi: empty function");
  return PsiFunction(Kind::custom, std::move(psi), std::move(name));
}

double PsiFunction::operator()(double u) const { return f_(u); }

double psi_norm_constant(const PsiFunction& psi) {
  switch (psi.kind()) {
    case PsiFunction::Kind::quadratic: return 1.0 / 12.0;
    case PsiFunction::Kind::absolute: return 1.0 / 3.0;
    case PsiFunction::Kind::custom: break;
  }
  if (psi(0.0) != 0.0) throw Error("psi '" + psi.name() + "' must vanish at 0");
  for (int k = 1; k <= 10; ++k) {
    const double u = k / 10.0;
    const double a = psi(u);
    const double b = psi(-u);
    if (!(a >= 0) || !(b >= 0) || std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
      throw Error("psi '" + psi.name() + "' must be non-negative and symmetric on [-1,1]");
  }
  using boost::math::quadrature::gauss_kronrod;
  const double c = 2.0 * gauss_kronrod<double, 15>::integrate(
                             [&](double u) { return (1.0 - u) * psi(u); }, 0.0, 1.0, 15, 1e-10);
  if (!(c > 0) || !std::isfinite(c))
    throw Error("psi '" + psi.name() + "' has a non-positive normalizing constant");
  return c;
}

double liebscher_zeta(const PairedSample& sample, const PsiFunction& psi) {
  const double c = psi_norm_constant(psi);
  const auto r = empirical_ranks(sample);
  const auto n = static_cast<std::int64_t>(r.induced.size());
  // Rank differences are multiples of 1/n, so the two built-in losses reduce to integer ratios:
  // 1 - 6 S2 / n^3 and 1 - 3 S1 / n^2.
  if (psi.kind() == PsiFunction::Kind::quadratic)
    return static_cast<double>(n * n * n - 6 * rank_difference_sum(r, 2)) /
           static_cast<double>(n * n * n);
  if (psi.kind() == PsiFunction::Kind::absolute)
    return static_cast<double>(n * n - 3 * rank_difference_sum(r, 1)) / static_cast<double>(n * n);
  double total = 0;
  for (std::size_t i = 0; i < r.fx.size(); ++i) total += psi(r.fx[i] - r.gy[i]);
  return 1.0 - total / (c * static_cast<double>(r.fx.size()));
}

double finite_population_I(const PairedSample& sample) {
  const auto r = empirical_ranks(sample);
  const auto total = rank_difference_sum(r, 2);
  const auto n = static_cast<double>(r.induced.size());
  return static_cast<double>(total) / (2.0 * n * n * n);
}

StepFunction rank_step_function(const PairedSample& sample) {
  const auto r = empirical_ranks(sample);
  const auto n = static_cast<double>(r.induced.size());
  std::vector<double> taus(r.induced.size());
  for (std::size_t i = 0; i < taus.size(); ++i) taus[i] = static_cast<double>(r.induced[i]) / n;
  return StepFunction(std::move(taus));
}

std::uint64_t pair_seed(std::uint64_t seed, std::size_t x_index, std::size_t y_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(x_index), static_cast<std::uint32_t>(y_index)};
  std::uint32_t words[2];
  seq.generate(std::begin(words), std::end(words));
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

BandwidthEstimate select_bandwidth(const PairedSample& sample, const LocPipeline& options) {
  if (options.fixed_bandwidth) return fixed_bandwidth(*options.fixed_bandwidth);
  auto b = dpi_bandwidth(sample);
  if (!options.loss.is_quadratic()) b = median_adjust(b, options.loss.tau());
  if (const double floor = support_floor(sample); b.value < floor) {
    b.value = floor;
    b.diagnostics->floored = true;
    if (!b.diagnostics->warning.empty()) b.diagnostics->warning += "; ";
    b.diagnostics->warning += "raised to a quarter of the widest x gap";
  }
  return b;
}

PairLoc pair_loc(const PairedSample& sample, const LocPipeline& options) {
  PairLoc out;
  out.bandwidth = select_bandwidth(sample, options);
  out.curve = fit_curve(sample, FitSpec{options.loss, out.bandwidth, options.grid_size});
  out.value = loc_index(step_from_curve(out.curve)).value;
  return out;
}

std::size_t LocMatrix::failures() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = 0; j < entries[i].size(); ++j)
      if (!entries[i][j]) ++count;
  return count;
}

LocMatrix loc_matrix(const NormalizedSample& sample, const LocPipeline& options) {
  const std::size_t k = sample.column_names.size();
  if (k < 2) throw Error("LOC matrix needs at least 2 columns");

  LocMatrix out;
  out.labels = sample.column_names;
  out.loss = options.loss;
  out.entries.assign(k, std::vector<std::optional<double>>(k));
  out.errors.assign(k, std::vector<std::string>(k));

  struct Task {
    std::size_t i, j;
    std::future<double> value;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < k; ++i) {
    out.entries[i][i] = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      tasks.push_back({i, j, std::async(std::launch::async, [&sample, &options, i, j] {
                         const auto paired =
                             jitter(pair(sample, sample.column_names[i], sample.column_names[j]),
                                    options.jitter_sd, pair_seed(options.seed, i, j));
                         return pair_loc(paired, options).value;
                       })});
    }
  }
  for (auto& task : tasks) {
    try {
      out.entries[task.i][task.j] = task.value.get();
    } catch (const std::exception& e) {
      out.errors[task.i][task.j] = e.what();
    }
  }
  return out;
}

AssociationReport associate(const PairedSample& sample, const LocPipeline& options,
                            std::size_t x_index, std::size_t y_index, bool with_loc) {
  AssociationReport report;
  report.x_name = sample.x_name();
  report.y_name = sample.y_name();
  report.pearson = pearson(sample);

  const auto seed = pair_seed(options.seed, x_index, y_index);
  const auto jittered = jitter(sample, options.jitter_sd, seed);
  PairedSample ranked = jittered;
  if (has_ties(ranked.x()) || has_ties(ranked.y())) {
    ranked = jitter(sample, 1e-5, seed);
    report.notes.push_back("ties present with jitter sd 0; ranks computed after jitter with sd 1e-5");
  }
  report.jittered = options.jitter_sd > 0 || !(ranked == sample);

  report.spearman = spearman(ranked);
  report.zeta_quadratic = liebscher_zeta(ranked, PsiFunction::quadratic());
  report.zeta_absolute = liebscher_zeta(ranked, PsiFunction::absolute());
  report.finite_I = finite_population_I(ranked);
  report.rank_loc = loc_index(rank_step_function(ranked)).value;
  report.rank_identity = std::abs(report.rank_loc - report.finite_I) <=
                         1e-12 * std::max({std::abs(report.finite_I), std::abs(report.rank_loc),
                                           std::numeric_limits<double>::min()});

  if (with_loc) {
    for (const auto& loss : {LossKind::quadratic(), LossKind::median()}) {
      LocPipeline pipeline = options;
      pipeline.loss = loss;
      try {
        const double value = pair_loc(jittered, pipeline).value;
        (loss.is_quadratic() ? report.loc_mean : report.loc_median) = value;
      } catch (const std::exception& e) {
        report.notes.push_back("LOC(" + loss.name() + ") failed: " + e.what());
      }
    }
  }
  return report;
}

}  // namespace comono
