#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comono/dataset.hpp"
#include "comono/rearrangement.hpp"
#include "comono/smoothing.hpp"

namespace comono {

/// Empirical-cdf ranks of a tie-free paired sample.
struct Ranks {
  std::vector<double> fx;  // F_n(x_i) = rank(x_i) / n
  std::vector<double> gy;  // G_n(y_i) = rank(y_i) / n
  /// r_i = n G_n(y) for the pair holding the i-th smallest x (1-based values).
  std::vector<std::size_t> induced;
};

/// Throws TieError if any two x values or any two y values coincide.
Ranks empirical_ranks(const PairedSample& sample);

double pearson(std::span<const double> x, std::span<const double> y);
double pearson(const PairedSample& sample);

/// Pearson correlation of the empirical-cdf ranks.
double spearman(const PairedSample& sample);

/// Penalty psi in Liebscher's coefficient; psi >= 0, psi(0) = 0, symmetric on [-1,1].
class PsiFunction {
 public:
  enum class Kind { quadratic, absolute, custom };

  static PsiFunction quadratic();  // u^2 / 2
  static PsiFunction absolute();   // |u|
  static PsiFunction custom(std::function<double(double)> psi, std::string name = "custom");

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double operator()(double u) const;

 private:
  PsiFunction(Kind kind, std::function<double(double)> f, std::string name)
      : kind_(kind), f_(std::move(f)), name_(std::move(name)) {}
  Kind kind_;
  std::function<double(double)> f_;
  std::string name_;
};

/// c_psi = 2 integral_0^1 (1 - u) psi(u) du; closed form for the built-ins,
/// adaptive Gauss-Kronrod quadrature (1e-10) for custom penalties.
double psi_norm_constant(const PsiFunction& psi);

/// zeta = 1 - (1 / c_psi) (1/n) sum psi(F_n(x_i) - G_n(y_i)). Symmetric in x and y.
double liebscher_zeta(const PairedSample& sample, const PsiFunction& psi);

/// I = (1 / 2n^3) sum (i - r_i)^2 over the induced ranks.
double finite_population_I(const PairedSample& sample);

/// Step function with m = n pieces and values r_i / n; its LOC index equals finite_population_I.
StepFunction rank_step_function(const PairedSample& sample);

/// Per-pair seed derived from a master seed and the ordered pair of column indices.
std::uint64_t pair_seed(std::uint64_t seed, std::size_t x_index, std::size_t y_index);

struct LocPipeline {
  LossKind loss = LossKind::quadratic();
  std::size_t grid_size = 1000;
  std::optional<double> fixed_bandwidth;
  double jitter_sd = 1e-5;
  std::uint64_t seed = 0;
};

struct PairLoc {
  double value = 0;
  BandwidthEstimate bandwidth;
  FittedCurve curve;
};

/// Bandwidth (fixed, or DPI; median-adjusted for quantile loss) -> fit -> step function -> LOC.
/// The sample is used as given; jittering is the caller's concern.
BandwidthEstimate select_bandwidth(const PairedSample& sample, const LocPipeline& options);
PairLoc pair_loc(const PairedSample& sample, const LocPipeline& options);

struct LocMatrix {
  std::vector<std::string> labels;
  LossKind loss = LossKind::quadratic();
  /// entries[i][j]: LOC with column i as x and column j as y; empty on failure.
  std::vector<std::vector<std::optional<double>>> entries;
  std::vector<std::vector<std::string>> errors;

  std::size_t failures() const;
};

/// All ordered column pairs. Each off-diagonal pair is jittered with pair_seed(seed, i, j);
/// the diagonal is 0. Pairs are evaluated concurrently; results do not depend on scheduling.
LocMatrix loc_matrix(const NormalizedSample& sample, const LocPipeline& options);

struct AssociationReport {
  std::string x_name;
  std::string y_name;
  double pearson = 0;
  double spearman = 0;
  double zeta_quadratic = 0;
  double zeta_absolute = 0;
  double finite_I = 0;
  double rank_loc = 0;          // LOC of rank_step_function
  bool rank_identity = false;   // rank_loc == finite_I to 1e-12 relative
  bool jittered = false;        // ties were broken before the rank computations
  std::optional<double> loc_mean;
  std::optional<double> loc_median;
  std::vector<std::string> notes;
};

/// Pearson on the sample as given; rank coefficients and LOC values on the sample jittered
/// with pair_seed(options.seed, x_index, y_index) (ties with jitter_sd = 0 fall back to 1e-5).
AssociationReport associate(const PairedSample& sample, const LocPipeline& options,
                            std::size_t x_index, std::size_t y_index, bool with_loc = true);

}  // namespace comono
