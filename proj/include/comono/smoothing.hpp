#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "comono/bandwidth.hpp"
#include "comono/dataset.hpp"
#include "comono/error.hpp"

namespace comono {

/// Loss used in the local fit: quadratic (conditional mean) or check loss at level tau
/// (tau = 0.5 is the absolute loss, i.e. the conditional median).
class LossKind {
 public:
  enum class Kind { quadratic, quantile };

  static LossKind quadratic() { return LossKind(Kind::quadratic, 0.5); }
  static LossKind quantile(double tau);
  static LossKind median() { return quantile(0.5); }

  Kind kind() const noexcept { return kind_; }
  double tau() const noexcept { return tau_; }
  bool is_quadratic() const noexcept { return kind_ == Kind::quadratic; }

  /// "mean" or "median"; other quantile levels print as "quantile(tau)".
  std::string name() const;

  bool operator==(const LossKind&) const = default;

 private:
  LossKind(Kind kind, double tau) : kind_(kind), tau_(tau) {}
  Kind kind_;
  double tau_;
};

struct FitSpec {
  LossKind loss = LossKind::quadratic();
  BandwidthEstimate bandwidth;
  std::size_t grid_size = 1000;
};

struct FittedCurve {
  std::vector<double> grid;
  std::vector<double> values;
  FitSpec spec;
};

struct LocalLinear {
  double intercept;  // fitted value at x0
  double slope;
};

class SmoothingError : public Error {
 public:
  SmoothingError(const std::string& what, double x0) : Error(what), x0_(x0) {}
  double x0() const noexcept { return x0_; }

 private:
  double x0_;
};

/// Kernel weights exp(-u^2/2), u = (x_i - x0) / bandwidth, with values below 1e-12 set to zero.
std::vector<double> kernel_weights(std::span<const double> x, double x0, double bandwidth);

/// Local linear estimate at x0 under the given loss with a Gaussian kernel.
///
/// Quadratic loss is solved in closed form. Check loss is minimized by
/// iteratively reweighted least squares on the majorizer of
/// sqrt(r^2 + eps^2)/2 + (tau - 1/2) r with eps = 1e-6 range(y), starting
/// from the weighted least-squares solution (at most 200 iterations).
LocalLinear local_linear_fit(const PairedSample& sample, double x0, double bandwidth,
                             const LossKind& loss);

/// Sum of w_i * L(y_i - b0 - b1 (x_i - x0)) with the check loss for quantile kinds
/// and r^2 for the quadratic kind.
double local_objective(const PairedSample& sample, double x0, double bandwidth, const LossKind& loss,
                       const LocalLinear& fit);

/// Equispaced grid of `size` points spanning [lo, hi].
std::vector<double> equispaced_grid(double lo, double hi, std::size_t size);

/// Evaluates the local fit on `spec.grid_size` equispaced points over [min x, max x].
FittedCurve fit_curve(const PairedSample& sample, const FitSpec& spec);

}  // namespace comono
