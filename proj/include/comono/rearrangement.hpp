#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comono/smoothing.hpp"

namespace comono {

/// Piecewise-constant function on [0,1]: value taus[i-1] on ((i-1)/m, i/m], and taus[0] at t = 0.
class StepFunction {
 public:
  explicit StepFunction(std::vector<double> taus);

  std::size_t pieces() const noexcept { return taus_.size(); }
  std::span<const double> taus() const noexcept { return taus_; }
  double operator()(double t) const;

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<double> taus_;
};

struct LocValue {
  double value = 0;
  std::size_t m = 0;
};

/// One piece per grid point, in grid order.
StepFunction step_from_curve(const FittedCurve& curve);

/// Lebesgue measure of {t in [0,1] : D(t) <= x}, i.e. #{i : tau_i <= x} / m.
double distribution(const StepFunction& step, double x);

/// Values sorted ascending (stable); the quantile function of `distribution`.
StepFunction increasing_rearrangement(const StepFunction& step);

/// Lack-of-co-monotonicity index of a step function:
///
///   L = (1/m)^2 sum_i i (tau_(i:m) - tau_i)
///
/// where tau_(1:m) <= ... <= tau_(m:m) are the sorted values. Zero exactly
/// when the taus are non-decreasing, positive otherwise.
LocValue loc_index(const StepFunction& step);

struct RefinedLoc {
  double value = 0;
  std::size_t m = 0;
  bool converged = false;
  std::vector<LocValue> history;
  /// Estimate of 2 * integral |D_m - h| at the final m; |L(D_m) - L(h)| is bounded by it.
  std::optional<double> error_bound;
};

/// Evaluates `curve` at piece midpoints for each m in `m_schedule` and returns the last
/// index. `converged` is set when the last two values differ by less than `tol`.
RefinedLoc loc_refined(const std::function<double(double)>& curve,
                       std::span<const std::size_t> m_schedule, double tol);

std::string to_json(const StepFunction& step);
StepFunction step_from_json(const std::string& text);

}  // namespace comono
