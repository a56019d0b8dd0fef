#include "comono/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace comono {

namespace {

constexpr double weight_floor = 1e-12;
constexpr int max_irls_iterations = 200;
constexpr double irls_tolerance = 1e-8;

std::string describe(double x0) {
  std::ostringstream os;
  os.precision(17);
  os << x0;
  return os.str();
}

struct WeightedMoments {
  double total = 0;
  double mean_d = 0;
  double mean_y = 0;
  double sdd = 0;
  double sdy = 0;
};

// Moments of d = x - x0 and y under weights a.
WeightedMoments moments(std::span<const double> d, std::span<const double> y,
                        std::span<const double> a) {
  WeightedMoments m;
  for (std::size_t i = 0; i < d.size(); ++i) {
    m.total += a[i];
    m.mean_d += a[i] * d[i];
    m.mean_y += a[i] * y[i];
  }
  m.mean_d /= m.total;
  m.mean_y /= m.total;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dd = d[i] - m.mean_d;
    m.sdd += a[i] * dd * dd;
    m.sdy += a[i] * dd * (y[i] - m.mean_y);
  }
  return m;
}

double check_loss(double r, double tau) { return r >= 0 ? tau * r : (tau - 1) * r; }

}  // namespace

LossKind LossKind::quantile(double tau) {
  if (!(tau > 0 && tau < 1)) throw Error("quantile level must lie in (0,1)");
  return LossKind(Kind::quantile, tau);
}

std::string LossKind::name() const {
  if (kind_ == Kind::quadratic) return "mean";
  if (tau_ == 0.5) return "median";
  std::ostringstream os;
  os << "quantile(" << tau_ << ")";
  return os.str();
}

std::vector<double> kernel_weights(std::span<const double> x, double x0, double bandwidth) {
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = (x[i] - x0) / bandwidth;
    const double k = std::exp(-0.5 * u * u);
    w[i] = k < weight_floor ? 0.0 : k;
  }
  return w;
}

LocalLinear local_linear_fit(const PairedSample& sample, double x0, double bandwidth,
                             const LossKind& loss) {
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
    throw SmoothingError("bandwidth must be positive and finite", x0);

  const auto xs = sample.x();
  const auto ys = sample.y();
  const auto w = kernel_weights(xs, x0, bandwidth);

  // Support: distinct x values carrying weight.
  std::vector<double> supported;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (w[i] > 0) supported.push_back(xs[i]);
  std::sort(supported.begin(), supported.end());
  if (std::unique(supported.begin(), supported.end()) - supported.begin() < 2)
    throw SmoothingError("fewer than 2 distinct x values carry kernel weight at x0 = " + describe(x0),
                         x0);

  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d[i] = xs[i] - x0;

  const auto m = moments(d, ys, w);
  if (!(m.sdd > 0) || !std::isfinite(m.sdd))
    throw SmoothingError("singular weighted design at x0 = " + describe(x0), x0);
  LocalLinear fit{0, m.sdy / m.sdd};
  fit.intercept = m.mean_y - fit.slope * m.mean_d;
  if (loss.is_quadratic()) return fit;

  const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
  const double range_y = *yhi - *ylo;
  if (range_y == 0) return fit;
  const double eps = 1e-6 * range_y;
  const double shift = loss.tau() - 0.5;

  std::vector<double> a(xs.size());
  for (int iter = 0; iter < max_irls_iterations; ++iter) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * d[i];
      a[i] = w[i] / (2.0 * std::sqrt(r * r + eps * eps));
    }
    // Weighted normal equations of the quadratic majorizer, with the linear
    // term (tau - 1/2) sum w_i r_i folded into the right-hand side.
    const auto am = moments(d, ys, a);
    double wd = 0;
    double wsum = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      wsum += w[i];
      wd += w[i] * (d[i] - am.mean_d);
    }
    if (!(am.sdd > 0) || !std::isfinite(am.sdd))
      throw SmoothingError("singular reweighted design at x0 = " + describe(x0), x0);
    LocalLinear next{0, (am.sdy + shift * wd) / am.sdd};
    next.intercept = am.mean_y + shift * wsum / am.total - next.slope * am.mean_d;

    const double change =
        std::abs(next.intercept - fit.intercept) + bandwidth * std::abs(next.slope - fit.slope);
    fit = next;
    if (change < irls_tolerance * range_y) break;
  }
  return fit;
}

double local_objective(const PairedSample& sample, double x0, double bandwidth, const LossKind& loss,
                       const LocalLinear& fit) {
  const auto xs = sample.x();
  const auto ys = sample.y();
  const auto w = kernel_weights(xs, x0, bandwidth);
  double total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * (xs[i] - x0);
    total += w[i] * (loss.is_quadratic() ? r * r : check_loss(r, loss.tau()));
  }
  return total;
}

std::vector<double> equispaced_grid(double lo, double hi, std::size_t size) {
  if (size < 2) throw Error("grid needs at least 2 points");
  if (!(hi > lo)) throw Error("grid interval is empty");
  std::vector<double> grid(size);
  const double step = (hi - lo) / static_cast<double>(size - 1);
  for (std::size_t i = 0; i < size; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

FittedCurve fit_curve(const PairedSample& sample, const FitSpec& spec) {
  if (sample.size() < 4) throw Error("curve fitting needs at least 4 observations");
  const auto [lo, hi] = std::minmax_element(sample.x().begin(), sample.x().end());

  FittedCurve curve;
  curve.spec = spec;
  curve.grid = equispaced_grid(*lo, *hi, spec.grid_size);
  curve.values.resize(curve.grid.size());
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    try {
      curve.values[i] =
          local_linear_fit(sample, curve.grid[i], spec.bandwidth.value, spec.loss).intercept;
    } catch (const SmoothingError& e) {
      throw SmoothingError("grid point " + std::to_string(i) + ": " + e.what(), e.x0());
    }
  }
  return curve;
}

}  // namespace comono
