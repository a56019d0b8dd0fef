#include "comono/bandwidth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "comono/error.hpp"

namespace comono {

namespace {

constexpr int quartic_terms = 5;

struct BlockFit {
  double rss = 0;
  double curvature_sum = 0;  // sum of h''(x_i)^2 over the sample
};

// Quartic OLS fits on `blocks` equal-count blocks of the x-sorted sample.
BlockFit fit_blocks(const std::vector<double>& x, const std::vector<double>& y, int blocks) {
  const std::size_t n = x.size();
  const std::size_t per_block = n / static_cast<std::size_t>(blocks);
  BlockFit out;
  for (int j = 0; j < blocks; ++j) {
    const std::size_t lo = static_cast<std::size_t>(j) * per_block;
    const std::size_t hi = j + 1 == blocks ? n : lo + per_block;
    const std::size_t len = hi - lo;

    const double xmin = x[lo];
    const double xmax = x[hi - 1];
    const double center = 0.5 * (xmin + xmax);
    const double half = 0.5 * (xmax - xmin);

    if (half == 0) {
      const double mean = std::accumulate(y.begin() + lo, y.begin() + hi, 0.0) / len;
      for (std::size_t i = lo; i < hi; ++i) out.rss += (y[i] - mean) * (y[i] - mean);
      continue;
    }

    Eigen::MatrixXd design(len, quartic_terms);
    Eigen::VectorXd rhs(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double u = (x[lo + i] - center) / half;
      double p = 1;
      for (int k = 0; k < quartic_terms; ++k, p *= u) design(i, k) = p;
      rhs(i) = y[lo + i];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd resid = rhs - design * coef;
    out.rss += resid.squaredNorm();
    for (std::size_t i = 0; i < len; ++i) {
      const double u = design(i, 1);
      const double d2 = (2 * coef(2) + 6 * coef(3) * u + 12 * coef(4) * u * u) / (half * half);
      out.curvature_sum += d2 * d2;
    }
  }
  return out;
}

}  // namespace

KernelConstants normal_kernel() {
  return {1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1.0};
}

std::string to_string(BandwidthMethod method) {
  switch (method) {
    case BandwidthMethod::dpi: return "dpi";
    case BandwidthMethod::median_adjusted: return "median_adjusted";
    case BandwidthMethod::fixed: return "fixed";
  }
  return "unknown";
}

BandwidthEstimate fixed_bandwidth(double value) {
  if (!(value > 0) || !std::isfinite(value)) throw Error("bandwidth must be positive and finite");
  return {value, BandwidthMethod::fixed, std::nullopt};
}

BandwidthEstimate dpi_bandwidth(const PairedSample& sample, const KernelConstants& kernel) {
  if (!(kernel.roughness > 0) || !(kernel.second_moment > 0))
    throw Error("kernel constants must be positive");
  const std::size_t n = sample.size();
  if (n < 20) throw Error("dpi bandwidth needs at least 20 observations, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto xs = sample.x();
  const auto ys = sample.y();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = xs[order[i]];
    y[i] = ys[order[i]];
  }

  const double range_x = x.back() - x.front();
  if (!(range_x > 0)) throw Error("dpi bandwidth: x is constant");
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double range_y = *ymax - *ymin;
  const double nd = static_cast<double>(n);

  const int max_blocks = std::max(std::min(static_cast<int>(n / 20), 5), 1);
  std::vector<BlockFit> fits;
  for (int b = 1; b <= max_blocks; ++b) fits.push_back(fit_blocks(x, y, b));

  int blocks = 1;
  const double rss_max = fits.back().rss;
  if (rss_max > 0) {
    const double scale = rss_max / (nd - quartic_terms * max_blocks);
    double best = 0;
    for (int b = 1; b <= max_blocks; ++b) {
      const double cp = fits[b - 1].rss / scale - (nd - 2.0 * quartic_terms * b);
      if (b == 1 || cp < best) {
        best = cp;
        blocks = b;
      }
    }
  }

  DpiDiagnostics diag;
  diag.blocks = blocks;
  diag.curvature = fits[blocks - 1].curvature_sum / nd;
  diag.variance = fits[blocks - 1].rss / (nd - quartic_terms * blocks);

  const double curvature_floor = 1e-12 * std::pow(range_y / (range_x * range_x), 2);
  const double variance_floor = 1e-20 * range_y * range_y;
  double value = 0;
  if (!(diag.curvature > curvature_floor)) {
    diag.fallback = true;
    diag.warning = "curvature estimate below floor; using oversmoothed bandwidth";
  } else if (!(diag.variance > variance_floor)) {
    diag.fallback = true;
    diag.warning = "residual variance negligible; using oversmoothed bandwidth";
  } else {
    value = std::pow(kernel.roughness * diag.variance * range_x /
                         (nd * kernel.second_moment * kernel.second_moment * diag.curvature),
                     0.2);
  }
  if (diag.fallback) value = range_x * std::pow(nd, -0.2);
  return {value, BandwidthMethod::dpi, diag};
}

double support_floor(const PairedSample& sample) {
  std::vector<double> x(sample.x().begin(), sample.x().end());
  std::sort(x.begin(), x.end());
  double widest = 0;
  for (std::size_t i = 1; i < x.size(); ++i) widest = std::max(widest, x[i] - x[i - 1]);
  return 0.25 * widest;
}

double quantile_bandwidth_factor(double tau) {
  if (!(tau > 0 && tau < 1)) throw Error("quantile level must lie in (0,1)");
  const boost::math::normal_distribution<double> standard;
  const double z = boost::math::quantile(standard, tau);
  const double density = boost::math::pdf(standard, z);
  return std::pow(tau * (1 - tau) / (density * density), 0.2);
}

BandwidthEstimate median_adjust(const BandwidthEstimate& b, double tau) {
  if (!(b.value > 0)) throw Error("bandwidth must be positive");
  BandwidthEstimate out = b;
  out.value = b.value * quantile_bandwidth_factor(tau);
  out.method = BandwidthMethod::median_adjusted;
  return out;
}

}  // namespace comono
