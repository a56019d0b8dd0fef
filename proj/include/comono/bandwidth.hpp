#pragma once

#include <optional>
#include <string>

#include "comono/dataset.hpp"

namespace comono {

struct KernelConstants {
  double roughness;      // R(K) = integral of K^2
  double second_moment;  // mu_2(K) = integral of u^2 K(u)
};

/// Standard normal kernel: R(K) = 1/(2 sqrt(pi)), mu_2(K) = 1.
KernelConstants normal_kernel();

enum class BandwidthMethod { dpi, median_adjusted, fixed };

std::string to_string(BandwidthMethod method);

struct DpiDiagnostics {
  int blocks = 0;          // block count picked by Mallows' Cp
  double curvature = 0;    // estimate of integral of h''(x)^2 f(x) dx
  double variance = 0;     // residual variance of the blocked quartic fit
  bool fallback = false;   // oversmoothed bandwidth used instead of the plug-in value
  bool floored = false;    // raised to support_floor by the fitting pipeline
  std::string warning;
};

struct BandwidthEstimate {
  double value = 0;
  BandwidthMethod method = BandwidthMethod::fixed;
  std::optional<DpiDiagnostics> diagnostics;
};

BandwidthEstimate fixed_bandwidth(double value);

/// Direct plug-in bandwidth for local linear regression.
///
/// The curvature functional and residual variance come from ordinary
/// least-squares quartic fits on N equal-count blocks of the x-sorted
/// sample, with N in 1..max(min(n/20, 5), 1) chosen by Mallows' Cp:
///
///   b = [ R(K) sigma^2 (max x - min x) / (n mu_2(K)^2 theta_22) ]^(1/5)
///
/// A curvature below 1e-12 (range(y) / range(x)^2)^2 or a vanishing residual
/// variance falls back to range(x) n^(-1/5) and sets a warning.
/// Requires n >= 20 and non-constant x.
BandwidthEstimate dpi_bandwidth(const PairedSample& sample,
                                const KernelConstants& kernel = normal_kernel());

/// A quarter of the widest gap between consecutive distinct x values. Local fits with a
/// smaller bandwidth can leave grid points inside that gap with fewer than two weighted points.
double support_floor(const PairedSample& sample);

/// {tau (1 - tau) / phi(Phi^-1(tau))^2}^(1/5); equals (pi/2)^(1/5) at the median.
double quantile_bandwidth_factor(double tau);

/// Converts a mean-regression bandwidth into one for quantile level tau.
BandwidthEstimate median_adjust(const BandwidthEstimate& b, double tau = 0.5);

}  // namespace comono
