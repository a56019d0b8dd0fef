#include "comono/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "comono/error.hpp"

namespace comono {

namespace {

// Neumaier compensated summation; the LOC sum mixes terms of both signs.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      compensation_ += (sum_ - t) + v;
    else
      compensation_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0;
  double compensation_ = 0;
};

}  // namespace

StepFunction::StepFunction(std::vector<double> taus) : taus_(std::move(taus)) {
  if (taus_.empty()) throw Error("step function needs at least one piece");
  for (double t : taus_)
    if (!std::isfinite(t)) throw Error("step function values must be finite");
}

double StepFunction::operator()(double t) const {
  const auto m = static_cast<double>(taus_.size());
  if (t <= 0) return taus_.front();
  const auto i = static_cast<std::size_t>(std::ceil(t * m));
  return taus_[std::clamp<std::size_t>(i, 1, taus_.size()) - 1];
}

StepFunction step_from_curve(const FittedCurve& curve) { return StepFunction(curve.values); }

double distribution(const StepFunction& step, double x) {
  const auto taus = step.taus();
  const auto count = std::count_if(taus.begin(), taus.end(), [x](double t) { return t <= x; });
  return static_cast<double>(count) / static_cast<double>(taus.size());
}

StepFunction increasing_rearrangement(const StepFunction& step) {
  std::vector<double> sorted(step.taus().begin(), step.taus().end());
  std::stable_sort(sorted.begin(), sorted.end());
  return StepFunction(std::move(sorted));
}

LocValue loc_index(const StepFunction& step) {
  const auto taus = step.taus();
  const auto sorted = increasing_rearrangement(step);
  const auto ordered = sorted.taus();
  CompensatedSum sum;
  for (std::size_t i = 0; i < taus.size(); ++i)
    sum.add(static_cast<double>(i + 1) * (ordered[i] - taus[i]));
  const auto m = static_cast<double>(taus.size());
  // The exact sum is non-negative; clamp residual rounding.
  return {std::max(sum.value(), 0.0) / (m * m), taus.size()};
}

RefinedLoc loc_refined(const std::function<double(double)>& curve,
                       std::span<const std::size_t> m_schedule, double tol) {
  if (m_schedule.empty()) throw Error("refinement schedule is empty");
  if (!(tol > 0)) throw Error("refinement tolerance must be positive");
  for (std::size_t k = 0; k < m_schedule.size(); ++k) {
    if (m_schedule[k] == 0) throw Error("refinement schedule entries must be positive");
    if (k > 0 && m_schedule[k] <= m_schedule[k - 1])
      throw Error("refinement schedule must be increasing");
  }

  RefinedLoc out;
  std::vector<double> taus;
  for (std::size_t m : m_schedule) {
    taus.resize(m);
    const auto md = static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) taus[i] = curve((static_cast<double>(i) + 0.5) / md);
    out.history.push_back(loc_index(StepFunction(taus)));
  }
  out.value = out.history.back().value;
  out.m = out.history.back().m;
  out.converged = out.history.size() >= 2 &&
                  std::abs(out.history.back().value - out.history[out.history.size() - 2].value) < tol;

  // Composite Simpson with 4 panels per piece; the midpoint, where D_m meets h, is a node.
  const std::size_t m = out.m;
  const auto md = static_cast<double>(m);
  double integral = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / md;
    const double h = 1.0 / (4.0 * md);
    const double tau = taus[i];
    double piece = 0;
    for (int k = 0; k <= 4; ++k) {
      const double coef = (k == 0 || k == 4) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      piece += coef * std::abs(tau - curve(a + k * h));
    }
    integral += piece * h / 3.0;
  }
  if (std::isfinite(integral)) out.error_bound = 2.0 * integral;
  return out;
}

std::string to_json(const StepFunction& step) {
  return nlohmann::json(std::vector<double>(step.taus().begin(), step.taus().end())).dump();
}

StepFunction step_from_json(const std::string& text) {
  try {
    return StepFunction(nlohmann::json::parse(text).get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("step function JSON: ") + e.what());
  }
}

}  // namespace comono
