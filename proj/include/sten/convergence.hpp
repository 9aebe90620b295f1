#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sten/types.hpp"

namespace sten {

// Outcome of a refinement study: errors measured over a decreasing sequence
// of step sizes (grid spacing, profile spacing, or epsilon).
struct ConvergenceReport {
  std::vector<double> steps;
  std::vector<double> errors;
  double order = 0.0;       // least-squares slope of log(error) vs log(step)
  double threshold = 0.0;   // order required to pass
  double exact_floor = 0.0; // errors below this count as identically zero
  bool exact = false;       // all errors at or below the floor
  bool pass = false;
};

// Least-squares slope of log(err) against log(step). Zero errors are clamped
// to a tiny positive value so an exact method does not produce NaN; callers
// should detect the exact case separately.
inline double fit_order(std::span<const double> steps, std::span<const double> errors) {
  const std::size_t m = std::min(steps.size(), errors.size());
  if (m < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double x = std::log(steps[k]);
    const double y = std::log(std::max(errors[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(m);
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

inline std::vector<double> pairwise_orders(std::span<const double> steps,
                                           std::span<const double> errors) {
  std::vector<double> orders;
  for (std::size_t k = 0; k + 1 < std::min(steps.size(), errors.size()); ++k) {
    const double num = std::log(std::max(errors[k], 1e-300) / std::max(errors[k + 1], 1e-300));
    const double den = std::log(steps[k] / steps[k + 1]);
    orders.push_back(num / den);
  }
  return orders;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Classify a refinement study: pass if the measured order reaches the
// threshold, or if every error sits at the exact floor (identically zero up
// to roundoff).
inline ConvergenceReport assess_convergence(std::vector<double> steps, std::vector<double> errors,
                                            double order_threshold, double exact_floor = 1e-10) {
  if (steps.size() < 2 || steps.size() != errors.size())
    throw ConfigError("convergence study needs at least two matching step/error entries");
  for (std::size_t k = 0; k + 1 < steps.size(); ++k)
    if (!(steps[k] > steps[k + 1]))
      throw ConfigError("step sequence must be strictly decreasing");
  ConvergenceReport rep;
  rep.steps = std::move(steps);
  rep.errors = std::move(errors);
  rep.threshold = order_threshold;
  rep.exact_floor = exact_floor;
  rep.exact = std::all_of(rep.errors.begin(), rep.errors.end(),
                          [&](double e) { return e <= exact_floor; });
  rep.order = rep.exact ? std::numeric_limits<double>::infinity() : fit_order(rep.steps, rep.errors);
  rep.pass = rep.exact || rep.order >= order_threshold;
  return rep;
}

}  // namespace sten
