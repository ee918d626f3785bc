#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calib/errors.hpp"

namespace calib {

// Pool-adjacent-violators: the exact least-squares projection of `values`
// (already ordered by their keys) onto the nondecreasing cone. Returns one
// fitted level per input position. Optional positive weights.
std::vector<double> pava(std::span<const double> values,
                         std::span<const double> weights = {});

// Piecewise-constant nondecreasing step function from isotonic regression,
// plus an optional strictness slope: g(a) = step(a) + eps * a.
//
// Between breakpoints the step takes the level of the nearest breakpoint at
// or below the query; below the first breakpoint, the first level; above the
// last, the last level.
class IsotonicFn {
public:
  // breakpoints strictly increasing, levels nondecreasing, eps >= 0.
  IsotonicFn(std::vector<double> breakpoints, std::vector<double> levels, double eps);

  // Least-squares isotonic fit of values against keys. Exactly tied keys are
  // pooled to their mean first (a function must map equal inputs equally;
  // the pooled weighted fit is the least-squares optimum over functions).
  static IsotonicFn fit(std::span<const double> keys, std::span<const double> values,
                        double eps);

  double operator()(double a) const { return step_value(a) + eps_ * a; }
  double step_value(double a) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& levels() const { return levels_; }
  double eps() const { return eps_; }

  bool operator==(const IsotonicFn&) const = default;

private:
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
  double eps_;
};

}  // namespace calib
