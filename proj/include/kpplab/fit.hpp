// fit.hpp - small dense least-squares helper shared by the front-position
// fits, tail-constant fits and Monte Carlo regressions.
#pragma once

#include <cstddef>
#include <vector>

namespace kpplab {

struct LinearFit {
  std::vector<double> coef;    // fitted coefficients, one per column
  std::vector<double> stderrs; // per-coefficient standard errors
  double rms_residual = 0.0;
  double condition = 0.0;      // crude condition estimate of X^T X
};

// Ordinary least squares: y ~ sum_j coef[j] * cols[j].
// Throws NumericError when the normal equations are numerically singular
// (ill-conditioned design matrix).
LinearFit least_squares(const std::vector<std::vector<double>>& cols,
                        const std::vector<double>& y);

// Median with the midpoint-interpolated order statistic (mean of the two
// central values for even sample sizes). Copies its input.
double median_of(std::vector<double> values);

}  // namespace kpplab
