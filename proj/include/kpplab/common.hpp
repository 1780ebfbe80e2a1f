// common.hpp - shared small types: error categories, 1-D uniform grid,
// tridiagonal solver used by all implicit sweeps.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpplab {

// Error taxonomy mirrors the CLI exit codes: config -> 2, numerics -> 3, io -> 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Uniform node-centered grid on [x_min, x_max], n nodes inclusive of both ends.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n = 2;

  double dx() const { return (x_max - x_min) / (n - 1); }
  double x(int i) const { return x_min + i * dx(); }

  bool operator==(const Grid1D& o) const {
    return x_min == o.x_min && x_max == o.x_max && n == o.n;
  }
};

// Solves a tridiagonal system in place (Thomas algorithm).
// lower[0] and upper[n-1] are unused. rhs is overwritten with the solution.
inline void solve_tridiag(const std::vector<double>& lower,
                          std::vector<double> diag,
                          const std::vector<double>& upper,
                          std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

// Linear interpolation on a sorted table; clamps outside the range.
double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x);

// Cubic (4-point Lagrange) interpolation on a uniform grid; falls back to
// linear near the edges. xs must be uniform and ascending.
double interp_cubic_uniform(const std::vector<double>& xs, const std::vector<double>& ys, double x);

inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  std::size_t lo = 0, hi = xs.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (xs[mid] <= x) lo = mid; else hi = mid;
  }
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - t) * ys[lo] + t * ys[hi];
}

inline double interp_cubic_uniform(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t n = xs.size();
  if (n < 4) return interp_linear(xs, ys, x);
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const double h = xs[1] - xs[0];
  std::size_t i = static_cast<std::size_t>((x - xs[0]) / h);
  if (i >= n - 1) i = n - 2;
  if (i == 0 || i >= n - 2) {  // linear fallback at the edges
    const double t = (x - xs[i]) / h;
    return (1.0 - t) * ys[i] + t * ys[i + 1];
  }
  // 4-point stencil centered on the interval [i, i+1]
  const double t = (x - xs[i]) / h;  // in [0,1]
  const double ym = ys[i - 1], y0 = ys[i], y1 = ys[i + 1], y2 = ys[i + 2];
  const double a = y0;
  const double b = (-ym / 3.0 - y0 / 2.0 + y1 - y2 / 6.0);
  const double c = (ym - 2.0 * y0 + y1) / 2.0;
  const double d = (-ym + 3.0 * y0 - 3.0 * y1 + y2) / 6.0;
  return a + t * (b + t * (c + t * d));
}

}  // namespace kpplab
