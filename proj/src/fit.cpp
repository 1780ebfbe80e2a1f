#include "kpplab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "kpplab/common.hpp"

namespace kpplab {

LinearFit least_squares(const std::vector<std::vector<double>>& cols,
                        const std::vector<double>& y) {
  const std::size_t p = cols.size();
  const std::size_t m = y.size();
  if (p == 0 || m < p) throw NumericError("least_squares: underdetermined system");
  for (const auto& c : cols)
    if (c.size() != m) throw NumericError("least_squares: column length mismatch");

  // normal equations A = X^T X, b = X^T y
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += cols[j][i] * cols[k][i];
      a[j][k] = a[k][j] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += cols[j][i] * y[i];
    b[j] = s;
  }

  // Gauss-Jordan with partial pivoting, keeping the inverse for stderrs.
  std::vector<std::vector<double>> inv(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < p; ++i) inv[i][i] = 1.0;
  double max_pivot = 0.0, min_pivot = 0.0;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t pr = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[pr][c])) pr = r;
    std::swap(a[pr], a[c]);
    std::swap(inv[pr], inv[c]);
    std::swap(b[pr], b[c]);
    const double piv = a[c][c];
    const double apiv = std::fabs(piv);
    if (c == 0) { max_pivot = min_pivot = apiv; }
    max_pivot = std::max(max_pivot, apiv);
    min_pivot = std::min(min_pivot, apiv);
    if (apiv == 0.0 || (max_pivot > 0 && apiv / max_pivot < 1e-14))
      throw NumericError("least_squares: ill-conditioned design matrix");
    for (std::size_t k = 0; k < p; ++k) { a[c][k] /= piv; inv[c][k] /= piv; }
    b[c] /= piv;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < p; ++k) { a[r][k] -= f * a[c][k]; inv[r][k] -= f * inv[c][k]; }
      b[r] -= f * b[c];
    }
  }

  LinearFit out;
  out.coef = b;
  out.condition = (min_pivot > 0) ? max_pivot / min_pivot : 0.0;

  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < p; ++j) pred += b[j] * cols[j][i];
    const double r = y[i] - pred;
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / m);
  const double dof = static_cast<double>(m > p ? m - p : 1);
  const double sigma2 = ss / dof;
  out.stderrs.resize(p);
  for (std::size_t j = 0; j < p; ++j)
    out.stderrs[j] = std::sqrt(std::max(0.0, sigma2 * inv[j][j]));
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw NumericError("median_of: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m % 2 == 1) return values[m / 2];
  return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace kpplab
