#include "kpplab/wave_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpplab/fit.hpp"

namespace kpplab {

namespace {

constexpr double kLeftRate = 0.41421356237309515;  // sqrt(2) - 1

// Discrete residual of the wave system. The interior rows discretize
// phi'' + 2 phi' + phi with the exponentially fitted stencil
//     [e^{-h} phi_{i-1} - 2 phi_i + e^{h} phi_{i+1}] / (2 cosh h - 2),
// the plain central second difference for chi = e^{xi} phi normalized so the
// stencil is exact on 1, e^{-xi} and xi e^{-xi} while staying second-order
// consistent. A naive central advection splits the degenerate tail root by
// O(h) and corrupts the tail constants.
void wave_residual(const std::vector<double>& xi, const std::vector<double>& phi,
                   double pin_value, std::vector<double>& F) {
  const int n = static_cast<int>(phi.size());
  const double h = xi[1] - xi[0];
  const double em = std::exp(-h), ep = std::exp(h);
  const double D = em + ep - 2.0;
  F.resize(n);
  F[0] = (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h) - kLeftRate * (phi[0] - 1.0);
  for (int i = 1; i < n - 1; ++i) {
    F[i] = (em * phi[i - 1] - 2.0 * phi[i] + ep * phi[i + 1]) / D
         - phi[i] * phi[i];
  }
  // relative-scaled Dirichlet pin to the tail ansatz value; this fixes the
  // translate strongly (a Robin closure is translation-insensitive and lets
  // Newton drift along the wave family)
  F[n - 1] = phi[n - 1] / pin_value - 1.0;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Newton step for the wave system. The Jacobian is tridiagonal except for
// one extra entry in each BC row (the 3-point one-sided derivatives); those
// corners are eliminated against the adjacent interior rows first.
void wave_newton_step(const std::vector<double>& xi, const std::vector<double>& phi,
                      double pin_value, const std::vector<double>& F,
                      std::vector<double>& step) {
  const int n = static_cast<int>(phi.size());
  const double h = xi[1] - xi[0];
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = -F[i];

  di[0] = -3.0 / (2.0 * h) - kLeftRate;
  up[0] = 4.0 / (2.0 * h);
  double corner0 = -1.0 / (2.0 * h);  // coefficient of phi[2] in row 0

  const double em = std::exp(-h), ep = std::exp(h);
  const double D = em + ep - 2.0;
  for (int i = 1; i < n - 1; ++i) {
    lo[i] = em / D;
    di[i] = -2.0 / D - 2.0 * phi[i];
    up[i] = ep / D;
  }

  di[n - 1] = 1.0 / pin_value;
  lo[n - 1] = 0.0;

  // eliminate corner0 using row 1 (which has columns 0,1,2)
  {
    const double f = corner0 / up[1];
    di[0] -= f * lo[1];
    up[0] -= f * di[1];
    rhs[0] -= f * rhs[1];
  }

  solve_tridiag(lo, di, up, rhs);
  step = std::move(rhs);
}

struct TailLineFit {
  double a = 0.0, b = 0.0;
};

// Least squares e^xi*phi ~ a*xi + b over [wlo, whi]. Used for the amplitude
// normalization, on a window placed far enough right that the nonlinear
// remainder (which still reaches ~0.08 at xi = 6) is negligible.
TailLineFit fit_tail_line(const std::vector<double>& xi, const std::vector<double>& phi,
                          double wlo, double whi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] < wlo || xi[i] > whi) continue;
    xs.push_back(xi[i]);
    ys.push_back(std::exp(xi[i]) * phi[i]);
  }
  if (xs.size() < 8) throw NumericError("solve_wave: tail-fit window has too few nodes");
  std::vector<double> ones(xs.size(), 1.0);
  auto fit = least_squares({xs, ones}, ys);
  return {fit.coef[0], fit.coef[1]};
}

}  // namespace

WaveProfile solve_wave(double half_width, int n, double tol, const SolveWaveOptions& opts) {
  if (half_width < 20.0) throw ConfigError("solve_wave: half_width must be >= 20");
  if (n < 200) throw ConfigError("solve_wave: n must be >= 200");
  if (!(tol > 0.0)) throw ConfigError("solve_wave: tol must be positive");

  // Solve on a window extended to the left (so the profile reaches 1 well
  // within tolerance) and slightly to the right of the requested half-width.
  const double xi_lo = -(half_width + 17.0);
  const double xi_hi = half_width + 3.0;
  std::vector<double> xi(n);
  const double h = (xi_hi - xi_lo) / (n - 1);
  for (int i = 0; i < n; ++i) xi[i] = xi_lo + i * h;
  const double pin_value = xi_hi * std::exp(-xi_hi);

  // Composite seed with the correct right tail: 1 on the left of the kink,
  // (1+s)e^{-s} beyond it, kink placed where the Robin-pinned translate sits.
  std::vector<double> phi(n);
  for (int i = 0; i < n; ++i) {
    const double s = xi[i] + 3.2;
    phi[i] = (s <= 0.0) ? 1.0 : (1.0 + s) * std::exp(-s);
  }

  std::vector<double> F, step, trial(n);
  wave_residual(xi, phi, pin_value, F);
  double fnorm = sup_norm(F);
  const double target = std::min(tol * 1e-3, 1e-10);
  bool converged = false;
  for (int it = 0; it < opts.max_newton_iters; ++it) {
    if (fnorm <= target) { converged = true; break; }
    wave_newton_step(xi, phi, pin_value, F, step);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      for (int i = 0; i < n; ++i) trial[i] = phi[i] + lambda * step[i];
      std::vector<double> Ft;
      wave_residual(xi, trial, pin_value, Ft);
      const double fn = sup_norm(Ft);
      if (fn < fnorm) {
        phi.swap(trial);
        F.swap(Ft);
        fnorm = fn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (fnorm <= tol) converged = true;
  if (!converged)
    throw NumericError("solve_wave: Newton iteration did not converge (residual " +
                       std::to_string(fnorm) + ")");

  for (int i = 1; i < n - 1; ++i) {
    if (phi[i] <= 0.0 || phi[i] >= 1.0)
      throw NumericError("solve_wave: profile left (0,1); discretization too coarse");
  }

  // Amplitude normalization: relabel the grid so the fitted tail slope of
  // e^xi*phi is 1. The normalization fit sits on [12, half_width+2], to the
  // right of the nonlinear remainder; iterated because the window is tied to
  // the final labels.
  const double wlo = opts.fit_window_lo;
  const double whi = (opts.fit_window_hi > 0.0) ? opts.fit_window_hi : 0.6 * half_width;
  const double nlo = opts.norm_window_lo;
  const double nhi = (opts.norm_window_hi > 0.0) ? opts.norm_window_hi : half_width + 2.0;
  TailLineFit tf{};
  for (int pass = 0; pass < 8; ++pass) {
    tf = fit_tail_line(xi, phi, nlo, nhi);
    const double delta = std::log(tf.a);
    if (std::fabs(delta) < 1e-10) break;
    for (int i = 0; i < n; ++i) xi[i] -= delta;
  }

  WaveProfile out;
  out.xi_grid = std::move(xi);
  out.phi = std::move(phi);
  out.a_tail = tf.a;
  out.k_tail = tf.b / tf.a;
  out.fit_window_lo = wlo;
  out.fit_window_hi = whi;
  out.half_width = half_width;
  out.solve_tol = tol;

  // Interior ODE residual of the returned tabulation (BC rows excluded).
  std::vector<double> Ff;
  wave_residual(out.xi_grid, out.phi, pin_value, Ff);
  double rn = 0.0;
  for (int i = 1; i < n - 1; ++i) rn = std::max(rn, std::fabs(Ff[i]));
  out.residual_norm = rn;

  out.omega_fit = tail_constants(out, wlo, whi).omega;
  return out;
}

TailFit tail_constants(const WaveProfile& profile, double window_lo, double window_hi) {
  if (window_hi - window_lo < 5.0)
    throw ConfigError("tail_constants: window length must be >= 5");
  std::vector<double> xs, ys;  // ys = e^xi*phi - xi
  for (std::size_t i = 0; i < profile.xi_grid.size(); ++i) {
    const double x = profile.xi_grid[i];
    if (x < window_lo || x > window_hi) continue;
    xs.push_back(x);
    ys.push_back(std::exp(x) * profile.phi[i] - x);
  }
  if (xs.size() < 8) throw ConfigError("tail_constants: window outside the resolved grid");

  // Seed k from the right third of the window (least contaminated by the
  // remainder), then alternate: fit the remainder model s*C*e^{-omega xi}
  // against the current k, refit k with the remainder subtracted.
  double k = 0.0;
  {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 2 * xs.size() / 3; i < xs.size(); ++i) { sum += ys[i]; ++cnt; }
    k = sum / cnt;
  }

  auto fit_remainder = [&](double kk, double& omega, double& C, double& s) -> bool {
    // the regression only trusts nodes safely above the floor set by
    // discretization error, estimated from the right end of the window
    std::vector<double> tailabs;
    for (std::size_t i = 5 * xs.size() / 6; i < xs.size(); ++i)
      tailabs.push_back(std::fabs(ys[i] - kk));
    std::sort(tailabs.begin(), tailabs.end());
    const double floor_est = tailabs.empty() ? 0.0 : tailabs[tailabs.size() / 2];
    const double cutoff = 8.0 * floor_est + 1e-11;

    std::vector<double> lx, ly;
    double ssign = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - kk;
      if (std::fabs(r) <= cutoff) continue;
      lx.push_back(xs[i]);
      ly.push_back(std::log(std::fabs(r)));
      ssign += (r > 0 ? 1.0 : -1.0);
    }
    if (lx.size() < 8)
      return false;  // remainder at the noise floor on most of the window
    std::vector<double> ones(lx.size(), 1.0);
    auto lf = least_squares({lx, ones}, ly);
    omega = -lf.coef[0];
    C = std::exp(lf.coef[1]);
    s = (ssign >= 0 ? 1.0 : -1.0);
    return true;
  };

  double omega = 0.0, C = 0.0, s = 1.0;
  if (!fit_remainder(k, omega, C, s))
    throw NumericError("tail_constants: remainder below the floating-point noise floor");

  for (int pass = 0; pass < 4; ++pass) {
    if (!(omega > 0.05 && omega < 6.0)) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      sum += ys[i] - s * C * std::exp(-omega * xs[i]);
    k = sum / xs.size();
    double o2, C2, s2;
    if (!fit_remainder(k, o2, C2, s2)) break;
    omega = o2;
    C = C2;
    s = s2;
  }
  return {k, omega};
}

double eval_wave(const WaveProfile& profile, double xi) {
  if (xi <= profile.xi_min()) return 1.0;
  if (xi >= profile.xi_max())
    return profile.a_tail * (xi + profile.k_tail) * std::exp(-xi);
  return interp_cubic_uniform(profile.xi_grid, profile.phi, xi);
}

double wave_inverse(const WaveProfile& profile, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("wave_inverse: level must be in (0,1)");
  double lo = profile.xi_min(), hi = profile.xi_max();
  if (eval_wave(profile, lo) < level || eval_wave(profile, hi) > level)
    throw NumericError("wave_inverse: level not bracketed by the profile range");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval_wave(profile, mid) > level) lo = mid; else hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::fabs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

// e^{x} * phi(x + zeta), evaluated in tail form when x + zeta is beyond the
// tabulated grid so huge e^{x} factors never appear explicitly.
double matched_lhs(const WaveProfile& p, double x, double zeta) {
  const double arg = x + zeta;
  if (arg >= p.xi_max())
    return p.a_tail * (arg + p.k_tail) * std::exp(-zeta);
  return std::exp(x) * eval_wave(p, arg);
}

}  // namespace

double match_shift_asymptotic(double alpha, double gamma, double t, double k_tail) {
  const double la = std::log(alpha);
  return -la - (la - k_tail) * std::pow(t, -gamma);
}

double match_residual(double alpha, double gamma, double t,
                      const WaveProfile& profile, double zeta) {
  const double x = std::pow(t, gamma);
  const double rhs = alpha * x * std::exp(-std::pow(t, 2.0 * gamma - 1.0) / 4.0);
  return matched_lhs(profile, x, zeta) - rhs;
}

double match_shift(double alpha, double gamma, double t, const WaveProfile& profile) {
  if (!(alpha > 0.0)) throw ConfigError("match_shift: alpha must be positive");
  if (!(gamma > 0.0 && gamma < 0.5)) throw ConfigError("match_shift: gamma must be in (0,1/2)");
  if (!(t >= 2.0)) throw ConfigError("match_shift: t must be >= 2");

  const double x = std::pow(t, gamma);
  const double rhs = alpha * x * std::exp(-std::pow(t, 2.0 * gamma - 1.0) / 4.0);
  auto g = [&](double z) { return matched_lhs(profile, x, z) - rhs; };

  double z0 = match_shift_asymptotic(alpha, gamma, t, profile.k_tail);
  double lo = z0 - 1.0, hi = z0 + 1.0;
  double glo = g(lo), ghi = g(hi);
  int expand = 0;
  while (glo * ghi > 0.0) {
    lo -= 1.0;
    hi += 1.0;
    glo = g(lo);
    ghi = g(hi);
    if (++expand > 40)
      throw NumericError("match_shift: no sign change in bracketing interval "
                         "(alpha out of admissible range)");
  }
  // bisection with a secant accelerant; LHS is monotone decreasing in zeta
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (std::fabs(ghi - glo) > 0.0) {
      const double sec = lo - glo * (hi - lo) / (ghi - glo);
      if (sec > lo && sec < hi) mid = sec;
    }
    const double gm = g(mid);
    if (std::fabs(gm) <= 1e-13 * std::max(1.0, std::fabs(rhs)) && (hi - lo) < 1e-12)
      return mid;
    if (gm * glo <= 0.0) { hi = mid; ghi = gm; }
    else { lo = mid; glo = gm; }
    if (hi - lo < 1e-15 * std::max(1.0, std::fabs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

MatchedWave build_matched_wave(double alpha, double gamma,
                               const std::vector<double>& times,
                               const WaveProfile& profile) {
  MatchedWave mw;
  mw.alpha = alpha;
  mw.gamma = gamma;
  for (double t : times) {
    mw.zeta_of_t.emplace_back(t, match_shift(alpha, gamma, t, profile));
    mw.asymptotic_zeta.push_back(match_shift_asymptotic(alpha, gamma, t, profile.k_tail));
  }
  return mw;
}

}  // namespace kpplab
