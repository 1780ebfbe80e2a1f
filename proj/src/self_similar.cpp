#include "kpplab/self_similar.hpp"

#include <algorithm>
#include <cmath>

namespace kpplab {

namespace {
constexpr double kTwoSqrtPi = 3.5449077018110318;  // 2 sqrt(pi)
}

double moment_functional(std::span<const double> eta, std::span<const double> w) {
  double I = 0.0;
  for (std::size_t i = 0; i + 1 < eta.size(); ++i) {
    if (eta[i + 1] <= 0.0) continue;
    const double el = std::max(eta[i], 0.0);
    const double er = eta[i + 1];
    double fl = eta[i] >= 0.0 ? eta[i] * w[i] : 0.0;  // integrand eta*w vanishes at eta=0
    const double fr = er * w[i + 1];
    I += 0.5 * (fl + fr) * (er - el);
  }
  return I;
}

namespace {

double w_value(double x, double u, double t) {
  if (u <= 0.0) return 0.0;
  const double e = x + std::log(u) - 0.5 * std::log(t);
  if (e < -745.0) return 0.0;  // below the double floor
  return std::exp(e);
}

void attach_alphas(SelfSimilarState& s) {
  s.alpha_moment = moment_functional(s.eta_grid, s.w) / kTwoSqrtPi;
  s.alpha_fit = alpha_estimate(s, AlphaMode::fit);
}

}  // namespace

SelfSimilarState transform_to_ss(const Field& field) {
  if (field.frame != Frame::moving)
    throw ConfigError("transform_to_ss: requires a moving-frame field");
  SelfSimilarState s;
  const double t = field.t;
  s.tau = std::log(t);
  const double rt = std::sqrt(t);
  s.eta_grid.resize(field.grid.n);
  s.w.resize(field.grid.n);
  for (int i = 0; i < field.grid.n; ++i) {
    const double x = field.grid.x(i);
    s.eta_grid[i] = x / rt;
    s.w[i] = w_value(x, field.u[i], t);
  }
  attach_alphas(s);
  return s;
}

SelfSimilarState transform_to_ss(const Field& field, const std::vector<double>& eta_grid) {
  SelfSimilarState native = transform_to_ss(field);
  const double t = field.t;
  const double rt = std::sqrt(t);
  std::vector<double> xs(field.grid.n);
  for (int i = 0; i < field.grid.n; ++i) xs[i] = field.grid.x(i);

  SelfSimilarState s;
  s.tau = native.tau;
  s.eta_grid = eta_grid;
  s.w.resize(eta_grid.size());
  for (std::size_t j = 0; j < eta_grid.size(); ++j) {
    const double x = eta_grid[j] * rt;
    if (x > xs.back()) { s.w[j] = 0.0; continue; }
    if (x < xs.front()) { s.w[j] = w_value(x, 1.0, t); continue; }
    s.w[j] = std::max(0.0, interp_cubic_uniform(xs, native.w, x));
  }
  attach_alphas(s);
  return s;
}

std::vector<double> inverse_transform(const SelfSimilarState& state, double t,
                                      std::span<const double> x_grid) {
  const double rt = std::sqrt(t);
  std::vector<double> u(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double eta = x_grid[i] / rt;
    double w = 0.0;
    if (eta >= state.eta_grid.front() && eta <= state.eta_grid.back())
      w = interp_cubic_uniform(state.eta_grid, state.w, eta);
    u[i] = (w <= 0.0) ? 0.0 : std::exp(std::log(w) + 0.5 * std::log(t) - x_grid[i]);
  }
  return u;
}

void evolve_w(SelfSimilarState& state, double tau_end, const EvolveWOptions& opts) {
  if (!(tau_end > state.tau)) throw ConfigError("evolve_w: tau_end must exceed state.tau");
  const std::size_t n = state.eta_grid.size();
  if (n < 5) throw ConfigError("evolve_w: grid too small");
  if (state.eta_grid.front() > -1.0 + 1e-12 || state.eta_grid.back() < 12.0 - 1e-12)
    throw ConfigError("evolve_w: eta grid must span at least [-1, 12]");
  const double de = state.eta_grid[1] - state.eta_grid[0];

  std::vector<double> lo(n), di(n), up(n), rhs(n);
  auto& w = state.w;
  w.front() = 0.0;
  w.back() = 0.0;

  while (state.tau < tau_end - 1e-14) {
    const double dt = std::min(opts.dtau, tau_end - state.tau);
    const double tau0 = state.tau, tau1 = state.tau + dt, taum = state.tau + 0.5 * dt;
    const double drift0 = 1.5 * std::exp(-0.5 * tau0);
    const double drift1 = 1.5 * std::exp(-0.5 * tau1);
    const double em = std::exp(0.5 * taum);

    lo[0] = 0.0; di[0] = 1.0; up[0] = 0.0; rhs[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double eta = state.eta_grid[i];
      const double exponent = 1.5 * taum - eta * em;
      if (exponent > opts.absorption_exponent_cap) {
        // absorption overwhelms any representable w; pin the node to zero
        lo[i] = 0.0; di[i] = 1.0; up[i] = 0.0; rhs[i] = 0.0;
        continue;
      }
      const double rd = 1.0 / (de * de);
      const double adv0 = (0.5 * eta - drift0) / (2.0 * de);
      const double adv1 = (0.5 * eta - drift1) / (2.0 * de);
      const double am0 = rd - adv0, ac = -2.0 * rd + 1.0, ap0 = rd + adv0;
      const double am1 = rd - adv1, ap1 = rd + adv1;
      const double K = std::exp(exponent) * w[i];  // frozen absorption coefficient
      lo[i] = -0.5 * dt * am1;
      di[i] = 1.0 - 0.5 * dt * ac + dt * K;
      up[i] = -0.5 * dt * ap1;
      rhs[i] = w[i] + 0.5 * dt * (am0 * w[i - 1] + ac * w[i] + ap0 * w[i + 1]);
    }
    lo[n - 1] = 0.0; di[n - 1] = 1.0; up[n - 1] = 0.0; rhs[n - 1] = 0.0;

    solve_tridiag(lo, di, up, rhs);
    w.swap(rhs);
    state.tau = tau1;
  }
  attach_alphas(state);
}

double alpha_estimate(const SelfSimilarState& state, AlphaMode mode,
                      double window_lo, double window_hi) {
  double alpha;
  if (mode == AlphaMode::moment) {
    alpha = moment_functional(state.eta_grid, state.w) / kTwoSqrtPi;
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < state.eta_grid.size(); ++i) {
      const double eta = state.eta_grid[i];
      if (eta < window_lo || eta > window_hi) continue;
      const double basis = eta * std::exp(-eta * eta / 4.0);
      num += state.w[i] * basis;
      den += basis * basis;
    }
    if (den == 0.0) throw ConfigError("alpha_estimate: empty fit window");
    alpha = num / den;
  }
  if (alpha < 0.0)
    throw NumericError("alpha_estimate: negative estimate (state unconverged or corrupted)");
  return alpha;
}

HalfLineField make_half_line_field(double eta_max, int n,
                                   const std::function<double(double)>& f) {
  HalfLineField h;
  h.eta.resize(n);
  h.p.resize(n);
  const double de = eta_max / (n - 1);
  for (int i = 0; i < n; ++i) {
    h.eta[i] = i * de;
    h.p[i] = f(h.eta[i]);
  }
  h.p.front() = 0.0;
  h.p.back() = 0.0;
  return h;
}

HalfLineField evolve_dirichlet(const HalfLineField& p0, double tau, double dtau) {
  if (std::fabs(p0.p.front()) > 1e-12)
    throw ConfigError("evolve_dirichlet: p0 must vanish at eta = 0");
  HalfLineField h = p0;
  const std::size_t n = h.eta.size();
  const double de = h.eta[1] - h.eta[0];
  const double rd = 1.0 / (de * de);

  std::vector<double> lo(n), di(n), up(n), rhs(n);
  double s = 0.0;
  while (s < tau - 1e-14) {
    const double dt = std::min(dtau, tau - s);
    lo[0] = 0.0; di[0] = 1.0; up[0] = 0.0; rhs[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double adv = 0.5 * h.eta[i] / (2.0 * de);
      const double am = rd - adv, ac = -2.0 * rd + 1.0, ap = rd + adv;
      lo[i] = -0.5 * dt * am;
      di[i] = 1.0 - 0.5 * dt * ac;
      up[i] = -0.5 * dt * ap;
      rhs[i] = h.p[i] + 0.5 * dt * (am * h.p[i - 1] + ac * h.p[i] + ap * h.p[i + 1]);
    }
    lo[n - 1] = 0.0; di[n - 1] = 1.0; up[n - 1] = 0.0; rhs[n - 1] = 0.0;
    solve_tridiag(lo, di, up, rhs);
    h.p.swap(rhs);
    s += dt;
  }
  h.tau = p0.tau + tau;
  return h;
}

double SpectralPair::eval_poly(double eta) const {
  double v = 0.0;
  for (std::size_t j = poly.size(); j-- > 0;) v = v * eta + poly[j];
  return v;
}

double SpectralPair::eval_phi(double eta) const {
  return eval_poly(eta) * std::exp(-eta * eta / 4.0);
}

SpectralPair hermite_eigen(int k) {
  if (k < 0 || k > 20) throw ConfigError("hermite_eigen: k must be in [0,20]");
  // P_0 = eta; P_{k+1} = P'' - eta P' + (eta^2/4 - 1/2) P, which is two
  // exact differentiations of P e^{-eta^2/4} per index step.
  std::vector<double> p = {0.0, 1.0};
  for (int step = 0; step < k; ++step) {
    std::vector<double> q(p.size() + 2, 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) {
      double c = 0.0;
      if (j + 2 < p.size()) c += static_cast<double>((j + 2) * (j + 1)) * p[j + 2];
      if (j < p.size()) c += (-static_cast<double>(j) - 0.5) * p[j];
      if (j >= 2) c += 0.25 * p[j - 2];
      q[j] = c;
    }
    while (q.size() > 1 && q.back() == 0.0) q.pop_back();
    p = std::move(q);
  }
  SpectralPair sp;
  sp.k = k;
  sp.poly = std::move(p);
  return sp;
}

std::vector<double> adjoint_apply(const std::vector<double>& psi) {
  // L* psi = -psi'' + (1/2)(eta psi)' - psi, coefficient-wise:
  // out[j] = -(j+2)(j+1) psi[j+2] + ((j-1)/2) psi[j]
  std::vector<double> out(psi.size(), 0.0);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    double c = (static_cast<double>(j) - 1.0) / 2.0 * psi[j];
    if (j + 2 < psi.size())
      c -= static_cast<double>((j + 2) * (j + 1)) * psi[j + 2];
    out[j] = c;
  }
  while (out.size() > 1 && out.back() == 0.0) out.pop_back();
  return out;
}

AdjointReport adjoint_check() {
  AdjointReport rep;
  const std::vector<double> psi0 = {0.0, 1.0};  // psi_0 = eta
  rep.residual_poly = adjoint_apply(psi0);
  double sup = 0.0;
  for (double eta = 0.0; eta <= 10.0; eta += 0.01) {
    double v = 0.0;
    for (std::size_t j = rep.residual_poly.size(); j-- > 0;)
      v = v * eta + rep.residual_poly[j];
    sup = std::max(sup, std::fabs(v));
  }
  rep.residual_sup = sup;
  rep.pass = sup == 0.0;
  return rep;
}

RemainderDecomp decompose_remainder(std::span<const double> eta,
                                    std::span<const double> values,
                                    double eta_sup_lo, double eta_sup_hi) {
  RemainderDecomp rd;
  rd.amplitude = moment_functional(eta, values) / kTwoSqrtPi;
  double sup = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    if (e < eta_sup_lo || e > eta_sup_hi) continue;
    const double model = rd.amplitude * e * std::exp(-e * e / 4.0);
    sup = std::max(sup, std::fabs(values[i] - model) * std::exp(e * e / 6.0));
  }
  rd.weighted_remainder_sup = sup;
  return rd;
}

}  // namespace kpplab
