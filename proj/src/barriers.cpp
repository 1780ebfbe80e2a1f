#include "kpplab/barriers.hpp"

#include <algorithm>
#include <cmath>

#include "kpplab/self_similar.hpp"

namespace kpplab {

namespace {

// Adaptive Simpson quadrature.
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) < 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

double phi0(double eta) { return eta * std::exp(-eta * eta / 4.0); }
double phi0_prime(double eta) { return (1.0 - eta * eta / 2.0) * std::exp(-eta * eta / 4.0); }

}  // namespace

std::pair<double, double> epsilon_constants() {
  // eps1 = min_{[0,eta1]} eta^{-1} phi0 e^{eta^2/8} = e^{-eta1^2/8} = e^{-3.5}
  // eps2 = min_{[0,1]} phi0' e^{eta^2/8} = (1 - eta^2/2) e^{-eta^2/8} at eta=1
  return {std::exp(-3.5), 0.5 * std::exp(-0.125)};
}

double SubBarrierSpec::F(double tau) const {
  if (tau <= 0.0) return 0.0;
  const double g = gamma;
  const double cg = C_gamma;
  return integrate([g, cg](double s) { return cg * std::exp(-std::exp(g * s / 2.0)); },
                   0.0, tau, 1e-13);
}

double SubBarrierSpec::pbar(double tau, double eta) const {
  return (zeta(tau) * phi0(eta) - q(tau) * eta * std::exp(-eta * eta / 8.0)) *
         std::exp(-F(tau));
}

double subsolution_operator(const SubBarrierSpec& spec, double tau, double eta) {
  // With psi = eta e^{-eta^2/8}, L phi0 = 0 and L psi = (eta^2/16 - 3/4) psi:
  //   L(tau) pbar * e^{F} = zeta' phi0 + h zeta phi0'
  //                       - (q' + (eta^2/16 - 3/4) q) psi - h q psi'
  const double h = spec.drift_h(tau);
  const double psi = eta * std::exp(-eta * eta / 8.0);
  const double psi_prime = (1.0 - eta * eta / 4.0) * std::exp(-eta * eta / 8.0);
  const double val = spec.zeta_dot(tau) * phi0(eta)
                   + h * spec.zeta(tau) * phi0_prime(eta)
                   - (spec.q_dot(tau) + (eta * eta / 16.0 - 0.75) * spec.q(tau)) * psi
                   - h * spec.q(tau) * psi_prime;
  return val * std::exp(-spec.F(tau));
}

SubBarrierSpec subsolution_build(double gamma, double C_gamma, const SubBuildOptions& opts) {
  if (!(gamma > 0.0 && gamma < 0.25))
    throw ConfigError("subsolution_build: gamma must be in (0, 1/4)");
  if (!(C_gamma > 0.0)) throw ConfigError("subsolution_build: C_gamma must be positive");

  const auto [eps1, eps2] = epsilon_constants();
  const double a2_base = std::ceil(1.0 / eps2);

  for (double tau0 = opts.tau0_lo; tau0 <= opts.tau0_hi + 1e-12; tau0 += opts.tau0_step) {
    for (int j = 0; j < opts.a2_count; ++j) {
      const double a2 = a2_base + j * opts.a2_step;
      if (!(a2 > 1.0 / eps2)) continue;
      for (int m = 0; m <= opts.a3_max_pow2; ++m) {
        const double a3 = std::ldexp(1.0, m);  // 2^m
        SubBarrierSpec s;
        s.tau0 = tau0;
        s.a2 = a2;
        s.a3 = a3;
        s.gamma = gamma;
        s.C_gamma = C_gamma;
        s.eps1 = eps1;
        s.eps2 = eps2;

        if (s.constraint_slope_margin() < 0.0) continue;
        // the sign analysis behind the certificate also needs h < 0 and
        // |h| <= e^{-tau/4} from tau0 on
        if (!(s.drift_h(tau0) < 0.0)) continue;
        bool ok = true;
        const double hi = tau0 + opts.tau_check_hi_offset;
        for (double tau = tau0; tau <= hi; tau += 0.05) {
          if (s.constraint_ratio_margin(tau) <= 0.0 ||
              std::fabs(s.drift_h(tau)) > std::exp(-tau / 4.0)) {
            ok = false;
            break;
          }
        }
        if (ok) return s;
      }
    }
  }
  throw NumericError("subsolution_build: no feasible (tau0, a2, a3) on the lattice");
}

namespace {

ViolationReport scan_subsolution(const SubBarrierSpec& spec, double tau_lo, double tau_hi,
                                 double eta_lo, double eta_hi, int n_tau, int n_eta) {
  ViolationReport rep;
  rep.n_tau = n_tau;
  rep.n_eta = n_eta;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  const double dtau = (tau_hi - tau_lo) / (n_tau - 1);
  const double deta = (eta_hi - eta_lo) / n_eta;
  for (int i = 0; i < n_tau; ++i) {
    const double tau = tau_lo + i * dtau;
    // cache the tau-dependent pieces; F is the expensive one
    const double eF = std::exp(-spec.F(tau));
    const double h = spec.drift_h(tau);
    const double zd = spec.zeta_dot(tau), z = spec.zeta(tau);
    const double qd = spec.q_dot(tau), qv = spec.q(tau);
    for (int jj = 1; jj <= n_eta; ++jj) {
      const double eta = eta_lo + jj * deta;  // open at eta_lo
      const double psi = eta * std::exp(-eta * eta / 8.0);
      const double psi_p = (1.0 - eta * eta / 4.0) * std::exp(-eta * eta / 8.0);
      const double val = (zd * phi0(eta) + h * z * phi0_prime(eta)
                        - (qd + (eta * eta / 16.0 - 0.75) * qv) * psi
                        - h * qv * psi_p) * eF;
      if (val > rep.max_violation) {
        rep.max_violation = val;
        rep.arg_tau = tau;
        rep.arg_eta = eta;
      }
    }
  }
  return rep;
}

}  // namespace

ViolationReport verify_subsolution(const SubBarrierSpec& spec, double tau_lo, double tau_hi,
                                   double eta_lo, double eta_hi, int n_tau, int n_eta) {
  ViolationReport coarse = scan_subsolution(spec, tau_lo, tau_hi, eta_lo, eta_hi, n_tau, n_eta);
  ViolationReport fine = scan_subsolution(spec, tau_lo, tau_hi, eta_lo, eta_hi,
                                          2 * n_tau - 1, 2 * n_eta);
  ViolationReport rep = (fine.max_violation > coarse.max_violation) ? fine : coarse;
  rep.n_tau = coarse.n_tau;
  rep.n_eta = coarse.n_eta;
  rep.refinement_confirmed =
      (coarse.max_violation <= 0.0) == (fine.max_violation <= 0.0);
  rep.max_violation = std::max(coarse.max_violation, fine.max_violation);
  return rep;
}

double supersolution_operator(const SuperBarrierSpec& spec, double t, double x) {
  const double ge = spec.gamma + spec.epsilon;
  const double theta = x * std::pow(t, -ge);
  const double s = std::pow(t, -spec.lambda);
  const double c = std::cos(theta), sn = std::sin(theta);
  const double sbar_t = -spec.lambda / t * s * c + s * sn * ge * x * std::pow(t, -ge - 1.0);
  const double sbar_x = -s * std::pow(t, -ge) * sn;
  const double sbar_xx = -s * std::pow(t, -2.0 * ge) * c;
  const double sbar = s * c;
  return sbar_t - sbar_xx + 1.5 / t * (sbar_x - sbar);
}

namespace {

MarginReport scan_supersolution(const SuperBarrierSpec& spec, double t_lo, double t_hi,
                                double forcing_bound, int n_t, int n_x) {
  MarginReport rep;
  rep.exponent_chain_ok = spec.exponent_chain_ok();
  rep.min_margin = std::numeric_limits<double>::infinity();
  const double lr = std::log(t_hi / t_lo) / (n_t - 1);
  for (int i = 0; i < n_t; ++i) {
    const double t = t_lo * std::exp(i * lr);
    const double xmax = std::pow(t, spec.gamma);
    const double forcing = forcing_bound * std::pow(t, -(1.0 - spec.gamma));
    for (int j = 0; j < n_x; ++j) {
      const double x = -xmax + 2.0 * xmax * j / (n_x - 1);
      const double margin = spec.amplification * supersolution_operator(spec, t, x) - forcing;
      if (margin < rep.min_margin) {
        rep.min_margin = margin;
        rep.arg_t = t;
        rep.arg_x = x;
      }
    }
  }
  return rep;
}

}  // namespace

MarginReport verify_supersolution(const SuperBarrierSpec& spec, double t_lo, double t_hi,
                                  double forcing_bound, int n_t, int n_x) {
  MarginReport coarse = scan_supersolution(spec, t_lo, t_hi, forcing_bound, n_t, n_x);
  MarginReport fine = scan_supersolution(spec, t_lo, t_hi, forcing_bound,
                                         2 * n_t - 1, 2 * n_x - 1);
  MarginReport rep = (fine.min_margin < coarse.min_margin) ? fine : coarse;
  rep.exponent_chain_ok = coarse.exponent_chain_ok;
  rep.refinement_confirmed = (coarse.min_margin > 0.0) == (fine.min_margin > 0.0);
  rep.min_margin = std::min(coarse.min_margin, fine.min_margin);
  return rep;
}

double ode_proxy(double gamma, double f1, double t) {
  if (!(gamma > 0.0 && gamma < 1.0 / 3.0))
    throw ConfigError("ode_proxy: gamma must be in (0, 1/3)");
  if (!(t >= 1.0)) throw ConfigError("ode_proxy: t must be >= 1");
  const double beta = 1.0 - 2.0 * gamma;
  const double T = std::pow(t, beta);
  const double homogeneous = f1 * std::exp(1.0 - T);
  if (t == 1.0) return f1;
  // substitute sigma = s^{1-2gamma}, then u = T - sigma:
  //   integral = (1/beta) int_0^{T-1} (T-u)^p e^{-u} du,  p = (3gamma-1)/beta
  const double p = (3.0 * gamma - 1.0) / beta;
  const double ulim = std::min(T - 1.0, 80.0);
  const double integral = integrate(
      [T, p](double u) { return std::pow(T - u, p) * std::exp(-u); }, 0.0, ulim, 1e-14);
  return homogeneous + integral / beta;
}

double cutoff_g(double y) {
  if (y <= 1.0) return 1.0;
  if (y >= 2.0) return 0.0;
  const double s = y - 1.0;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double cutoff_g_prime(double y) {
  if (y <= 1.0 || y >= 2.0) return 0.0;
  const double s = y - 1.0;
  return -6.0 * s * (1.0 - s);
}

double cutoff_g_second(double y) {
  if (y <= 1.0 || y >= 2.0) return 0.0;
  const double s = y - 1.0;
  return -6.0 + 12.0 * s;
}

UpperBarrierRun upper_barrier_run(
    const UpperBarrierInput& input,
    const std::vector<double>& check_taus,
    const std::function<std::pair<std::vector<double>, std::vector<double>>(double)>&
        reference_at_tau) {
  const double gamma = input.gamma;
  if (!(gamma > 0.0 && gamma < 0.5))
    throw ConfigError("upper_barrier_run: gamma must be in (0, 1/2)");
  const int n = input.n;
  const double de = input.eta_max / (n - 1);
  std::vector<double> eta(n), p(n);
  for (int i = 0; i < n; ++i) {
    eta[i] = i * de;
    p[i] = input.wbar0(eta[i] - 1.0) - std::exp(-1.0) * cutoff_g(eta[i]);
  }
  p[0] = 0.0;
  p[n - 1] = 0.0;

  UpperBarrierRun run;
  run.min_moment = std::numeric_limits<double>::infinity();
  run.max_w_minus_wbar = -std::numeric_limits<double>::infinity();

  auto drift = [gamma](double tau) {
    return gamma * std::exp(-(0.5 - gamma) * tau) + 1.5 * std::exp(-0.5 * tau);
  };
  auto source_G = [&](double tau, double y) {
    const double c = drift(tau);
    return gamma * std::exp(gamma * tau) * cutoff_g(y) + cutoff_g(y) + cutoff_g_second(y)
         + (0.5 * y - c) * cutoff_g_prime(y);
  };

  std::vector<double> lo(n), di(n), up(n), rhs(n);
  const double rd = 1.0 / (de * de);

  auto record = [&](double tau) {
    run.taus.push_back(tau);
    const double I = moment_functional(eta, p);
    run.moment.push_back(I);
    run.min_moment = std::min(run.min_moment, I);
  };

  double tau = 0.0;
  record(tau);
  std::size_t next_check = 0;
  double next_record = 0.05;
  while (tau < input.tau_end - 1e-14) {
    const double dt = std::min(input.dtau, input.tau_end - tau);
    const double tau1 = tau + dt, taum = tau + 0.5 * dt;
    const double c0 = drift(tau), c1 = drift(tau1);
    const double b = upper_barrier_boundary(gamma, taum);

    lo[0] = 0.0; di[0] = 1.0; up[0] = 0.0; rhs[0] = 0.0;
    for (int i = 1; i < n - 1; ++i) {
      const double adv0 = (0.5 * eta[i] - c0) / (2.0 * de);
      const double adv1 = (0.5 * eta[i] - c1) / (2.0 * de);
      const double ac = -2.0 * rd + 1.0;
      lo[i] = -0.5 * dt * (rd - adv1);
      di[i] = 1.0 - 0.5 * dt * ac;
      up[i] = -0.5 * dt * (rd + adv1);
      rhs[i] = p[i] + 0.5 * dt * ((rd - adv0) * p[i - 1] + ac * p[i] + (rd + adv0) * p[i + 1])
             + dt * source_G(taum, eta[i]) * b;
    }
    lo[n - 1] = 0.0; di[n - 1] = 1.0; up[n - 1] = 0.0; rhs[n - 1] = 0.0;
    solve_tridiag(lo, di, up, rhs);
    p.swap(rhs);
    tau = tau1;

    if (tau >= next_record - 1e-12) {
      record(tau);
      next_record += 0.05;
    }

    while (next_check < check_taus.size() && tau >= check_taus[next_check] - 1e-9) {
      const double m = std::exp(-(0.5 - gamma) * tau);
      const double bb = upper_barrier_boundary(gamma, tau);
      auto [ref_eta, ref_w] = reference_at_tau(check_taus[next_check]);
      for (std::size_t j = 0; j < ref_eta.size(); ++j) {
        const double e = ref_eta[j];
        if (e < 0.0 || e + m > eta[n - 1]) continue;
        const double wbar = interp_cubic_uniform(eta, p, e + m) + bb * cutoff_g(e + m);
        run.max_w_minus_wbar = std::max(run.max_w_minus_wbar, ref_w[j] - wbar);
      }
      ++next_check;
    }
  }
  run.dominated = run.max_w_minus_wbar <= 1e-6;
  return run;
}

}  // namespace kpplab
