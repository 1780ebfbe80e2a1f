// barriers.hpp - explicit barrier constructions and their numerical
// certification by dense grid sampling of the closed-form operators.
//
// Super-solution (moving frame, |x| <= t^gamma):
//   sbar(t,x) = t^{-lambda} cos(x / t^{gamma+eps}),
//   certified when (d_t - d_xx + (3/2t)(d_x - 1)) A sbar dominates the
//   forcing t^{-(1-gamma)}; needs 2 gamma + 2 eps + lambda < 1 - gamma.
//
// Sub-solution (self-similar half line):
//   pbar(tau,eta) = (zeta(tau) phi0(eta) - q(tau) eta e^{-eta^2/8}) e^{-F(tau)},
//   zeta = a2 + a3 e^{-(tau-tau0)/4},  q = e^{-(tau-tau0)} + (4/3) e^{-tau/4} zeta(tau0),
//   F(tau) = int_0^tau C_gamma e^{-exp(gamma s/2)} ds,
// which satisfies L(tau) pbar <= 0 for tau >= tau0 once
//   eps1 a3 / 4 >= 3 + 4 e^{-tau0/4} (a2 + a3)  and  zeta > q / eps2,
// with eps1 = e^{-eta1^2/8} (eta1 = sqrt(28)) and eps2 = min phi0' e^{eta^2/8}.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kpplab/common.hpp"

namespace kpplab {

struct SuperBarrierSpec {
  double lambda = 0.05;
  double gamma = 0.25;
  double epsilon = 0.05;
  double amplification = 10.0;  // A >= 1

  // gamma in (0,1/3) and 2 gamma + 2 eps + lambda < 1 - gamma
  bool exponent_chain_ok() const {
    return gamma > 0.0 && gamma < 1.0 / 3.0 &&
           2.0 * gamma + 2.0 * epsilon + lambda < 1.0 - gamma;
  }
};

struct SubBarrierSpec {
  double tau0 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double C_gamma = 1.0;
  double gamma = 0.2;   // in (0, 1/4)
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eta1 = 5.291502622129181;  // sqrt(28)

  double zeta(double tau) const { return a2 + a3 * std::exp(-(tau - tau0) / 4.0); }
  double zeta_dot(double tau) const { return -a3 / 4.0 * std::exp(-(tau - tau0) / 4.0); }
  double q(double tau) const {
    return std::exp(-(tau - tau0)) + 4.0 / 3.0 * std::exp(-tau / 4.0) * zeta(tau0);
  }
  double q_dot(double tau) const {
    return -std::exp(-(tau - tau0)) - 1.0 / 3.0 * std::exp(-tau / 4.0) * zeta(tau0);
  }
  double drift_h(double tau) const {
    return -gamma * std::exp(-(0.5 - gamma) * tau) + 1.5 * std::exp(-0.5 * tau);
  }
  double F(double tau) const;  // int_0^tau C_gamma e^{-exp(gamma s/2)} ds
  double pbar(double tau, double eta) const;

  // margins of the two feasibility inequalities (>= 0 when satisfied)
  double constraint_slope_margin() const {
    return eps1 * a3 / 4.0 - 3.0 - 4.0 * std::exp(-tau0 / 4.0) * (a2 + a3);
  }
  double constraint_ratio_margin(double tau) const { return zeta(tau) - q(tau) / eps2; }
};

// (eps1, eps2) in closed form: e^{-3.5} and (1/2) e^{-1/8}.
std::pair<double, double> epsilon_constants();

struct SubBuildOptions {
  double tau0_lo = 10.0, tau0_hi = 60.0, tau0_step = 2.0;
  double a2_step = 0.5;
  int a2_count = 40;
  int a3_max_pow2 = 24;
  double tau_check_hi_offset = 50.0;
};

// Searches the documented lattice (tau0 ascending, then a2, then a3) and
// returns the first feasible spec with a2 > 1/eps2. Throws NumericError if
// the lattice holds no feasible point.
SubBarrierSpec subsolution_build(double gamma, double C_gamma,
                                 const SubBuildOptions& opts = {});

struct ViolationReport {
  double max_violation = 0.0;  // max over the grid of L(tau) pbar (<= 0 certifies)
  double arg_tau = 0.0, arg_eta = 0.0;
  int n_tau = 0, n_eta = 0;
  bool refinement_confirmed = false;  // sign stable after one grid halving
};

// Evaluates L(tau) pbar in closed form on a (tau, eta) grid and reports the
// maximum; runs once more on a halved grid to confirm the sign.
ViolationReport verify_subsolution(const SubBarrierSpec& spec,
                                   double tau_lo, double tau_hi,
                                   double eta_lo, double eta_hi,
                                   int n_tau = 601, int n_eta = 1200);

// Closed-form value of L(tau) pbar at one point (exposed for cross-checks).
double subsolution_operator(const SubBarrierSpec& spec, double tau, double eta);

struct MarginReport {
  double min_margin = 0.0;  // min over grid of (P[A sbar] - forcing) (> 0 certifies)
  double arg_t = 0.0, arg_x = 0.0;
  bool exponent_chain_ok = false;
  bool refinement_confirmed = false;
};

// Parabolic operator on A*sbar minus forcing_bound * t^{-(1-gamma)},
// minimized over t log-spaced in [t_lo, t_hi] and |x| <= t^gamma.
MarginReport verify_supersolution(const SuperBarrierSpec& spec,
                                  double t_lo, double t_hi, double forcing_bound,
                                  int n_t = 80, int n_x = 81);

double supersolution_operator(const SuperBarrierSpec& spec, double t, double x);

// Closed-form solution of f' + (1-2gamma) t^{-2gamma} f = t^{gamma-1},
// f(1) = f1, evaluated by adaptive quadrature.
double ode_proxy(double gamma, double f1, double t);

struct UpperBarrierRun {
  std::vector<double> taus;
  std::vector<double> moment;      // I(tau) = int eta pbar
  double min_moment = 0.0;
  double max_w_minus_wbar = 0.0;   // domination defect against the reference run
  bool dominated = false;
};

// Runs the upper-barrier problem mapped to the fixed half line:
//   pbar_tau + L pbar + (gamma e^{-(1/2-gamma)tau} + (3/2)e^{-tau/2}) pbar_eta
//     = G(tau,eta) e^{-exp(gamma tau)},   pbar(tau,0) = 0,
// with the cubic-smoothstep cutoff g, initial data pbar0(y) = wbar0(y-1),
// and checks domination of the supplied reference w-run checkpoints.
struct UpperBarrierInput {
  double gamma = 0.2;
  double tau_end = 6.0;
  double eta_max = 13.0;
  int n = 2601;
  double dtau = 1e-3;
  std::function<double(double)> wbar0;  // on eta >= -1
};

UpperBarrierRun upper_barrier_run(
    const UpperBarrierInput& input,
    const std::vector<double>& check_taus,
    const std::function<std::pair<std::vector<double>, std::vector<double>>(double)>&
        reference_at_tau);  // returns (eta grid, w) of the dominated run

// Cutoff g: 1 on [0,1), cubic smoothstep down on [1,2], 0 beyond.
double cutoff_g(double y);
double cutoff_g_prime(double y);
double cutoff_g_second(double y);

// Boundary value of the upper barrier at the moving left endpoint.
inline double upper_barrier_boundary(double gamma, double tau) {
  return std::exp(-std::exp(gamma * tau));
}

}  // namespace kpplab
