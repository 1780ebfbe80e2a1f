// self_similar.hpp - diffusive-scale machinery in the variables
// tau = log t, eta = x/sqrt(t), w = t^{-1/2} e^{x} u:
//
//   w_tau - (eta/2) w_eta - w_etaeta - w
//         + (3/2) e^{-tau/2} w_eta + e^{3tau/2 - eta exp(tau/2)} w^2 = 0,
//
// together with the half-line generator L = -d^2/deta^2 - (eta/2) d/deta - 1
// (Dirichlet at eta=0), its polynomial-times-Gaussian eigenfunctions
// phi_k = P_k(eta) e^{-eta^2/4} with L phi_k = k phi_k, the adjoint principal
// eigenfunction psi_0 = eta, and the eta-moment functional I(tau) whose
// normalized limit is the front amplitude alpha.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/kpp_solver.hpp"

namespace kpplab {

struct SelfSimilarState {
  double tau = 0.0;
  std::vector<double> eta_grid;
  std::vector<double> w;
  double alpha_moment = 0.0;  // I(tau)/(2 sqrt(pi))
  double alpha_fit = 0.0;     // windowed least-squares amplitude
};

// I = trapezoid integral of eta*w over eta > 0.
double moment_functional(std::span<const double> eta, std::span<const double> w);

// Transform of a moving-frame snapshot. The native overload keeps the image
// grid eta_i = x_i/sqrt(t) (so at t=1 the eta-grid equals the x-grid); the
// second resamples w onto a caller-provided eta grid by cubic interpolation.
// e^x u is evaluated as exp(x + log u) to dodge overflow; u <= 0 maps to 0.
SelfSimilarState transform_to_ss(const Field& field);
SelfSimilarState transform_to_ss(const Field& field, const std::vector<double>& eta_grid);

// Inverse transform: u(x) = sqrt(t) e^{-x} w(x/sqrt(t)).
std::vector<double> inverse_transform(const SelfSimilarState& state, double t,
                                      std::span<const double> x_grid);

struct EvolveWOptions {
  double dtau = 1e-3;
  double absorption_exponent_cap = 700.0;  // force w=0 where the exponent exceeds this
};

// Advances the full w-equation on [eta_min, eta_max] with Dirichlet zero at
// both edges; the absorption e^{3tau/2 - eta e^{tau/2}} w^2 is taken
// linearly implicitly with the coefficient frozen at the previous iterate.
void evolve_w(SelfSimilarState& state, double tau_end, const EvolveWOptions& opts = {});

enum class AlphaMode { moment, fit };

double alpha_estimate(const SelfSimilarState& state, AlphaMode mode,
                      double window_lo = 1.0, double window_hi = 3.0);

struct HalfLineField {
  double tau = 0.0;
  std::vector<double> eta;  // uniform grid starting at 0
  std::vector<double> p;
};

// Pure linear Dirichlet flow p_tau + L p = 0 on eta in (0, eta_max),
// p(tau,0) = 0. Conserves the eta-moment to roundoff.
HalfLineField evolve_dirichlet(const HalfLineField& p0, double tau, double dtau = 1e-3);

HalfLineField make_half_line_field(double eta_max, int n,
                                   const std::function<double(double)>& f);

struct SpectralPair {
  int k = 0;
  std::vector<double> poly;  // P_k coefficients, poly[j] multiplies eta^j

  double eval_poly(double eta) const;
  double eval_phi(double eta) const;  // P_k(eta) e^{-eta^2/4}
};

// Exact polynomial recurrence for phi_{k+1} = phi_k'' starting from
// P_0 = eta. Valid for 0 <= k <= 20.
SpectralPair hermite_eigen(int k);

struct AdjointReport {
  bool pass = false;
  double residual_sup = 0.0;          // sup of |L* psi| on [0,10] for psi_0 = eta
  std::vector<double> residual_poly;  // coefficients of L* psi
};

// Applies L* psi = -psi'' + (1/2)(eta psi)' - psi to a polynomial psi.
std::vector<double> adjoint_apply(const std::vector<double>& psi);

// Checks L* eta = 0 symbolically.
AdjointReport adjoint_check();

struct RemainderDecomp {
  double amplitude = 0.0;             // moment-mode alpha
  double weighted_remainder_sup = 0.0;  // sup |f - amplitude*eta e^{-eta^2/4}| e^{eta^2/6}
};

RemainderDecomp decompose_remainder(std::span<const double> eta,
                                    std::span<const double> values,
                                    double eta_sup_lo = 0.0,
                                    double eta_sup_hi = 8.0);

}  // namespace kpplab
