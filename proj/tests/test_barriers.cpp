#include <doctest.h>

#include <cmath>

#include "kpplab/barriers.hpp"
#include "kpplab/self_similar.hpp"

using namespace kpplab;

namespace {
const SubBarrierSpec& feasible_spec() {
  static SubBarrierSpec s = subsolution_build(0.2, 1.0);
  return s;
}
}  // namespace

TEST_CASE("epsilon constants: closed forms vs grid minimization") {
  const auto [e1, e2] = epsilon_constants();
  CHECK(e1 == doctest::Approx(std::exp(-3.5)).epsilon(1e-12));
  CHECK(e2 == doctest::Approx(0.5 * std::exp(-0.125)).epsilon(1e-12));
  CHECK(e1 == doctest::Approx(0.030197).epsilon(1e-4));
  CHECK(e2 == doctest::Approx(0.441248).epsilon(1e-4));

  // grid minimization oracle at step 1e-5
  double m1 = 1e9;
  for (double e = 0.0; e <= std::sqrt(28.0); e += 1e-5)
    m1 = std::min(m1, std::exp(-e * e / 8.0));
  CHECK(e1 == doctest::Approx(m1).epsilon(1e-5));
  double m2 = 1e9;
  for (double e = 0.0; e <= 1.0; e += 1e-5)
    m2 = std::min(m2, (1.0 - e * e / 2.0) * std::exp(-e * e / 8.0));
  CHECK(e2 == doctest::Approx(m2).epsilon(1e-5));
}

TEST_CASE("the weighted-Gaussian eigenidentity holds to 1e-10") {
  // L(eta e^{-eta^2/8}) = (eta^2/16 - 3/4) eta e^{-eta^2/8}, closed form
  auto lhs = [](double e) {
    // L psi = -psi'' - (eta/2) psi' - psi with psi = eta e^{-eta^2/8}
    const double g = std::exp(-e * e / 8.0);
    const double psi_p = (1.0 - e * e / 4.0) * g;
    const double psi_pp = (-0.75 * e + e * e * e / 16.0) * g;
    return -psi_pp - 0.5 * e * psi_p - e * g;
  };
  for (int i = 0; i <= 1000; ++i) {
    const double e = i * 0.012;
    const double rhs = (e * e / 16.0 - 0.75) * e * std::exp(-e * e / 8.0);
    CHECK(std::fabs(lhs(e) - rhs) <= 1e-10);
  }
}

TEST_CASE("subsolution_build finds the documented lattice point") {
  const auto& s = feasible_spec();
  CHECK(s.tau0 <= 40.0);
  CHECK(s.a2 > 1.0 / s.eps2);
  CHECK(s.constraint_slope_margin() >= 1e-12);
  for (double tau = s.tau0; tau <= s.tau0 + 50.0; tau += 1.0)
    CHECK(s.constraint_ratio_margin(tau) >= 1e-12);
  // returned q and zeta behave as the construction demands
  for (double tau = s.tau0; tau <= s.tau0 + 50.0; tau += 0.5) {
    CHECK(s.q(tau) > 0.0);
    CHECK(s.zeta_dot(tau) < 0.0);
    CHECK(s.zeta(tau) > 0.0);
  }
  CHECK_THROWS_AS(subsolution_build(0.3, 1.0), ConfigError);   // gamma >= 1/4
  CHECK_THROWS_AS(subsolution_build(0.2, -1.0), ConfigError);  // C_gamma <= 0
}

TEST_CASE("feasibility is monotone in tau0") {
  const auto& s = feasible_spec();
  for (double shift : {2.0, 6.0, 20.0}) {
    SubBarrierSpec s2 = s;
    s2.tau0 = s.tau0 + shift;
    CHECK(s2.constraint_slope_margin() >= s.constraint_slope_margin());
    for (double tau = s2.tau0; tau <= s2.tau0 + 50.0; tau += 1.0)
      CHECK(s2.constraint_ratio_margin(tau) > 0.0);
  }
}

TEST_CASE("verify_subsolution certifies the feasible spec") {
  const auto& s = feasible_spec();
  const auto rep = verify_subsolution(s, s.tau0, s.tau0 + 30.0, 0.0, 12.0);
  CHECK(rep.max_violation <= 1e-10);
  CHECK(rep.refinement_confirmed);
}

TEST_CASE("verify_subsolution reports genuine violations") {
  // dropping a3 far below feasibility makes the operator change sign
  SubBarrierSpec bad = feasible_spec();
  bad.a3 = 1.0;
  CHECK(bad.constraint_slope_margin() < 0.0);
  const auto rep = verify_subsolution(bad, bad.tau0, bad.tau0 + 30.0, 0.0, 12.0, 301, 600);
  CHECK(rep.max_violation > 0.0);
}

TEST_CASE("the eta >= eta1 slice reduces to the q-differential inequality") {
  const auto& s = feasible_spec();
  for (double tau = s.tau0; tau <= s.tau0 + 30.0; tau += 1.0) {
    CHECK(s.drift_h(tau) < 0.0);
    // q' + q - e^{-tau/4} zeta >= 0 drives the large-eta branch
    CHECK(s.q_dot(tau) + s.q(tau) - std::exp(-tau / 4.0) * s.zeta(tau) >= -1e-14);
    for (double eta = s.eta1; eta <= 12.0; eta += 0.5) {
      CHECK(eta * eta / 16.0 - 0.75 >= 1.0);
      CHECK(subsolution_operator(s, tau, eta) <= 1e-12);
    }
  }
}

TEST_CASE("closed-form subsolution operator agrees with finite differences") {
  const auto& s = feasible_spec();
  const double dt = 1e-5, dx = 1e-5;
  // deterministic pseudo-random sample points
  unsigned long long state = 12345;
  auto next = [&]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return (state >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 40; ++trial) {
    const double tau = s.tau0 + 25.0 * next();
    const double eta = 0.5 + 10.0 * next();
    const double pt = (s.pbar(tau + dt, eta) - s.pbar(tau - dt, eta)) / (2.0 * dt);
    const double pe = (s.pbar(tau, eta + dx) - s.pbar(tau, eta - dx)) / (2.0 * dx);
    const double pee = (s.pbar(tau, eta + dx) - 2.0 * s.pbar(tau, eta) + s.pbar(tau, eta - dx)) /
                       (dx * dx);
    const double L = -pee - 0.5 * eta * pe - s.pbar(tau, eta);
    const double fd = pt + L + s.drift_h(tau) * pe;
    CHECK(subsolution_operator(s, tau, eta) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("F(tau) is finite, increasing, and zero at zero") {
  const auto& s = feasible_spec();
  CHECK(s.F(0.0) == 0.0);
  double prev = 0.0;
  for (double tau : {1.0, 5.0, 20.0, 60.0, 200.0}) {
    const double F = s.F(tau);
    CHECK(F >= prev - 1e-12);  // underflowing integrand: flat up to roundoff
    if (tau <= 20.0) CHECK(F > prev);
    CHECK(F < 50.0);
    prev = F;
  }
}

TEST_CASE("verify_supersolution certifies the default barrier") {
  SuperBarrierSpec spec;  // lambda = eps = 0.05, gamma = 0.25, A = 10
  CHECK(spec.exponent_chain_ok());
  const auto rep = verify_supersolution(spec, 1e3, 1e5, 1.0);
  CHECK(rep.min_margin > 0.0);
  CHECK(rep.refinement_confirmed);
}

TEST_CASE("gamma beyond 1/3 breaks the exponent chain and the certificate") {
  SuperBarrierSpec spec;
  spec.gamma = 0.4;
  CHECK_FALSE(spec.exponent_chain_ok());
  // the forcing decays slower than the barrier: no amplification fixes it
  // on a long enough window
  for (double A : {1.0, 10.0, 100.0}) {
    spec.amplification = A;
    const auto rep = verify_supersolution(spec, 1e3, 1e7, 1.0, 120, 41);
    CHECK(rep.min_margin < 0.0);
    CHECK_FALSE(rep.exponent_chain_ok);
  }
}

TEST_CASE("pure cosine identity: -sbar_xx = t^{-2(gamma+eps)} sbar") {
  SuperBarrierSpec spec;
  const double t = 1234.5;
  for (double x : {-3.0, 0.0, 1.7}) {
    const double dx = 1e-3;  // roundoff in the second difference scales 1/dx^2
    auto sbar = [&](double xx) {
      return std::pow(t, -spec.lambda) * std::cos(xx * std::pow(t, -(spec.gamma + spec.epsilon)));
    };
    const double sxx = (sbar(x + dx) - 2.0 * sbar(x) + sbar(x - dx)) / (dx * dx);
    CHECK(-sxx == doctest::Approx(std::pow(t, -2.0 * (spec.gamma + spec.epsilon)) * sbar(x))
                      .epsilon(1e-6));
  }
}

TEST_CASE("closed-form supersolution operator agrees with finite differences") {
  SuperBarrierSpec spec;
  unsigned long long state = 777;
  auto next = [&]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return (state >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 40; ++trial) {
    const double t = 1e3 + 1e4 * next();
    const double x = (2.0 * next() - 1.0) * std::pow(t, spec.gamma);
    auto sbar = [&](double tt, double xx) {
      return std::pow(tt, -spec.lambda) * std::cos(xx * std::pow(tt, -(spec.gamma + spec.epsilon)));
    };
    const double dt = 1e-4 * t, dx = 1e-4;
    const double st = (sbar(t + dt, x) - sbar(t - dt, x)) / (2.0 * dt);
    const double sx = (sbar(t, x + dx) - sbar(t, x - dx)) / (2.0 * dx);
    const double sxx = (sbar(t, x + dx) - 2.0 * sbar(t, x) + sbar(t, x - dx)) / (dx * dx);
    const double fd = st - sxx + 1.5 / t * (sx - sbar(t, x));
    CHECK(supersolution_operator(spec, t, x) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("ode_proxy: initial value, decay, and an independent integrator") {
  CHECK(ode_proxy(0.25, 1.0, 1.0) == 1.0);
  CHECK(ode_proxy(0.25, -2.5, 1.0) == -2.5);

  // decays a little faster than t^{3 gamma - 1}
  const double g = 0.25;
  const double s100 = ode_proxy(g, 0.0, 100.0) * std::pow(100.0, 1.0 - 3.0 * g);
  const double s1e4 = ode_proxy(g, 0.0, 1e4) * std::pow(1e4, 1.0 - 3.0 * g);
  CHECK(s1e4 < s100);

  // closed form vs RK4 on f' + (1-2g) t^{-2g} f = t^{g-1}
  for (double t_end : {10.0, 1e3}) {
    double f = 1.0, t = 1.0;
    while (t < t_end) {
      const double h = std::min(1e-4 * t, t_end - t);
      auto rhs = [g](double tt, double ff) {
        return -(1.0 - 2.0 * g) * std::pow(tt, -2.0 * g) * ff + std::pow(tt, g - 1.0);
      };
      const double k1 = rhs(t, f), k2 = rhs(t + h / 2, f + h / 2 * k1);
      const double k3 = rhs(t + h / 2, f + h / 2 * k2), k4 = rhs(t + h, f + h * k3);
      f += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
    }
    CHECK(ode_proxy(g, 1.0, t_end) == doctest::Approx(f).epsilon(1e-8));
  }
  CHECK_THROWS_AS(ode_proxy(0.4, 1.0, 10.0), ConfigError);
  CHECK_THROWS_AS(ode_proxy(0.25, 1.0, 0.5), ConfigError);
}

TEST_CASE("upper barrier run dominates the nonlinear solution and keeps I >= 1") {
  auto w0 = [](double e) {
    const double z = e - 1.0;
    return (e > 0.0 && e < 2.0) ? (1.0 - z * z) * (1.0 - z * z) : 0.0;
  };
  SelfSimilarState st;
  const int m = 2601;
  st.tau = 0.0;
  st.eta_grid.resize(m);
  st.w.resize(m);
  for (int i = 0; i < m; ++i) {
    st.eta_grid[i] = -1.0 + i * 0.005;
    st.w[i] = w0(st.eta_grid[i]);
  }

  UpperBarrierInput in;
  in.gamma = 0.2;
  in.tau_end = 6.0;
  // wbar0 = 2 w0 plus the boundary lift, compatible with the moving endpoint
  in.wbar0 = [&](double e) { return 2.0 * w0(e) + std::exp(-1.0) * cutoff_g(e + 1.0); };
  const std::vector<double> checks = {1.0, 2.0, 4.0, 6.0};
  const auto run = upper_barrier_run(in, checks, [&](double tau) {
    if (tau > st.tau) evolve_w(st, tau);
    return std::make_pair(st.eta_grid, st.w);
  });
  CHECK(run.dominated);
  CHECK(run.max_w_minus_wbar <= 1e-6);
  CHECK(run.min_moment >= 1.0);
  REQUIRE(run.moment.size() > 10);
}

TEST_CASE("upper barrier boundary value follows the double exponential") {
  CHECK(upper_barrier_boundary(0.2, 3.0) == doctest::Approx(std::exp(-std::exp(0.6))).epsilon(1e-12));
  CHECK(upper_barrier_boundary(0.2, 3.0) == doctest::Approx(std::exp(-1.8221188)).epsilon(1e-6));
  CHECK(upper_barrier_boundary(0.25, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("cutoff is monotone, 1 before 1, 0 beyond 2") {
  CHECK(cutoff_g(0.0) == 1.0);
  CHECK(cutoff_g(0.999) == 1.0);
  CHECK(cutoff_g(2.0) == 0.0);
  CHECK(cutoff_g(3.0) == 0.0);
  double prev = 1.0;
  for (double y = 1.0; y <= 2.0; y += 0.01) {
    CHECK(cutoff_g(y) <= prev + 1e-15);
    prev = cutoff_g(y);
  }
  // derivative consistency at a midpoint
  const double y = 1.37, h = 1e-6;
  CHECK(cutoff_g_prime(y) ==
        doctest::Approx((cutoff_g(y + h) - cutoff_g(y - h)) / (2.0 * h)).epsilon(1e-6));
  CHECK(cutoff_g_second(y) ==
        doctest::Approx((cutoff_g(y + h) - 2.0 * cutoff_g(y) + cutoff_g(y - h)) / (h * h))
            .epsilon(1e-3));
}
