// oracles.hpp - independent reference computations used by the tests only.
// These deliberately avoid the library's solution paths: the wave oracle is
// an RK4 shooting integrator, the PDE oracle an explicit FTCS scheme, the
// quadrature oracle plain Simpson sums.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Shoots the wave ODE phi'' + 2 phi' + phi - phi^2 = 0 forward from the
// unstable manifold of phi=1 (the stable direction of integration), then
// normalizes the translate so the fitted tail slope of e^xi*phi equals 1.
struct ShotWave {
  std::vector<double> xi;  // normalized labels, uniform spacing
  std::vector<double> phi;
  double a = 1.0;
  double b = 0.0;  // tail offset (equals the k constant after normalization)

  double eval(double x) const {
    if (x <= xi.front()) return 1.0;
    if (x >= xi.back()) return (x + b) * std::exp(-x);
    const double h = xi[1] - xi[0];
    const std::size_t i = static_cast<std::size_t>((x - xi[0]) / h);
    const double t = (x - xi[i]) / h;
    return (1.0 - t) * phi[i] + t * phi[i + 1];
  }
};

inline ShotWave shoot_wave(double store_step = 0.01) {
  const double mu = std::sqrt(2.0) - 1.0;
  const double eps = 1e-6;
  const double xi0 = -40.0, xi1 = 34.0, h = 2e-5;
  struct S { double p, d; };
  auto rhs = [](S s) { return S{s.d, -2.0 * s.d - s.p + s.p * s.p}; };
  S s{1.0 - eps, -mu * eps};
  const long keep = std::lround(store_step / h);
  ShotWave out;
  out.xi.push_back(xi0);
  out.phi.push_back(s.p);
  const long nsteps = std::lround((xi1 - xi0) / h);
  for (long i = 0; i < nsteps; ++i) {
    const S k1 = rhs(s);
    const S s2{s.p + 0.5 * h * k1.p, s.d + 0.5 * h * k1.d};
    const S k2 = rhs(s2);
    const S s3{s.p + 0.5 * h * k2.p, s.d + 0.5 * h * k2.d};
    const S k3 = rhs(s3);
    const S s4{s.p + h * k3.p, s.d + h * k3.d};
    const S k4 = rhs(s4);
    s.p += h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    s.d += h / 6.0 * (k1.d + 2 * k2.d + 2 * k3.d + k4.d);
    if ((i + 1) % keep == 0) {
      out.xi.push_back(xi0 + (i + 1) * h);
      out.phi.push_back(s.p);
    }
  }
  // fit e^xi phi ~ a xi + b on [22, 30], iterate the relabeling to a = 1
  for (int pass = 0; pass < 8; ++pass) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (std::size_t i = 0; i < out.xi.size(); ++i) {
      if (out.xi[i] < 22.0 || out.xi[i] > 30.0) continue;
      const double y = std::exp(out.xi[i]) * out.phi[i];
      sx += out.xi[i]; sy += y; sxx += out.xi[i] * out.xi[i]; sxy += out.xi[i] * y; ++m;
    }
    const double den = m * sxx - sx * sx;
    out.a = (m * sxy - sx * sy) / den;
    out.b = (sy * sxx - sx * sxy) / den;
    const double delta = std::log(out.a);
    if (std::fabs(delta) < 1e-12) break;
    for (auto& x : out.xi) x -= delta;
  }
  out.b /= out.a;
  return out;
}

// Explicit FTCS reference for u_t = D u_xx + u - u^2 with u(left)=1,
// u(right)=0, step data at x=0, from t=1 to t_end. Deliberately naive.
inline std::vector<double> ftcs_run(double D, double x_min, double x_max, double dx,
                                    double t_end, double& sigma_half) {
  const int n = static_cast<int>(std::lround((x_max - x_min) / dx)) + 1;
  std::vector<double> u(n), un(n);
  for (int i = 0; i < n; ++i) u[i] = (x_min + i * dx) <= 0.0 ? 1.0 : 0.0;
  const double dt = 0.2 * dx * dx / D;
  double t = 1.0;
  while (t < t_end) {
    const double step = std::min(dt, t_end - t);
    const double r = D * step / (dx * dx);
    un[0] = 1.0;
    un[n - 1] = 0.0;
    for (int i = 1; i < n - 1; ++i)
      un[i] = u[i] + r * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + step * u[i] * (1.0 - u[i]);
    u.swap(un);
    t += step;
  }
  sigma_half = x_min;
  for (int i = n - 1; i > 0; --i) {
    if (u[i - 1] >= 0.5 && u[i] < 0.5) {
      sigma_half = x_min + (i - 1) * dx + dx * (u[i - 1] - 0.5) / (u[i - 1] - u[i]);
      break;
    }
  }
  return u;
}

// Composite Simpson on a uniform grid (n must make an even interval count).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
