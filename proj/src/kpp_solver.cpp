#include "kpplab/kpp_solver.hpp"

#include <algorithm>
#include <cmath>

#include "kpplab/fit.hpp"

namespace kpplab {

ReactionFn ReactionFn::quadratic() {
  ReactionFn r;
  r.f = [](double s) { return s - s * s; };
  r.exact_step = [](double u, double dt) {
    // logistic flow; exact on the linear tail regime as well
    const double g = std::exp(dt);
    return u * g / (1.0 + u * (g - 1.0));
  };
  r.fprime0 = 1.0;
  r.tag = "quadratic";
  r.curvature_bound = 1.0;
  return r;
}

void ReactionFn::validate() const {
  if (!f) throw ConfigError("ReactionFn: missing function");
  if (std::fabs(f(0.0)) > 1e-12 || std::fabs(f(1.0)) > 1e-12)
    throw ConfigError("ReactionFn: f(0) and f(1) must vanish");
  const double d0 = (f(1e-7) - f(0.0)) / 1e-7;
  if (std::fabs(d0 - 1.0) > 1e-4)
    throw ConfigError("ReactionFn: f'(0) must equal 1");
  const int m = 2001;
  for (int i = 0; i <= m; ++i) {
    const double s = static_cast<double>(i) / m;
    const double g = s - f(s);
    if (g < -1e-12 || g > curvature_bound * s * s + 1e-12)
      throw ConfigError("ReactionFn: s - f(s) outside [0, C s^2]");
    if (i > 0 && i < m) {
      const double d = (f(s + 1e-6) - f(s - 1e-6)) / 2e-6;
      if (d > 1.0 + 1e-6) throw ConfigError("ReactionFn: f'(s) exceeds f'(0)");
    }
  }
}

InitSpec InitSpec::step(double x1, double x2) {
  if (x1 > x2) throw ConfigError("init_data: step requires x1 <= x2");
  InitSpec s;
  s.kind = Kind::step;
  s.x1 = x1;
  s.x2 = x2;
  return s;
}

InitSpec InitSpec::bump(double lo, double hi, double height) {
  InitSpec s;
  s.kind = Kind::bump;
  s.bump_lo = lo;
  s.bump_hi = hi;
  s.bump_height = height;
  return s;
}

InitSpec InitSpec::table(std::vector<double> xs, std::vector<double> us) {
  InitSpec s;
  s.kind = Kind::table;
  s.table_x = std::move(xs);
  s.table_u = std::move(us);
  return s;
}

Field init_data(const InitSpec& spec, const Grid1D& grid, Frame frame,
                ReactionFn reaction, double diffusion) {
  Field f;
  f.grid = grid;
  f.t = 1.0;
  f.frame = frame;
  f.diffusion = diffusion;
  f.reaction = std::move(reaction);
  f.u.resize(grid.n);
  switch (spec.kind) {
    case InitSpec::Kind::step:
      for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x <= spec.x1) f.u[i] = 1.0;
        else if (x >= spec.x2) f.u[i] = 0.0;
        else f.u[i] = (spec.x2 - x) / (spec.x2 - spec.x1);
      }
      break;
    case InitSpec::Kind::bump: {
      if (!(spec.bump_height > 0.0 && spec.bump_height <= 1.0))
        throw ConfigError("init_data: bump height must be in (0,1]");
      const double mid = 0.5 * (spec.bump_lo + spec.bump_hi);
      const double rad = 0.5 * (spec.bump_hi - spec.bump_lo);
      for (int i = 0; i < grid.n; ++i) {
        const double z = (grid.x(i) - mid) / rad;
        f.u[i] = (std::fabs(z) < 1.0) ? spec.bump_height * (1.0 - z * z) * (1.0 - z * z) : 0.0;
      }
      break;
    }
    case InitSpec::Kind::table:
      for (double v : spec.table_u)
        if (v < 0.0 || v > 1.0)
          throw ConfigError("init_data: table values must lie in [0,1]");
      for (int i = 0; i < grid.n; ++i)
        f.u[i] = interp_linear(spec.table_x, spec.table_u, grid.x(i));
      break;
  }
  for (double v : f.u)
    if (v < 0.0 || v > 1.0) throw ConfigError("init_data: values outside [0,1]");
  return f;
}

namespace {

double drift_coefficient(Frame frame, double t) {
  return frame == Frame::moving ? 2.0 - 3.0 / (2.0 * t) : 0.0;
}

// Stencil weights for D u_xx + c u_x. The three-point symbol is matched at
// the selected decay rate lambda* = sqrt(f'(0)/D) so that the COMBINED
// one-step map (theta scheme in time, this stencil in space) reproduces
// e^{dt S(lambda)} exactly at lambda* in value and lambda-derivative, with
// S(l) = D l^2 - c l. Together with the exact reaction flow this transports
// the pulled-front mode at exactly the right speed; a plain central stencil
// is second-order too, but its dispersion error at lambda* gives the front
// a spurious velocity ~ dx^2/3 (and the unfitted time stepping ~ dt^2/8)
// that accumulates linearly over long moving-frame runs.
struct StencilWeights {
  double am, ac, ap;  // coefficients of u[i-1], u[i], u[i+1]
};

StencilWeights fitted_weights(double D, double c, double lambda, double dx,
                              double dt, double theta) {
  const double S = D * lambda * lambda - c * lambda;
  // time-fitted target: theta=1/2 matches (1+z/2)/(1-z/2) = e^{dt S},
  // theta=1 matches 1/(1-z) = e^{dt S}, z = dt*S_h
  const double Shat = (theta == 0.5) ? (2.0 / dt) * std::tanh(0.5 * dt * S)
                                     : (1.0 - std::exp(-dt * S)) / dt;
  // constraints: S_h(0) = 0, S_h''(0) = 2D (diffusion consistency),
  // S_h(lambda*) = Shat (exact one-step growth of the selected mode);
  // advection consistency at O(dx^2) and an O(dx^4) front speed follow
  const double z = lambda * dx;
  const double ep = std::exp(z), em = std::exp(-z);
  const double sum = 2.0 * D / (dx * dx);  // am + ap
  const double am = (Shat - sum * (em - 1.0)) / (ep - em);
  const double ap = sum - am;
  return {am, -sum, ap};
}

// One diffusion+drift step: theta-scheme for u_t = D u_xx + c u_x with the
// drift evaluated at the time-step midpoint. theta = 1/2 is Crank-Nicolson,
// theta = 1 the backward Euler used for Rannacher startup steps.
void diffusion_step(std::vector<double>& u, const Grid1D& g, double D, double c,
                    double lambda, double dt, double theta,
                    std::vector<double>& lo, std::vector<double>& di,
                    std::vector<double>& up, std::vector<double>& rhs) {
  const int n = g.n;
  const StencilWeights w = fitted_weights(D, c, lambda, g.dx(), dt, theta);

  lo.assign(n, 0.0);
  di.assign(n, 1.0);
  up.assign(n, 0.0);
  rhs.resize(n);

  rhs[0] = u[0];  // Dirichlet closures pin the initial edge states
  for (int i = 1; i < n - 1; ++i) {
    lo[i] = -dt * theta * w.am;
    di[i] = 1.0 - dt * theta * w.ac;
    up[i] = -dt * theta * w.ap;
    const double expl = 1.0 - theta;
    rhs[i] = u[i] + dt * expl * (w.am * u[i - 1] + w.ac * u[i] + w.ap * u[i + 1]);
  }
  rhs[n - 1] = u[n - 1];

  solve_tridiag(lo, di, up, rhs);
  u.swap(rhs);
}

// Pointwise reaction flow: exact when the reaction provides it, otherwise
// a Heun step (second order, adequate for the non-stiff reactions allowed).
void reaction_step(std::vector<double>& u, const ReactionFn& r, double dt) {
  if (r.exact_step) {
    for (double& v : u) v = r.exact_step(v, dt);
    return;
  }
  for (double& v : u) {
    const double k1 = r.f(v);
    const double k2 = r.f(v + dt * k1);
    v += 0.5 * dt * (k1 + k2);
  }
}

// One Strang step from t with size dt. rannacher switches the inner solve
// to backward-Euler halves (used right after nonsmooth initial data).
void strang_step(std::vector<double>& u, const Field& meta, double t, double dt,
                 bool rannacher,
                 std::vector<double>& lo, std::vector<double>& di,
                 std::vector<double>& up, std::vector<double>& rhs) {
  const double lambda = std::sqrt(meta.reaction.fprime0 / meta.diffusion);
  reaction_step(u, meta.reaction, 0.5 * dt);
  if (rannacher) {
    const double c1 = drift_coefficient(meta.frame, t + 0.25 * dt);
    diffusion_step(u, meta.grid, meta.diffusion, c1, lambda, 0.5 * dt, 1.0, lo, di, up, rhs);
    const double c2 = drift_coefficient(meta.frame, t + 0.75 * dt);
    diffusion_step(u, meta.grid, meta.diffusion, c2, lambda, 0.5 * dt, 1.0, lo, di, up, rhs);
  } else {
    const double c = drift_coefficient(meta.frame, t + 0.5 * dt);
    diffusion_step(u, meta.grid, meta.diffusion, c, lambda, dt, 0.5, lo, di, up, rhs);
  }
  reaction_step(u, meta.reaction, 0.5 * dt);
}

void check_guard_bands(const Field& f, double guard) {
  // only meaningful on the side where the data actually holds a front state
  const int n = f.grid.n;
  const double dx = f.grid.dx();
  const int gl = std::min(n - 1, static_cast<int>(guard / dx));
  const int gr = std::max(0, n - 1 - gl);
  if (f.u[0] > 0.5 && 1.0 - f.u[gl] > 0.05)
    throw NumericError("evolve: front reached the left guard band (domain too small)");
  if (f.u[n - 1] < 0.5 && f.u[gr] > 0.01)
    throw NumericError("evolve: front reached the guard band (domain too small)");
}

}  // namespace

void evolve(Field& field, double t_end, const StepController& ctrl) {
  if (!(t_end > field.t)) throw ConfigError("evolve: t_end must exceed field.t");
  const int n = field.grid.n;
  if (n < 5) throw ConfigError("evolve: grid too small");

  field.last_step_tol = ctrl.tol;
  std::vector<double> lo, di, up, rhs;
  std::vector<double> ubig, usmall;
  double dt = std::min(ctrl.dt_init, ctrl.dt_max);
  // Rannacher startup: damp the step-data discontinuity with a few
  // backward-Euler halves before switching to Crank-Nicolson.
  int rannacher_left = 2;

  while (field.t < t_end) {
    dt = std::min(dt, t_end - field.t);
    const bool rann = rannacher_left > 0;

    if (rann) {
      // startup steps on possibly nonsmooth data are taken at dt_init
      // without error control; backward Euler damps the discontinuity
      const double dts = std::min(std::min(ctrl.dt_init, dt), 1e-3);
      strang_step(field.u, field, field.t, dts, true, lo, di, up, rhs);
      field.t += dts;
      --rannacher_left;
      continue;
    }

    if (ctrl.tol <= 0.0) {
      strang_step(field.u, field, field.t, dt, rann, lo, di, up, rhs);
      field.t += dt;
      if (rann) --rannacher_left;
      if (ctrl.check_guard_bands) check_guard_bands(field, ctrl.guard_width);
      continue;
    }

    ubig = field.u;
    strang_step(ubig, field, field.t, dt, rann, lo, di, up, rhs);
    usmall = field.u;
    strang_step(usmall, field, field.t, 0.5 * dt, rann, lo, di, up, rhs);
    strang_step(usmall, field, field.t + 0.5 * dt, 0.5 * dt, rann, lo, di, up, rhs);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(ubig[i] - usmall[i]));
    err /= 3.0;  // Richardson factor for a second-order step

    // error-per-unit-time acceptance keeps the accumulated drift bounded
    // independently of the step count (local error ~ C dt^3, rate ~ C dt^2)
    const double rate = err / dt;
    if (rate <= ctrl.tol) {
      field.u.swap(usmall);
      field.t += dt;
      if (rann) --rannacher_left;
      if (ctrl.check_guard_bands) check_guard_bands(field, ctrl.guard_width);
      const double grow = (rate > 0.0) ? ctrl.safety * std::sqrt(ctrl.tol / rate) : 2.0;
      dt = std::min(ctrl.dt_max, dt * std::clamp(grow, 0.3, 2.0));
    } else {
      dt *= std::max(0.3, ctrl.safety * std::sqrt(ctrl.tol / rate));
      if (dt < ctrl.dt_min)
        throw NumericError("evolve: step controller underflow (dt below dt_min)");
    }
  }
}

double front_position(const Field& field, double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("front_position: level must be in (0,1)");
  const int n = field.grid.n;
  for (int i = n - 1; i > 0; --i) {
    const double ur = field.u[i], ul = field.u[i - 1];
    if ((ul >= s && ur < s) || (ul == s)) {
      if (ul == ur) return field.grid.x(i - 1);
      const double w = (ul - s) / (ul - ur);
      return field.grid.x(i - 1) + w * field.grid.dx();
    }
    if (ul < s && ur >= s) {  // rising crossing counts too ("largest sigma")
      const double w = (s - ul) / (ur - ul);
      return field.grid.x(i - 1) + w * field.grid.dx();
    }
  }
  throw NumericError("front_position: level never attained");
}

FrontTrace record_trace(Field& field, double s, std::span<const double> checkpoints,
                        const StepController& ctrl) {
  FrontTrace tr;
  tr.level = s;
  tr.frame = field.frame;
  double prev = field.t;
  for (double tc : checkpoints) {
    if (tc < prev) throw ConfigError("record_trace: checkpoints must be increasing");
    if (tc > field.t) evolve(field, tc, ctrl);
    tr.samples.emplace_back(field.t, front_position(field, s));
    prev = tc;
  }
  return tr;
}

ShiftEstimate extract_xinf(const FrontTrace& trace, const WaveProfile& profile,
                           double residual_tol) {
  if (trace.frame != Frame::moving)
    throw ConfigError("extract_xinf: requires a moving-frame trace");
  const std::size_t m = trace.samples.size();
  if (m < 10) throw ConfigError("extract_xinf: needs >= 10 samples");
  const double t0 = trace.samples.front().first, t1 = trace.samples.back().first;
  if (t1 < 10.0 * t0) throw ConfigError("extract_xinf: samples must span a decade in t");

  // sigma(t) = phi^{-1}(s) - x_inf + o(1); convert with the unit-amplitude
  // convention so the estimate does not depend on the stored translate.
  const double xi_s = wave_inverse(profile, trace.level) - std::log(profile.a_tail);
  std::vector<double> y(m), ones(m, 1.0), rs(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = xi_s - trace.samples[i].second;
    rs[i] = 1.0 / std::sqrt(trace.samples[i].first);
  }
  auto fit = least_squares({ones, rs}, y);

  ShiftEstimate est;
  est.x_inf = fit.coef[0];
  est.slope = fit.coef[1];
  est.stderr_x_inf = fit.stderrs[0];
  est.stderr_slope = fit.stderrs[1];
  est.rms_residual = fit.rms_residual;
  est.window_lo = t0;
  est.window_hi = t1;
  est.pre_asymptotic = fit.rms_residual > residual_tol;
  return est;
}

LogFit fit_log_coefficient(const FrontTrace& trace) {
  if (trace.frame != Frame::lab)
    throw ConfigError("fit_log_coefficient: requires a lab-frame trace");
  const std::size_t m = trace.samples.size();
  if (m < 4) throw ConfigError("fit_log_coefficient: needs >= 4 samples");

  std::vector<double> y(m), lt(m), ones(m, 1.0), rs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = trace.samples[i].first;
    y[i] = trace.samples[i].second - 2.0 * t;
    lt[i] = std::log(t);
    rs[i] = 1.0 / std::sqrt(t);
  }
  auto fit = least_squares({lt, ones, rs}, y);
  LogFit lf;
  lf.c1 = -fit.coef[0];
  lf.stderr_c1 = fit.stderrs[0];
  lf.intercept = fit.coef[1];
  lf.rms_residual = fit.rms_residual;
  return lf;
}

std::pair<double, double> boundary_limits(const Field& field, double guard_width) {
  const int n = field.grid.n;
  const double dx = field.grid.dx();
  const int g = std::max(1, std::min(n, static_cast<int>(guard_width / dx) + 1));
  double left = 0.0, right = 0.0;
  for (int i = 0; i < g; ++i) left += std::fabs(1.0 - field.u[i]);
  for (int i = n - g; i < n; ++i) right += std::fabs(field.u[i]);
  return {left / g, right / g};
}

}  // namespace kpplab
