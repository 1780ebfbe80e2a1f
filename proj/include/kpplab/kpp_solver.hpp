// kpp_solver.hpp - time integration of u_t = D u_xx + c(t) u_x + f(u) on a
// 1-D interval with u=1 / u=0 Dirichlet closures. c(t) = 0 in the lab frame;
// c(t) = 2 - 3/(2t) in the frame x -> x - [2t - (3/2) log t], in which the
// front settles to an O(1) position. Runs start at t = 1.
//
// Scheme: Strang splitting with Crank-Nicolson for diffusion+drift
// (tridiagonal solve, Rannacher startup for nonsmooth data) and a Heun step
// for the reaction. Local error is controlled by step doubling.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/wave_profile.hpp"

namespace kpplab {

enum class Frame { lab, moving };

inline const char* frame_name(Frame f) { return f == Frame::lab ? "lab" : "moving"; }

// Frame displacement of the moving frame relative to the lab frame.
inline double frame_shift(double t) { return 2.0 * t - 1.5 * std::log(t); }

struct ReactionFn {
  std::function<double(double)> f;
  // exact flow of u' = f(u) over dt, when available (quadratic: logistic
  // formula); the integrator falls back to a Heun step otherwise
  std::function<double(double, double)> exact_step;
  double fprime0 = 1.0;           // normalized to 1
  std::string tag = "quadratic";
  double curvature_bound = 1.0;   // C with 0 <= s - f(s) <= C s^2

  static ReactionFn quadratic();

  // Checks f(0)=0, f(1)=0, f'(0)=1, f'(s)<=1 and 0 <= s-f(s) <= C s^2 on a
  // sample of [0,1]; throws ConfigError on violation.
  void validate() const;
};

struct Field {
  Grid1D grid;
  std::vector<double> u;
  double t = 1.0;
  Frame frame = Frame::lab;
  double diffusion = 1.0;  // D in u_t = D u_xx + ...
  ReactionFn reaction = ReactionFn::quadratic();
  double last_step_tol = 0.0;  // controller tolerance of the latest evolve
};

// Initial data specification: step (1 for x<=x1, ramp, 0 for x>=x2),
// compact bump on [lo,hi], or a custom table sampled onto the grid.
struct InitSpec {
  enum class Kind { step, bump, table } kind = Kind::step;
  double x1 = 0.0, x2 = 0.0;           // step
  double bump_lo = 0.0, bump_hi = 1.0; // bump support
  double bump_height = 1.0;
  std::vector<double> table_x, table_u;

  static InitSpec step(double x1, double x2);
  static InitSpec bump(double lo, double hi, double height = 1.0);
  static InitSpec table(std::vector<double> xs, std::vector<double> us);
};

Field init_data(const InitSpec& spec, const Grid1D& grid,
                Frame frame = Frame::lab,
                ReactionFn reaction = ReactionFn::quadratic(),
                double diffusion = 1.0);

struct StepController {
  double tol = 2e-6;      // local-error target per unit time; <= 0 disables adaptivity
  double dt_init = 1e-3;
  double dt_min = 1e-11;
  double dt_max = 0.25;
  double safety = 0.85;
  bool check_guard_bands = true;
  double guard_width = 10.0;
};

// Advances field.u to t_end in place. Throws NumericError if the front
// reaches a guard band or the controller underflows.
void evolve(Field& field, double t_end, const StepController& ctrl = {});

// Rightmost level crossing, located by bracketing from the right plus
// linear interpolation. Throws NumericError when the level is not attained.
double front_position(const Field& field, double s);

struct FrontTrace {
  double level = 0.5;
  Frame frame = Frame::lab;
  std::vector<std::pair<double, double>> samples;  // (t, sigma)
};

FrontTrace record_trace(Field& field, double s, std::span<const double> checkpoints,
                        const StepController& ctrl = {});

struct ShiftEstimate {
  double x_inf = 0.0;
  double slope = 0.0;       // coefficient of t^{-1/2} in the fitted model
  double stderr_x_inf = 0.0;
  double stderr_slope = 0.0;
  double rms_residual = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  std::string model_id = "const_plus_rsqrt";
  bool pre_asymptotic = false;  // residual exceeded the tolerance
};

// Fits sigma_s(t) = [phi^{-1}(s) - x_inf] + b t^{-1/2} on a moving-frame
// trace and converts to the convention u(t,.) -> phi(. + x_inf) for the
// unit-amplitude profile; the result is invariant under the translate
// stored in `profile`. residual_tol flags pre-asymptotic windows.
ShiftEstimate extract_xinf(const FrontTrace& trace, const WaveProfile& profile,
                           double residual_tol = 0.05);

struct LogFit {
  double c1 = 0.0;
  double stderr_c1 = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

// Fits sigma(t) = 2t - c1 log t + a + b t^{-1/2} on a lab-frame trace.
LogFit fit_log_coefficient(const FrontTrace& trace);

// (mean |1-u| over the left guard band, mean |u| over the right guard band).
std::pair<double, double> boundary_limits(const Field& field, double guard_width = 10.0);

}  // namespace kpplab
