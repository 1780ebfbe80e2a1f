#include "kpplab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "kpplab/io.hpp"
#include "kpplab/kpp_solver.hpp"
#include "kpplab/self_similar.hpp"
#include "kpplab/wave_profile.hpp"

namespace kpplab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(i * r);
  out.back() = hi;
  return out;
}

}  // namespace

PipelineOptions pipeline_options_from_config(const ExperimentConfig& cfg) {
  PipelineOptions o;
  o.t_end = cfg.get_double("xinfty", "t_end", o.t_end);
  o.level = cfg.get_double("xinfty", "level", o.level);
  o.dx_moving = cfg.get_double("xinfty", "dx_moving", o.dx_moving);
  o.dx_lab = cfg.get_double("xinfty", "dx_lab", o.dx_lab);
  o.step_tol = cfg.get_double("xinfty", "step_tol", o.step_tol);
  o.wave_half_width = cfg.get_double("xinfty", "wave_half_width", o.wave_half_width);
  o.wave_n = cfg.get_int("xinfty", "wave_n", o.wave_n);
  o.wave_tol = cfg.get_double("xinfty", "wave_tol", o.wave_tol);
  o.n_checkpoints = cfg.get_int("xinfty", "n_checkpoints", o.n_checkpoints);
  o.fit_residual_tol = cfg.get_double("xinfty", "fit_residual_tol", o.fit_residual_tol);
  o.run_lab_stage = cfg.get_int("xinfty", "run_lab_stage", o.run_lab_stage ? 1 : 0) != 0;
  o.out_dir = cfg.get_string("xinfty", "out_dir", o.out_dir);
  return o;
}

PipelineReport run_pipeline(const PipelineOptions& opts, const std::string& cfg_hash) {
  PipelineReport rep;
  rep.config_hash = cfg_hash;
  rep.c1_fit = std::numeric_limits<double>::quiet_NaN();
  const bool emit = !opts.out_dir.empty();
  std::string stage = "wave";

  try {
    // --- stage 1: traveling wave -------------------------------------
    auto t0 = std::chrono::steady_clock::now();
    const WaveProfile profile = solve_wave(opts.wave_half_width, opts.wave_n, opts.wave_tol);
    rep.runtimes["wave"] = seconds_since(t0);
    if (emit) {
      emit_outputs(&profile, EmitFormat::csv, opts.out_dir + "/wave_profile.csv");
      emit_outputs(&profile, EmitFormat::json, opts.out_dir + "/wave_meta.json");
    }

    // --- stage 2: moving-frame run + front fit -----------------------
    stage = "evolve_moving";
    t0 = std::chrono::steady_clock::now();
    const double x_right = std::max(60.0, std::ceil(12.0 * std::sqrt(opts.t_end)) + 10.0);
    Grid1D mg{-60.0, x_right,
              static_cast<int>(std::lround((x_right + 60.0) / opts.dx_moving)) + 1};
    Field moving = init_data(InitSpec::step(0.0, 0.0), mg, Frame::moving);
    StepController ctrl;
    ctrl.tol = opts.step_tol;
    const double t_lo = std::max(1.05, opts.t_end / 10.0);
    auto cps = log_spaced(t_lo, opts.t_end, std::max(2, opts.n_checkpoints));
    FrontTrace mtrace = record_trace(moving, opts.level, cps, ctrl);
    rep.runtimes["evolve_moving"] = seconds_since(t0);
    if (emit) {
      emit_outputs(&mtrace, EmitFormat::csv, opts.out_dir + "/trace_moving.csv");
      checkpoint_save(moving, opts.out_dir + "/field_moving_final.ckpt");
    }

    stage = "front_fit";
    t0 = std::chrono::steady_clock::now();
    ShiftEstimate est;
    if (mtrace.samples.size() >= 10 &&
        mtrace.samples.back().first >= 10.0 * mtrace.samples.front().first) {
      est = extract_xinf(mtrace, profile, opts.fit_residual_tol);
    } else {
      // window too short for the asymptotic model; report it as such
      est.pre_asymptotic = true;
      est.x_inf = wave_inverse(profile, opts.level) - std::log(profile.a_tail)
                - mtrace.samples.back().second;
    }
    rep.x_inf_front = est.x_inf;
    rep.pre_asymptotic = est.pre_asymptotic;
    rep.runtimes["front_fit"] = seconds_since(t0);

    // --- stage 3: self-similar transform + alpha ----------------------
    stage = "selfsim";
    t0 = std::chrono::steady_clock::now();
    const SelfSimilarState state = transform_to_ss(moving);
    rep.alpha_moment = state.alpha_moment;
    rep.alpha_fit = state.alpha_fit;
    if (!(state.alpha_moment > 0.0))
      throw NumericError("pipeline: nonpositive alpha estimate");
    rep.x_inf_alpha = -std::log(state.alpha_moment);
    rep.runtimes["selfsim"] = seconds_since(t0);
    if (emit) {
      emit_outputs(&state, EmitFormat::csv, opts.out_dir + "/selfsim_final.csv");
      emit_outputs(&state, EmitFormat::json, opts.out_dir + "/selfsim_summary.json");
    }

    rep.difference = rep.x_inf_front - rep.x_inf_alpha;

    // --- stage 4: lab-frame run for the log coefficient ---------------
    if (opts.run_lab_stage && opts.t_end >= 110.0) {
      stage = "evolve_lab";
      t0 = std::chrono::steady_clock::now();
      const double lab_right = 2.5 * opts.t_end;
      Grid1D lg{-60.0, lab_right,
                static_cast<int>(std::lround((lab_right + 60.0) / opts.dx_lab)) + 1};
      Field lab = init_data(InitSpec::step(0.0, 0.0), lg, Frame::lab);
      auto lab_cps = log_spaced(std::max(100.0, opts.t_end / 10.0), opts.t_end, 25);
      FrontTrace ltrace = record_trace(lab, opts.level, lab_cps, ctrl);
      rep.c1_fit = fit_log_coefficient(ltrace).c1;
      rep.runtimes["evolve_lab"] = seconds_since(t0);
      if (emit) emit_outputs(&ltrace, EmitFormat::csv, opts.out_dir + "/trace_lab.csv");
    }

    if (emit) {
      stage = "report";
      emit_outputs(&rep, EmitFormat::json, opts.out_dir + "/report.json");
    }
  } catch (const std::exception& e) {
    rep.failed_stage = stage;
    if (emit) {
      try {
        emit_outputs(&rep, EmitFormat::json, opts.out_dir + "/report_partial.json");
      } catch (...) {
      }
    }
    throw NumericError("pipeline stage '" + stage + "' failed: " + e.what());
  }
  return rep;
}

}  // namespace kpplab
