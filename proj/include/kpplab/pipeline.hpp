// pipeline.hpp - the end-to-end cross-check: solve the wave, evolve the
// moving-frame front, fit x_inf from the level positions, transform to
// self-similar variables and estimate alpha; the two sides of
// x_inf = -log(alpha_inf) meet in the report. A lab-frame run supplies the
// logarithmic drift coefficient fit.
#pragma once

#include <map>
#include <string>

#include "kpplab/config.hpp"

namespace kpplab {

struct PipelineOptions {
  double t_end = 2000.0;
  double level = 0.5;
  double dx_moving = 0.05;
  double dx_lab = 0.1;
  double step_tol = 1e-6;
  double wave_half_width = 25.0;
  int wave_n = 2000;
  double wave_tol = 1e-8;
  int n_checkpoints = 12;
  double fit_residual_tol = 0.05;
  bool run_lab_stage = true;  // the lab run only feeds c1_fit
  std::string out_dir;        // empty = no artifacts written
};

struct PipelineReport {
  double x_inf_front = 0.0;
  double x_inf_alpha = 0.0;   // -log(alpha_moment)
  double difference = 0.0;    // x_inf_front - x_inf_alpha, exactly
  double c1_fit = 0.0;        // NaN when the lab stage is skipped/too short
  double alpha_moment = 0.0;
  double alpha_fit = 0.0;
  bool pre_asymptotic = false;
  std::map<std::string, double> runtimes;  // stage -> seconds
  std::string config_hash;
  std::string failed_stage;  // set by the CLI wrapper on error
};

PipelineOptions pipeline_options_from_config(const ExperimentConfig& cfg);

// Runs the stages in order, writing intermediate artifacts into out_dir when
// set. A stage failure is rethrown with the stage name prefixed; artifacts
// from completed stages are already on disk by then.
PipelineReport run_pipeline(const PipelineOptions& opts,
                            const std::string& config_hash_hex = "");

}  // namespace kpplab
