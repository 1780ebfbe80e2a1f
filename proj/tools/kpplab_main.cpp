// kpplab - experiment runner for the front-convergence laboratory.
//
// Subcommands: wave, evolve, selfsim, barrier, bbm, xinfty.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpplab/barriers.hpp"
#include "kpplab/bbm.hpp"
#include "kpplab/config.hpp"
#include "kpplab/fit.hpp"
#include "kpplab/io.hpp"
#include "kpplab/kpp_solver.hpp"
#include "kpplab/pipeline.hpp"
#include "kpplab/self_similar.hpp"
#include "kpplab/wave_profile.hpp"

using namespace kpplab;
using ordered_json = nlohmann::ordered_json;

namespace {

int verbosity() {
  const char* v = std::getenv("KPPLAB_VERBOSE");
  return v ? std::atoi(v) : 0;
}

void log_line(const std::string& s) {
  if (verbosity() > 0) std::cerr << "[kpplab] " << s << "\n";
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(csv);
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(i * r);
  out.back() = hi;
  return out;
}

void write_json(const ordered_json& j, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  ExperimentConfig cfg;

  void load() {
    if (!config_path.empty()) cfg = parse_config_file(config_path);
  }
};

int cmd_wave(const Common& c) {
  c.cfg.validate_keys("wave", {"half_width", "n", "tol", "window_lo", "window_hi", "out_dir"});
  const double half_width = c.cfg.get_double("wave", "half_width", 25.0);
  const int n = c.cfg.get_int("wave", "n", 2000);
  const double tol = c.cfg.get_double("wave", "tol", 1e-8);
  SolveWaveOptions opts;
  opts.fit_window_lo = c.cfg.get_double("wave", "window_lo", 6.0);
  opts.fit_window_hi = c.cfg.get_double("wave", "window_hi", 0.0);

  log_line("solving the traveling-wave problem");
  const WaveProfile p = solve_wave(half_width, n, tol, opts);
  emit_outputs(&p, EmitFormat::csv, c.out_dir + "/wave_profile.csv");
  emit_outputs(&p, EmitFormat::json, c.out_dir + "/wave_meta.json");
  std::printf("wave: residual_norm=%.3e k_tail=%.6f a_tail=%.8f omega=%.3f -> %s\n",
              p.residual_norm, p.k_tail, p.a_tail, p.omega_fit, c.out_dir.c_str());
  return 0;
}

int cmd_evolve(const Common& c) {
  c.cfg.validate_keys("evolve", {"frame", "t_end", "dx", "x_min", "x_max", "level",
                                 "step_tol", "n_checkpoints", "t_first", "out_dir",
                                 "diffusion"});
  const std::string frame_s = c.cfg.get_string("evolve", "frame", "lab");
  const Frame frame = frame_s == "moving" ? Frame::moving : Frame::lab;
  const double t_end = c.cfg.get_double("evolve", "t_end", 50.0);
  const double dx = c.cfg.get_double("evolve", "dx", 0.1);
  const double level = c.cfg.get_double("evolve", "level", 0.5);
  const double diffusion = c.cfg.get_double("evolve", "diffusion", 1.0);
  double x_min = c.cfg.get_double("evolve", "x_min", -60.0);
  double x_max = c.cfg.get_double("evolve", "x_max",
                                  frame == Frame::lab ? 2.5 * t_end : 60.0);
  StepController ctrl;
  ctrl.tol = c.cfg.get_double("evolve", "step_tol", 1e-6);

  Grid1D g{x_min, x_max, static_cast<int>(std::lround((x_max - x_min) / dx)) + 1};
  Field f = init_data(InitSpec::step(0.0, 0.0), g, frame, ReactionFn::quadratic(), diffusion);
  const double t_first = c.cfg.get_double("evolve", "t_first", std::max(1.05, t_end / 10.0));
  const int ncp = c.cfg.get_int("evolve", "n_checkpoints", 16);
  auto cps = log_spaced(t_first, t_end, ncp);

  log_line("evolving " + frame_s + " frame to t=" + std::to_string(t_end));
  FrontTrace tr = record_trace(f, level, cps, ctrl);
  emit_outputs(&tr, EmitFormat::csv, c.out_dir + "/trace.csv");
  emit_outputs(&f, EmitFormat::csv, c.out_dir + "/snapshot.csv");
  emit_outputs(&f, EmitFormat::json, c.out_dir + "/snapshot_meta.json");
  checkpoint_save(f, c.out_dir + "/field.ckpt");
  const auto [lg, rg] = boundary_limits(f);
  std::printf("evolve: frame=%s t=%.6g sigma(%.2g)=%.6f guards=(%.2e,%.2e) -> %s\n",
              frame_s.c_str(), f.t, level, tr.samples.back().second, lg, rg,
              c.out_dir.c_str());
  return 0;
}

int cmd_selfsim(const Common& c) {
  c.cfg.validate_keys("selfsim", {"tau_end", "deta", "eta_max", "dtau", "source",
                                  "checkpoint", "support_hi", "out_dir"});
  const double tau_end = c.cfg.get_double("selfsim", "tau_end", 8.0);
  const double deta = c.cfg.get_double("selfsim", "deta", 0.005);
  const double eta_max = c.cfg.get_double("selfsim", "eta_max", 12.0);
  const double dtau = c.cfg.get_double("selfsim", "dtau", 1e-3);
  const std::string source = c.cfg.get_string("selfsim", "source", "compact");

  SelfSimilarState s;
  if (source == "checkpoint") {
    const std::string path = c.cfg.get_string("selfsim", "checkpoint", "");
    if (path.empty()) throw ConfigError("selfsim: source=checkpoint needs checkpoint=PATH");
    Field f = checkpoint_load_field(path);
    const int n = static_cast<int>(std::lround((eta_max + 1.0) / deta)) + 1;
    std::vector<double> eta(n);
    for (int i = 0; i < n; ++i) eta[i] = -1.0 + i * deta;
    s = transform_to_ss(f, eta);
  } else {
    // compactly supported bump on [0, support_hi]
    const double hi = c.cfg.get_double("selfsim", "support_hi", 2.0);
    const int n = static_cast<int>(std::lround((eta_max + 1.0) / deta)) + 1;
    s.tau = 0.0;
    s.eta_grid.resize(n);
    s.w.resize(n);
    for (int i = 0; i < n; ++i) {
      const double eta = -1.0 + i * deta;
      s.eta_grid[i] = eta;
      const double z = 2.0 * eta / hi - 1.0;
      s.w[i] = (eta > 0.0 && eta < hi) ? (1.0 - z * z) * (1.0 - z * z) : 0.0;
    }
  }

  log_line("evolving w to tau=" + std::to_string(tau_end));
  EvolveWOptions wopts;
  wopts.dtau = dtau;
  if (tau_end > s.tau) evolve_w(s, tau_end, wopts);
  emit_outputs(&s, EmitFormat::csv, c.out_dir + "/selfsim.csv");
  emit_outputs(&s, EmitFormat::json, c.out_dir + "/selfsim_summary.json");
  std::printf("selfsim: tau=%.4f alpha_moment=%.6f alpha_fit=%.6f -> %s\n", s.tau,
              s.alpha_moment, s.alpha_fit, c.out_dir.c_str());
  return 0;
}

int cmd_barrier(const Common& c) {
  c.cfg.validate_keys("barrier", {"which", "gamma", "C_gamma", "lambda", "epsilon",
                                  "amplification", "t_lo", "t_hi", "forcing_bound",
                                  "tau_span", "out_dir"});
  const std::string which = c.cfg.get_string("barrier", "which", "all");
  ordered_json j;

  if (which == "all" || which == "eps") {
    const auto [e1, e2] = epsilon_constants();
    j["epsilon_constants"] = {{"eps1", e1}, {"eps2", e2}};
  }
  if (which == "all" || which == "sub") {
    const double gamma = c.cfg.get_double("barrier", "gamma", 0.2);
    const double cg = c.cfg.get_double("barrier", "C_gamma", 1.0);
    const double span = c.cfg.get_double("barrier", "tau_span", 30.0);
    SubBarrierSpec spec = subsolution_build(gamma, cg);
    auto rep = verify_subsolution(spec, spec.tau0, spec.tau0 + span, 0.0, 12.0);
    j["subsolution"] = {{"tau0", spec.tau0},
                        {"a2", spec.a2},
                        {"a3", spec.a3},
                        {"gamma", spec.gamma},
                        {"C_gamma", spec.C_gamma},
                        {"eps1", spec.eps1},
                        {"eps2", spec.eps2},
                        {"max_violation", rep.max_violation},
                        {"arg_tau", rep.arg_tau},
                        {"arg_eta", rep.arg_eta},
                        {"grid", {rep.n_tau, rep.n_eta}},
                        {"refinement_confirmed", rep.refinement_confirmed}};
    // violation field for plotting
    std::ostringstream ss;
    ss << "tau,eta,operator_value\n";
    for (int i = 0; i <= 60; ++i)
      for (int k = 1; k <= 120; ++k) {
        const double tau = spec.tau0 + span * i / 60.0;
        const double eta = 12.0 * k / 120.0;
        ss << format_double(tau) << ',' << format_double(eta) << ','
           << format_double(subsolution_operator(spec, tau, eta)) << '\n';
      }
    std::filesystem::create_directories(c.out_dir);
    std::ofstream csv(c.out_dir + "/subsolution_field.csv");
    csv << ss.str();
  }
  if (which == "all" || which == "super") {
    SuperBarrierSpec spec;
    spec.lambda = c.cfg.get_double("barrier", "lambda", 0.05);
    spec.epsilon = c.cfg.get_double("barrier", "epsilon", 0.05);
    spec.gamma = c.cfg.get_double("barrier", "gamma", 0.25);
    spec.amplification = c.cfg.get_double("barrier", "amplification", 10.0);
    const double t_lo = c.cfg.get_double("barrier", "t_lo", 1e3);
    const double t_hi = c.cfg.get_double("barrier", "t_hi", 1e5);
    const double fb = c.cfg.get_double("barrier", "forcing_bound", 1.0);
    auto rep = verify_supersolution(spec, t_lo, t_hi, fb);
    j["supersolution"] = {{"lambda", spec.lambda},
                          {"epsilon", spec.epsilon},
                          {"gamma", spec.gamma},
                          {"amplification", spec.amplification},
                          {"min_margin", rep.min_margin},
                          {"arg_t", rep.arg_t},
                          {"arg_x", rep.arg_x},
                          {"exponent_chain_ok", rep.exponent_chain_ok},
                          {"refinement_confirmed", rep.refinement_confirmed}};
  }
  if (which == "all" || which == "ode") {
    const double gamma = std::min(0.30, c.cfg.get_double("barrier", "gamma", 0.25));
    ordered_json samples = ordered_json::array();
    for (double t : {1.0, 10.0, 100.0, 1e4}) {
      samples.push_back({{"t", t}, {"f", ode_proxy(gamma, 1.0, t)}});
    }
    j["ode_proxy"] = {{"gamma", gamma}, {"f1", 1.0}, {"samples", samples}};
  }

  write_json(j, c.out_dir + "/barrier_report.json");
  std::printf("barrier: report -> %s/barrier_report.json\n", c.out_dir.c_str());
  return 0;
}

int cmd_bbm(const Common& c) {
  c.cfg.validate_keys("bbm", {"t_end", "replicates", "diffusion", "checkpoints",
                              "bootstrap", "out_dir", "seed"});
  BBMConfig cfg;
  cfg.t_end = c.cfg.get_double("bbm", "t_end", 8.0);
  cfg.replicates = c.cfg.get_int("bbm", "replicates", 10000);
  cfg.diffusion = c.cfg.get_double("bbm", "diffusion", 0.5);
  cfg.seed = c.cfg.get_u64("bbm", "seed", c.seed);
  const std::string cps = c.cfg.get_string("bbm", "checkpoints", "");
  cfg.checkpoints = cps.empty() ? std::vector<double>{cfg.t_end} : parse_list(cps);

  log_line("simulating " + std::to_string(cfg.replicates) + " replicates");
  BBMEnsemble ens = simulate(cfg);
  emit_outputs(&ens, EmitFormat::csv, c.out_dir + "/bbm.csv");

  ordered_json j;
  j["replicates"] = cfg.replicates;
  j["diffusion"] = cfg.diffusion;
  j["seed"] = cfg.seed;
  ordered_json med;
  for (std::size_t i = 0; i < ens.checkpoints.size(); ++i) {
    auto copy = ens.max_at[i];
    med[format_double(ens.checkpoints[i])] = median_of(std::move(copy));
  }
  j["median_by_t"] = med;
  if (ens.checkpoints.size() >= 4) {
    auto mf = median_shift_fit(ens, ens.checkpoints,
                               c.cfg.get_int("bbm", "bootstrap", 200));
    j["c_fit"] = mf.c;
    j["c_stderr"] = mf.stderr_c;
  }
  write_json(j, c.out_dir + "/bbm_summary.json");
  std::printf("bbm: %d replicates to t=%.3g -> %s\n", cfg.replicates, cfg.t_end,
              c.out_dir.c_str());
  return 0;
}

int cmd_xinfty(const Common& c) {
  c.cfg.validate_keys("xinfty", {"t_end", "level", "dx_moving", "dx_lab", "step_tol",
                                 "wave_half_width", "wave_n", "wave_tol", "n_checkpoints",
                                 "fit_residual_tol", "run_lab_stage", "out_dir"});
  PipelineOptions opts = pipeline_options_from_config(c.cfg);
  if (opts.out_dir.empty()) opts.out_dir = c.out_dir;
  log_line("running the x_infty pipeline to t=" + std::to_string(opts.t_end));
  PipelineReport rep = run_pipeline(opts, config_hash_hex(c.cfg));
  std::printf("xinfty: x_inf_front=%.6f -log(alpha)=%.6f difference=%+.6f%s\n",
              rep.x_inf_front, rep.x_inf_alpha, rep.difference,
              rep.pre_asymptotic ? " [pre-asymptotic]" : "");
  if (std::isfinite(rep.c1_fit)) std::printf("xinfty: c1_fit=%.4f\n", rep.c1_fit);
  std::printf("xinfty: report -> %s/report.json\n", opts.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpplab - Fisher-KPP front convergence laboratory"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "sectioned key-value config file");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "master seed for stochastic subcommands");

  auto* wave = app.add_subcommand("wave", "solve the minimal-speed traveling wave");
  double wave_hw = 0;
  int wave_n = 0;
  double wave_tol = 0;
  wave->add_option("--half-width", wave_hw, "domain half width (>= 20)");
  wave->add_option("--n", wave_n, "node count (>= 200)");
  wave->add_option("--tol", wave_tol, "residual tolerance");

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve the reaction-diffusion front");
  std::string ev_frame;
  double ev_tend = 0, ev_dx = 0;
  evolve_cmd->add_option("--frame", ev_frame, "lab | moving");
  evolve_cmd->add_option("--t-end", ev_tend, "final time (runs start at t=1)");
  evolve_cmd->add_option("--dx", ev_dx, "grid spacing");

  auto* selfsim = app.add_subcommand("selfsim", "evolve the self-similar w-equation");
  double ss_tau = 0;
  selfsim->add_option("--tau-end", ss_tau, "final self-similar time");

  auto* barrier = app.add_subcommand("barrier", "build and certify barriers");
  std::string ba_which;
  barrier->add_option("--which", ba_which, "all | eps | sub | super | ode");

  auto* bbm = app.add_subcommand("bbm", "branching Brownian motion Monte Carlo");
  double bbm_tend = 0;
  int bbm_reps = 0;
  bbm->add_option("--t-end", bbm_tend, "final time");
  bbm->add_option("--replicates", bbm_reps, "number of replicates");

  auto* xinfty = app.add_subcommand("xinfty", "run the full x_infty cross-check pipeline");
  double xi_tend = 0;
  xinfty->add_option("--t-end", xi_tend, "final time of the front runs");

  CLI11_PARSE(app, argc, argv);

  try {
    common.load();
    // command-line overrides land in the config so the hash reflects them
    if (wave->parsed()) {
      if (wave_hw > 0) common.cfg.set("wave", "half_width", format_double(wave_hw));
      if (wave_n > 0) common.cfg.set("wave", "n", std::to_string(wave_n));
      if (wave_tol > 0) common.cfg.set("wave", "tol", format_double(wave_tol));
      return cmd_wave(common);
    }
    if (evolve_cmd->parsed()) {
      if (!ev_frame.empty()) common.cfg.set("evolve", "frame", ev_frame);
      if (ev_tend > 0) common.cfg.set("evolve", "t_end", format_double(ev_tend));
      if (ev_dx > 0) common.cfg.set("evolve", "dx", format_double(ev_dx));
      return cmd_evolve(common);
    }
    if (selfsim->parsed()) {
      if (ss_tau > 0) common.cfg.set("selfsim", "tau_end", format_double(ss_tau));
      return cmd_selfsim(common);
    }
    if (barrier->parsed()) {
      if (!ba_which.empty()) common.cfg.set("barrier", "which", ba_which);
      return cmd_barrier(common);
    }
    if (bbm->parsed()) {
      if (bbm_tend > 0) common.cfg.set("bbm", "t_end", format_double(bbm_tend));
      if (bbm_reps > 0) common.cfg.set("bbm", "replicates", std::to_string(bbm_reps));
      return cmd_bbm(common);
    }
    if (xinfty->parsed()) {
      if (xi_tend > 0) common.cfg.set("xinfty", "t_end", format_double(xi_tend));
      return cmd_xinfty(common);
    }
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
