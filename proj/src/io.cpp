#include "kpplab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kpplab/bbm.hpp"
#include "kpplab/kpp_solver.hpp"
#include "kpplab/pipeline.hpp"
#include "kpplab/self_similar.hpp"
#include "kpplab/wave_profile.hpp"

namespace kpplab {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void emit_trace_csv(const FrontTrace& tr, const std::string& path) {
  std::ostringstream ss;
  ss << "t,sigma,level,frame\n";
  for (const auto& [t, sigma] : tr.samples)
    ss << format_double(t) << ',' << format_double(sigma) << ','
       << format_double(tr.level) << ',' << frame_name(tr.frame) << '\n';
  write_text(path, ss.str());
}

void emit_profile_csv(const WaveProfile& p, const std::string& path) {
  std::ostringstream ss;
  ss << "xi,phi\n";
  for (std::size_t i = 0; i < p.xi_grid.size(); ++i)
    ss << format_double(p.xi_grid[i]) << ',' << format_double(p.phi[i]) << '\n';
  write_text(path, ss.str());
}

void emit_profile_json(const WaveProfile& p, const std::string& path) {
  ordered_json j;
  j["k_tail"] = p.k_tail;
  j["a_tail"] = p.a_tail;
  j["omega_fit"] = p.omega_fit;
  j["residual_norm"] = p.residual_norm;
  j["fit_window"] = {p.fit_window_lo, p.fit_window_hi};
  j["solver"] = {{"half_width", p.half_width}, {"n", p.xi_grid.size()},
                 {"tol", p.solve_tol}};
  j["xi_min"] = p.xi_min();
  j["xi_max"] = p.xi_max();
  write_text(path, j.dump(2) + "\n");
}

void emit_field_csv(const Field& f, const std::string& path) {
  std::ostringstream ss;
  ss << "x,u\n";
  for (int i = 0; i < f.grid.n; ++i)
    ss << format_double(f.grid.x(i)) << ',' << format_double(f.u[i]) << '\n';
  write_text(path, ss.str());
}

void emit_field_json(const Field& f, const std::string& path) {
  ordered_json j;
  j["format_version"] = kCheckpointVersion;
  j["t"] = f.t;
  j["frame"] = frame_name(f.frame);
  j["diffusion"] = f.diffusion;
  j["reaction"] = f.reaction.tag;
  j["scheme"] = "strang: mode-fitted CN diffusion-drift + exact/Heun reaction, "
                "step-doubling EPUS control";
  j["step_tolerance"] = f.last_step_tol;
  j["grid"] = {{"x_min", f.grid.x_min}, {"x_max", f.grid.x_max}, {"n", f.grid.n}};
  write_text(path, j.dump(2) + "\n");
}

void emit_state_csv(const SelfSimilarState& s, const std::string& path) {
  std::ostringstream ss;
  ss << "tau,eta,w\n";
  for (std::size_t i = 0; i < s.eta_grid.size(); ++i)
    ss << format_double(s.tau) << ',' << format_double(s.eta_grid[i]) << ','
       << format_double(s.w[i]) << '\n';
  write_text(path, ss.str());
}

void emit_state_json(const SelfSimilarState& s, const std::string& path) {
  const auto rd = decompose_remainder(s.eta_grid, s.w);
  ordered_json j;
  j["tau"] = s.tau;
  j["alpha_moment"] = s.alpha_moment;
  j["alpha_fit"] = s.alpha_fit;
  j["weighted_remainder_sup"] = rd.weighted_remainder_sup;
  write_text(path, j.dump(2) + "\n");
}

void emit_report_json(const PipelineReport& r, const std::string& path) {
  ordered_json j;
  j["x_inf_front"] = r.x_inf_front;
  j["x_inf_alpha"] = r.x_inf_alpha;
  j["difference"] = r.difference;
  if (std::isfinite(r.c1_fit)) j["c1_fit"] = r.c1_fit; else j["c1_fit"] = nullptr;
  j["alpha_moment"] = r.alpha_moment;
  j["alpha_fit"] = r.alpha_fit;
  j["pre_asymptotic"] = r.pre_asymptotic;
  j["config_hash"] = r.config_hash;
  ordered_json rt;
  for (const auto& [stage, sec] : r.runtimes) rt[stage] = sec;
  j["runtimes"] = rt;
  write_text(path, j.dump(2) + "\n");
}

void emit_bbm_csv(const BBMEnsemble& e, const std::string& path) {
  std::ostringstream ss;
  ss << "t,replicate,max,count,Z\n";
  for (std::size_t c = 0; c < e.checkpoints.size(); ++c)
    for (int r = 0; r < e.replicates; ++r)
      ss << format_double(e.checkpoints[c]) << ',' << r << ','
         << format_double(e.max_at[c][r]) << ',' << e.count_at[c][r] << ','
         << format_double(e.z_at[c][r]) << '\n';
  write_text(path, ss.str());
}

[[noreturn]] void unsupported(const char* artifact, EmitFormat format) {
  throw IoError(std::string("emit_outputs: unsupported pair artifact=") + artifact +
                " format=" + (format == EmitFormat::csv ? "csv" : "json"));
}

}  // namespace

void emit_outputs(const Artifact& artifact, EmitFormat format, const std::string& path) {
  std::visit(
      [&](auto* ptr) {
        using T = std::remove_const_t<std::remove_pointer_t<decltype(ptr)>>;
        if constexpr (std::is_same_v<T, FrontTrace>) {
          if (format == EmitFormat::csv) emit_trace_csv(*ptr, path);
          else unsupported("FrontTrace", format);
        } else if constexpr (std::is_same_v<T, WaveProfile>) {
          if (format == EmitFormat::csv) emit_profile_csv(*ptr, path);
          else emit_profile_json(*ptr, path);
        } else if constexpr (std::is_same_v<T, Field>) {
          if (format == EmitFormat::csv) emit_field_csv(*ptr, path);
          else emit_field_json(*ptr, path);
        } else if constexpr (std::is_same_v<T, SelfSimilarState>) {
          if (format == EmitFormat::csv) emit_state_csv(*ptr, path);
          else emit_state_json(*ptr, path);
        } else if constexpr (std::is_same_v<T, PipelineReport>) {
          if (format == EmitFormat::json) emit_report_json(*ptr, path);
          else unsupported("PipelineReport", format);
        } else {
          if (format == EmitFormat::csv) emit_bbm_csv(*ptr, path);
          else unsupported("BBMEnsemble", format);
        }
      },
      artifact);
}

namespace {

void write_checkpoint(const ordered_json& payload, const std::string& path) {
  const std::string body = payload.dump();
  char head[64];
  std::snprintf(head, sizeof(head), "%s %016" PRIx64 "\n", kCheckpointVersion,
                fnv1a64(body));
  write_text(path, std::string(head) + body + "\n");
}

ordered_json read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  std::string head;
  std::getline(in, head);
  const auto sp = head.rfind(' ');
  if (sp == std::string::npos)
    throw IoError("checkpoint: malformed header in " + path);
  const std::string version = head.substr(0, sp);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: version mismatch (" + version + ") in " + path);
  std::string body;
  std::getline(in, body);
  char expect[32];
  std::snprintf(expect, sizeof(expect), "%016" PRIx64, fnv1a64(body));
  if (head.substr(sp + 1) != expect)
    throw IoError("checkpoint: checksum mismatch in " + path);
  try {
    return ordered_json::parse(body);
  } catch (const std::exception& e) {
    throw IoError(std::string("checkpoint: parse failure: ") + e.what());
  }
}

}  // namespace

void checkpoint_save(const Field& field, const std::string& path) {
  ordered_json j;
  j["kind"] = "field";
  j["t"] = field.t;
  j["frame"] = frame_name(field.frame);
  j["diffusion"] = field.diffusion;
  j["reaction"] = field.reaction.tag;
  j["grid"] = {{"x_min", field.grid.x_min}, {"x_max", field.grid.x_max}, {"n", field.grid.n}};
  j["u"] = field.u;
  write_checkpoint(j, path);
}

void checkpoint_save(const SelfSimilarState& state, const std::string& path) {
  ordered_json j;
  j["kind"] = "state";
  j["tau"] = state.tau;
  j["eta"] = state.eta_grid;
  j["w"] = state.w;
  write_checkpoint(j, path);
}

Field checkpoint_load_field(const std::string& path) {
  const auto j = read_checkpoint(path);
  if (j.value("kind", "") != "field")
    throw IoError("checkpoint: expected a field checkpoint in " + path);
  Field f;
  f.t = j.at("t").get<double>();
  f.frame = j.at("frame").get<std::string>() == "moving" ? Frame::moving : Frame::lab;
  f.diffusion = j.at("diffusion").get<double>();
  const std::string tag = j.at("reaction").get<std::string>();
  if (tag != "quadratic")
    throw IoError("checkpoint: only the quadratic reaction round-trips by tag");
  f.reaction = ReactionFn::quadratic();
  f.grid.x_min = j.at("grid").at("x_min").get<double>();
  f.grid.x_max = j.at("grid").at("x_max").get<double>();
  f.grid.n = j.at("grid").at("n").get<int>();
  f.u = j.at("u").get<std::vector<double>>();
  if (static_cast<int>(f.u.size()) != f.grid.n)
    throw IoError("checkpoint: field length disagrees with grid");
  return f;
}

SelfSimilarState checkpoint_load_state(const std::string& path) {
  const auto j = read_checkpoint(path);
  if (j.value("kind", "") != "state")
    throw IoError("checkpoint: expected a state checkpoint in " + path);
  SelfSimilarState s;
  s.tau = j.at("tau").get<double>();
  s.eta_grid = j.at("eta").get<std::vector<double>>();
  s.w = j.at("w").get<std::vector<double>>();
  s.alpha_moment = moment_functional(s.eta_grid, s.w) / 3.5449077018110318;
  s.alpha_fit = alpha_estimate(s, AlphaMode::fit);
  return s;
}

}  // namespace kpplab
