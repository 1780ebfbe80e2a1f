// io.hpp - CSV/JSON emission and checkpointing. All floats are written with
// round-trip precision; checkpoints carry a format version and an FNV-1a
// checksum over the payload.
#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "kpplab/common.hpp"

namespace kpplab {

struct FrontTrace;
struct WaveProfile;
struct Field;
struct SelfSimilarState;
struct PipelineReport;
struct BBMEnsemble;

enum class EmitFormat { csv, json };

using Artifact = std::variant<const FrontTrace*, const WaveProfile*, const Field*,
                              const SelfSimilarState*, const PipelineReport*,
                              const BBMEnsemble*>;

// Writes the artifact to path. Supported pairs:
//   FrontTrace+csv (t,sigma,level,frame), WaveProfile+csv (xi,phi),
//   WaveProfile+json (tail metadata), Field+csv (x,u), Field+json (metadata),
//   SelfSimilarState+csv (tau,eta,w), SelfSimilarState+json (summary),
//   PipelineReport+json, BBMEnsemble+csv (t,replicate,max,count,Z).
// Throws IoError naming the artifact and format for unsupported pairs.
void emit_outputs(const Artifact& artifact, EmitFormat format, const std::string& path);

// Versioned, checksummed snapshots with bit-exact round trip.
void checkpoint_save(const Field& field, const std::string& path);
void checkpoint_save(const SelfSimilarState& state, const std::string& path);
Field checkpoint_load_field(const std::string& path);
SelfSimilarState checkpoint_load_state(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string format_double(double v);  // shortest exact decimal (max 17 digits)

inline const char* kCheckpointVersion = "kpplab-checkpoint-1";

}  // namespace kpplab
