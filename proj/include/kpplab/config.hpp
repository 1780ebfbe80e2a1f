// config.hpp - sectioned key-value experiment configuration:
//
//   version = 1
//   [evolve]
//   t_end = 2000
//   # comment
//
// Unknown keys are rejected against a per-subcommand whitelist. The config
// hash covers every semantically meaningful field (everything except
// out_dir and verbosity keys), canonically ordered.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "kpplab/common.hpp"

namespace kpplab {

struct ExperimentConfig {
  std::string version = "1";
  // section -> key -> raw value ("" section = top level)
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  // Throws ConfigError when a section holds keys outside `known`.
  void validate_keys(const std::string& section, const std::set<std::string>& known) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// FNV-1a over the canonical form; out_dir / verbosity keys are excluded.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

}  // namespace kpplab
