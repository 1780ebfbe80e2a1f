#include "kpplab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kpplab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

std::string ExperimentConfig::get_string(const std::string& section, const std::string& key,
                                         const std::string& fallback) const {
  auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  auto jt = it->second.find(key);
  return jt == it->second.end() ? fallback : jt->second;
}

double ExperimentConfig::get_double(const std::string& section, const std::string& key,
                                    double fallback) const {
  const std::string v = get_string(section, key, "");
  if (v.empty()) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + section + "." + key + "' is not a number: " + v);
  }
}

int ExperimentConfig::get_int(const std::string& section, const std::string& key,
                              int fallback) const {
  const double d = get_double(section, key, static_cast<double>(fallback));
  return static_cast<int>(d);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& section, const std::string& key,
                                        std::uint64_t fallback) const {
  const std::string v = get_string(section, key, "");
  if (v.empty()) return fallback;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + section + "." + key + "' is not an integer: " + v);
  }
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
  sections[section][key] = value;
}

void ExperimentConfig::validate_keys(const std::string& section,
                                     const std::set<std::string>& known) const {
  auto it = sections.find(section);
  if (it == sections.end()) return;
  for (const auto& [key, value] : it->second) {
    if (!known.count(key))
      throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at line " + std::to_string(lineno));
    if (section.empty() && key == "version") {
      cfg.version = value;
      if (value != "1")
        throw ConfigError("config: unrecognized version '" + value + "'");
      continue;
    }
    cfg.sections[section][key] = value;
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  auto eat = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  eat("version");
  eat(cfg.version);
  for (const auto& [section, kv] : cfg.sections) {  // std::map: already sorted
    for (const auto& [key, value] : kv) {
      if (key == "out_dir" || key == "verbosity") continue;  // not semantic
      eat(section);
      eat(key);
      eat(value);
    }
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

}  // namespace kpplab
