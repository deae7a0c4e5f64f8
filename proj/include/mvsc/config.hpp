#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mvsc/error.hpp"
#include "mvsc/util.hpp"

namespace mvsc {

// Flat key=value configuration. Command-line flags overwrite file values;
// the canonical serialization (sorted keys) feeds the config hash embedded
// in every emitted artifact.
class PipelineConfig {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw error(errc::invalid_argument, "bad number for " + key);
    }
  }

  int64_t get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stoll(it->second);
    } catch (const std::exception&) {
      throw error(errc::invalid_argument, "bad integer for " + key);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return it->second == "1" || it->second == "true" || it->second == "yes";
  }

  uint64_t seed() const {
    return static_cast<uint64_t>(get_int("seed", 42));
  }

  // All stage randomness flows from the single config seed, split by
  // hashing the stage name into it.
  uint64_t stage_seed(const std::string& stage) const {
    return seed() ^ fnv1a64(stage);
  }

  // out_dir is excluded: where artifacts land must not change their content
  // or the reproducibility hash stamped into them.
  std::string canonical() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_)
      if (key != "out_dir") out << key << "=" << value << "\n";
    return out.str();
  }

  std::string hash() const {
    std::ostringstream out;
    out << std::hex << fnv1a64(canonical());
    return out.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  static PipelineConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::unreadable_file, path);
    PipelineConfig config;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw error(errc::invalid_argument,
                    path + ":" + std::to_string(lineno) + ": expected key=value");
      config.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return config;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mvsc
