#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "logicloss/trainer.hpp"

namespace logicloss {

// Minimal INI reader: [section] headers, key = value lines, # and ;
// comments. Every key must be consumed; leftovers are reported as errors so
// typos never silently fall back to defaults.
class Ini {
 public:
  static Ini parse(const std::string& text, const std::string& origin = "<string>");
  static Ini parse_file(const std::filesystem::path& path);

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback);
  long long get_int(const std::string& section, const std::string& key, long long fallback);
  double get_double(const std::string& section, const std::string& key, double fallback);
  bool get_bool(const std::string& section, const std::string& key, bool fallback);

  bool has(const std::string& section, const std::string& key) const;
  // Throws if any key was never consumed by a getter.
  void check_all_consumed() const;
  // Every (section, key, value) in deterministic order, for manifests.
  std::map<std::string, std::map<std::string, std::string>> entries() const { return values_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::set<std::pair<std::string, std::string>> consumed_;
  std::string origin_;
};

// A full training run: optimizer/constraint settings plus data locations.
struct RunConfig {
  TrainConfig train;
  std::string data_dir = "data";
  std::string rules_path = "rules/nli.rules";
};

// Loads a RunConfig from an INI file with sections [model] [data] [train]
// [constraints]; missing keys keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_ini(Ini& ini);

// constraints string: "none" or a comma-separated subset of {M,U,T}.
void apply_constraints(TrainConfig& config, const std::string& spec);
std::string constraints_string(const TrainConfig& config);

}  // namespace logicloss
