#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "logicloss/data.hpp"

namespace logicloss {

// Command implementations behind the CLI; they throw on failure and are
// reused directly by the test suites. Every command writes a manifest.json
// capturing the resolved options, seeds, and content hashes of its inputs,
// and contains no timestamps, so reruns are byte-identical.

struct GenOptions {
  std::string out_dir;
  GenConfig gen;
};
void cmd_gen(const GenOptions& options);

struct CompileOptions {
  std::string rules_path;
  std::string tnorm = "product";
  bool dump = false;
};
void cmd_compile(const CompileOptions& options, std::ostream& out);

struct TrainOptions {
  std::string config_path;  // empty = built-in defaults
  std::string data_dir;     // overrides [data] dir when nonempty
  std::string rules_path;   // overrides [data] rules when nonempty
  std::optional<std::string> constraints;  // "none" or subset of M,U,T
  std::optional<std::string> tnorm;
  std::optional<std::uint64_t> seed;
  std::optional<bool> annotation;
  std::string out_dir;
};
void cmd_train(const TrainOptions& options);

struct EvalOptions {
  std::string checkpoint;
  std::string data_dir;
  std::string rules_path;
  std::string out_dir;  // optional; empty = console only
};
void cmd_eval(const EvalOptions& options, std::ostream& out);

// Exit codes: 0 success, 1 numerical failure, 2 usage or IO error.
int run_cli(int argc, const char* const* argv);

// FNV-1a 64-bit content hash as fixed-width hex; used in manifests.
std::string content_hash(const std::string& bytes);
std::string file_hash(const std::string& path);

}  // namespace logicloss
