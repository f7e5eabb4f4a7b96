#pragma once

#include "expconc/potential.hpp"
#include "expconc/samplers.hpp"
#include "expconc/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace expconc {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { exit_ok = 0, exit_verdict_failed = 1, exit_config_error = 2, exit_runtime_error = 3 };

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentOutput {
  Json payload = Json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> annotations;
  /// (file name, content) pairs: CSV payloads and, with plotting on, SVGs.
  std::vector<std::pair<std::string, std::string>> files;

  bool passed() const;
};

/// Potential from its configuration object; `where` prefixes error messages.
///   {"builtin": name, "dimension", "scale", "data", "eta_radius", "q", "b", "lo", "hi"}
///   {"sum": [{"potential": spec, "eta": x}, ...]}
///   {"smooth": spec, "nonsmooth": spec}
///   {"lift": spec, "dimension": d, "coordinate": j}
/// Any of them may add "multiply": c and "eta": declared value.
Potential parse_potential(const Json& spec, const std::string& where = "potential");

/// Bound from {"kind": ..., "d", "c1", "c2", "eta", "n", "terms"}.
BoundSpec parse_bound(const Json& spec, const std::string& where = "bounds");

/// Runs the experiment described by `config` with the given seed. Throws
/// ConfigError for malformed configurations.
ExperimentOutput execute(const Json& config, std::uint64_t seed, bool plot);

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  bool plot = false;
};

/// Reads the configuration, runs it and writes report.json plus artifacts.
/// Returns 0 when every verdict passes, 1 on a failed verdict, 2 on a
/// configuration error and 3 on a runtime error.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// One line per builtin potential with its parameters and known eta.
std::string list_builtins();

}  // namespace expconc
