#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncb/json_io.hpp"

namespace ncb::cli {

inline const std::vector<std::string> kCommands = {
    "boundary-reps", "norm-cert",   "purity",        "wrange",
    "morenz",        "peak-verify", "amplify-check", "recovery-check"};

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  Tolerance tol;
  std::uint64_t seed = 1;
  Index max_dilation = -1;  // < 0 selects n + l^2
  int workers = 1;
  Index level = 2;          // amplify-check only
  std::string out;          // empty: JSON on stdout, summary on stderr
};

struct Report {
  Json certificate;
  std::string summary;
  int exit_code = 0;  // 0 ok, 2 inconclusive
};

/// Runs one command. Throws Error for malformed input; an exhausted solver
/// budget gives status "inconclusive" and exit code 2.
Report run(const RunConfig& config);

/// run() plus output files and exit-code mapping (0 ok, 1 error, 2 inconclusive).
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// --seed if given, else NCB_SEED (when set), else 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env);

/// Text summary path derived from the JSON output path.
std::string summary_path(const std::string& json_path);

}  // namespace ncb::cli
