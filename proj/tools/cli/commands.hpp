#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace vmilan::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,  // bad command line or config
  kExitIo = 3,
  kExitSolver = 4,  // linesearch, inner solver, linear solve or domain failure
  kExitAudit = 5,   // audit requested and at least one inequality violated
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  bool audit = false;
  std::optional<int> max_iters;
  std::optional<std::filesystem::path> trace;
};

/// Runs the configured experiment. The summary JSON goes to `out` (and to
/// output.summary when set); diagnostics go to `err`.
int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides,
              std::ostream& out, std::ostream& err);

/// Writes a degraded observation of the configured truth image.
int cmd_degrade(const std::filesystem::path& config_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err);

struct CheckOptions {
  std::uint64_t seed = 17;
  /// Scales every gradient the gradient check sees by (1 + 1e-3).
  bool inject_gradient_bug = false;
};

/// scope: adjoints | gradients | prox | invariants | all. Prints a JSON report.
int cmd_check(const std::string& scope, const CheckOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace vmilan::cli
