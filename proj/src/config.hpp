#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vpl::cli {

/// Resolved run configuration.  Every field has a documented default;
/// command-line flags override config-file keys override these defaults.
struct RunConfig {
  std::string command;

  double omega = 0.3183098861837907;  // 1/pi
  double lambda = 1e3;
  long n_r = 256;
  long n_theta = 512;
  double tol = 1e-10;
  long max_iter = 500;

  std::vector<double> sweep_lambdas = {1e2, 1e3, 1e4, 1e5};
  bool sweep_auto_grid = true;

  double periods = 1.0;
  double cfl = 0.5;
  long snapshots = 0;

  std::string perturbation = "amplitude-noise";  // or patch-shift, smooth-bump
  double magnitude = 0.05;
  double p = 2.0;
  long n_angles = 256;
  std::uint64_t seed = 1;

  std::string out_dir = "out";
  bool emit_svg = false;

  /// One-line canonical rendering, written as the first comment line of
  /// every output file (and used by the byte-identity tests).
  std::string resolved_line() const;
};

/// Exit codes used by the CLI (documented in the README).
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kNoConvergence = 3,
  kIoError = 4,
  kNumericalError = 5,
};

}  // namespace vpl::cli
