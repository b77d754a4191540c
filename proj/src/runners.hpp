#pragma once

#include "config.hpp"

namespace vpl::cli {

/// Attach all subcommands and options to a CLI11 app declared in the
/// translation unit of the caller via build_cli (defined in runners.cpp to
/// keep CLI11 out of this header).
int run(const RunConfig& cfg);

int run_greens_check(const RunConfig& cfg);
int run_solve(const RunConfig& cfg);
int run_sweep(const RunConfig& cfg);
int run_evolve(const RunConfig& cfg);
int run_stability(const RunConfig& cfg);

/// Parse argv into a RunConfig (CLI flags > config file > defaults).
/// Throws CLI::ParseError via the standard CLI11 machinery; the caller
/// handles --help and usage errors.
int parse_and_run(int argc, const char* const* argv);

}  // namespace vpl::cli
