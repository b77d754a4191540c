#pragma once

#include <string>

#include "vpl/diagnostics.hpp"

namespace vpl::cli {

/// Contour plot of the free boundary {Phi = mu} over the unit disk,
/// with the vorticity support shaded.  Deterministic text output, path
/// coordinates rounded to 6 decimals.
void write_patch_svg(const std::string& path, const vpl::PatchState<double>& state,
                     const std::string& config_line);

/// Radial comparison of the rescaled stream profile against the Rankine
/// profile: V(rho) along the positive and negative x-rays through the core
/// center, and the closed-form reference curve.
void write_profile_svg(const std::string& path, const vpl::PatchState<double>& state,
                       const std::string& config_line);

}  // namespace vpl::cli
