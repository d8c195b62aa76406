#pragma once

#include <cstdint>

#include "basinlab/grid.h"
#include "basinlab/systems.h"

namespace basinlab {

/// Number of attractor ids a system's catalog provides up front (roots,
/// magnets, exits), or 0 for driven systems whose attractors are discovered.
int catalog_size(const SystemSpec& spec);

/// Integrates one trajectory per pixel (cell-centre initial conditions) and
/// labels each by its asymptotic fate.
///
/// Pixel rows run from y_min (row 0) to y_max. Driven systems share one
/// AttractorRegistry fed in row-major order, so labels are numbered by first
/// discovery regardless of `threads`. Per-pixel failures become kUnresolved;
/// only RootFindingFailed (no roots to label against) aborts the grid.
/// Generation has no random component; `seed` is accepted for interface
/// symmetry with the estimators and recorded by callers.
BasinGrid compute_basin(const SystemSpec& system, const Region& region, const IntegratorConfig& config,
                        std::uint64_t seed = 0, int threads = 0);

namespace reference {

/// Single-threaded, pixel-at-a-time version of compute_basin. Kept as the
/// ground truth the OpenMP kernel is tested against.
BasinGrid compute_basin(const SystemSpec& system, const Region& region, const IntegratorConfig& config,
                        std::uint64_t seed = 0);

}  // namespace reference

}  // namespace basinlab
