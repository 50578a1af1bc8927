#pragma once

#include "mdq/kernels.hpp"
#include "mdq/lattice.hpp"
#include "mdq/stencil.hpp"
#include "mdq/stepper.hpp"
#include "mdq/switching.hpp"

#include <span>
#include <string>

namespace mdq {

/// One row per node: x0,...,x{N-1},value.
std::string grid_csv(const Grid& grid, std::span<const double> values);

/// Switching snapshot: coordinates then one column per component.
std::string components_csv(const Grid& grid, const SwitchingResult& r);

/// Columns n,z_n,weight (and nodal for double tails).
std::string table_csv(const WeightTable& table);

/// Rows target,x0..,weight for node targets, then far targets marked "far",
/// and a final diag_mass row.
std::string stencil_csv(const Grid& grid, const Stencil& s);

/// Per-step diagnostics of a solve.
std::string diagnostics_csv(const SolveResult& r);

/// Writes text to a file; throws ConfigError when the file cannot be opened.
void write_file(const std::string& path, const std::string& text);

}  // namespace mdq
