#pragma once

#include "mdq/lattice.hpp"
#include "mdq/problem.hpp"
#include "mdq/stencil.hpp"

#include <cstddef>

namespace mdq {

/// Kushner stencil for tr(a D^2 phi) + b . D phi at a grid node, a = sigma sigma^T / 2.
///
///   node +- e_i         : (a_ii - sum_{j!=i} |a_ij|) / dx^2 + b_i^+- / dx
///   node +- (e_i + e_j) : a_ij^+ / dx^2
///   node +- (e_i - e_j) : a_ij^- / dx^2
///
/// Throws MonotonicityError when a is not diagonally dominant at the node.
Stencil build_L(const ControlProblem& p, std::size_t alpha, double t, const Grid& grid, std::size_t node);

/// Same stencil from explicit coefficients.
Stencil build_L(const Matrix& a, const Point& b, const Grid& grid, std::size_t node);

}  // namespace mdq
