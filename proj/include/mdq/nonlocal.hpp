#pragma once

#include "mdq/kernels.hpp"
#include "mdq/lattice.hpp"
#include "mdq/problem.hpp"
#include "mdq/stencil.hpp"

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace mdq {

/// Which discretization pipeline a kernel goes through.
enum class Regime { finite, single_tail, double_tail };

Regime regime_of(const LevyKernel& kern);
const char* to_string(Regime r);

/// Positive quadrature rule in z for finite measures: cell masses placed at
/// cell midpoints (radial cells times sphere nodes when M >= 2).
struct ZRule {
    std::vector<Point> nodes;
    std::vector<double> weights;
    double tail_bound = 0.0;
};

ZRule finite_rule(const LevyKernel& kern, double step, double trunc_tol, const SphereRule* sphere = nullptr);

/// sum_b w_b [ (i_h phi)(x + eta(z_b)) - phi(x) ].
Stencil build_J_finite(const ControlProblem& p, std::size_t alpha, double t, const Grid& grid,
                       std::size_t node, const ZRule& rule);

/// (1/dx) sum_{n>=1} (k_{n-1} - k_n) [ (i_h phi)(x + eta(+-z_n)) - phi(x) ].
Stencil build_J_single_tail_1d(const TailKernel1D& tails, const ControlProblem& p, std::size_t alpha,
                               double t, const Grid& grid, std::size_t node);
Stencil build_J_single_tail_polar(const PolarTailKernel& tails, const ControlProblem& p, std::size_t alpha,
                                  double t, const Grid& grid, std::size_t node);

/// Double-tail stencil plus the drift it needs to stay consistent.
///
/// Each ray contributes sum_n W_n Delta_zz psi(z_n) with nodal weights W_n and
/// lattice z_n = n dz. Regrouped, the coefficient of psi(+-dz) pairs the ray's
/// own first second difference with the opposite ray's W_0. When a strongly
/// one-sided kernel leaves it negative, the deficit is moved to the opposite
/// target and compensated by `drift`, an x-drift upwinded by the caller.
struct DoubleTailStencil {
    Stencil stencil;
    Point drift;
};

DoubleTailStencil build_J_double_tail_1d(const DoubleTailKernel1D& tails, const ControlProblem& p,
                                         std::size_t alpha, double t, const Grid& grid, std::size_t node);
DoubleTailStencil build_J_double_tail_polar(const PolarTailKernel& tails, const ControlProblem& p,
                                            std::size_t alpha, double t, const Grid& grid, std::size_t node);

/// Upwind stencil for b . D phi: b_i^+/dx on node + e_i, b_i^-/dx on node - e_i.
Stencil drift_stencil(const Grid& grid, std::size_t node, const Point& bvec);

/// int_{|z|>1} eta k dz. Needed with double tails, whose compensator runs over all z.
Point far_jump_mean(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha, double t,
                    const Point& x, const SphereRule* sphere = nullptr);

/// Multiple of dx nearest dx^(1/2).
double default_dz(double dx);

struct NonlocalConfig {
    double trunc_tol = 1e-10;
    /// z-step of the double-tail second differences; 0 selects default_dz(dx).
    double dz = 0.0;
    /// Nodes of the circle rule when M = 2 and no rule is given.
    std::size_t sphere_nodes = 64;
    std::optional<SphereRule> sphere;
};

/// J_h for one kernel on one grid: tables are built once, stencils on demand.
class NonlocalOperator {
public:
    NonlocalOperator(LevyKernel kern, const Grid& grid, NonlocalConfig cfg = {});

    Regime regime() const { return regime_; }
    const LevyKernel& kernel() const { return kern_; }
    double dz() const { return dz_; }
    const SphereRule* sphere() const { return sphere_ ? &*sphere_ : nullptr; }

    const ZRule* finite() const { return std::get_if<ZRule>(&tables_); }
    const TailKernel1D* tails_1d() const { return std::get_if<TailKernel1D>(&tables_); }
    const PolarTailKernel* polar() const { return std::get_if<PolarTailKernel>(&tables_); }

    /// Full J_h stencil at a node: quadrature part plus upwinded drift terms.
    Stencil build(const ControlProblem& p, std::size_t alpha, double t, std::size_t node) const;

private:
    LevyKernel kern_;
    const Grid* grid_;
    NonlocalConfig cfg_;
    Regime regime_;
    double dz_;
    std::optional<SphereRule> sphere_;
    std::variant<std::monostate, ZRule, TailKernel1D, PolarTailKernel> tables_;
};

}  // namespace mdq
