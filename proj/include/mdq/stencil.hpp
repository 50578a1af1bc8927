#pragma once

#include "mdq/lattice.hpp"
#include "mdq/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mdq {

/// Off-grid target whose value comes from the farfield rule.
struct FarTarget {
    Point x;
    double weight;
};

/// Difference-form stencil at one node:
///   S[phi] = sum_b w_b phi_b + sum_far w_f phi_far(x_f) - diag_mass * phi_center.
/// All weights are non-negative and `diag_mass` is their sum, so S kills constants.
struct Stencil {
    std::size_t center = 0;
    std::vector<NodeWeight> nodes;  // sorted by node, center excluded
    std::vector<FarTarget> far;
    double diag_mass = 0.0;

    bool empty() const { return nodes.empty() && far.empty(); }
    double min_weight() const;

    /// Sum of far weights times farfield values at time t.
    double far_sum(const FarfieldFn& far_fn, double t) const;
    /// Application given grid values and a precomputed `far_sum`.
    double apply(std::span<const double> u, double far_value) const;
    /// Application with farfield evaluation.
    double apply(std::span<const double> u, const FarfieldFn& far_fn, double t) const;
};

/// Accumulates weighted targets for one center node. Off-grid targets are
/// expanded through multilinear interpolation right away; interpolation mass
/// landing on the center cancels against the center term and is dropped.
class StencilBuilder {
public:
    StencilBuilder(const Grid& grid, std::size_t center);

    void add_node(std::size_t node, double weight);
    void add_point(const Point& x, double weight);
    void add(const Stencil& other, double scale = 1.0);

    Stencil finish();

private:
    const Grid* grid_;
    std::size_t center_;
    std::vector<NodeWeight> raw_;
    std::vector<FarTarget> far_;
};

/// Sum of two stencils with the same center.
Stencil combine(const Grid& grid, const Stencil& a, const Stencil& b);

}  // namespace mdq
