#include "mdq/stencil.hpp"

#include "mdq/error.hpp"

#include <algorithm>
#include <string>

namespace mdq {

double Stencil::min_weight() const {
    double m = kInf;
    for (const auto& nw : nodes) m = std::min(m, nw.weight);
    for (const auto& f : far) m = std::min(m, f.weight);
    return m;
}

double Stencil::far_sum(const FarfieldFn& far_fn, double t) const {
    double s = 0.0;
    for (const auto& f : far) s += f.weight * far_fn(t, f.x);
    return s;
}

double Stencil::apply(std::span<const double> u, double far_value) const {
    double s = far_value - diag_mass * u[center];
    for (const auto& nw : nodes) s += nw.weight * u[nw.node];
    return s;
}

double Stencil::apply(std::span<const double> u, const FarfieldFn& far_fn, double t) const {
    return apply(u, far.empty() ? 0.0 : far_sum(far_fn, t));
}

StencilBuilder::StencilBuilder(const Grid& grid, std::size_t center) : grid_(&grid), center_(center) {}

void StencilBuilder::add_node(std::size_t node, double weight) {
    if (weight < 0.0) {
        throw MonotonicityError("negative stencil weight " + std::to_string(weight) + " at node " +
                                std::to_string(node));
    }
    if (node == center_ || weight == 0.0) return;
    raw_.push_back({node, weight});
}

void StencilBuilder::add_point(const Point& x, double weight) {
    if (weight < 0.0) throw MonotonicityError("negative stencil weight " + std::to_string(weight));
    if (weight == 0.0) return;
    Location loc = grid_->locate(x);
    if (loc.outside) {
        far_.push_back({x, weight});
        return;
    }
    for (const auto& nw : loc.weights) add_node(nw.node, weight * nw.weight);
}

void StencilBuilder::add(const Stencil& other, double scale) {
    for (const auto& nw : other.nodes) add_node(nw.node, scale * nw.weight);
    for (const auto& f : other.far) far_.push_back({f.x, scale * f.weight});
}

Stencil StencilBuilder::finish() {
    std::sort(raw_.begin(), raw_.end(), [](const NodeWeight& a, const NodeWeight& b) { return a.node < b.node; });
    Stencil s;
    s.center = center_;
    for (const auto& nw : raw_) {
        if (!s.nodes.empty() && s.nodes.back().node == nw.node) {
            s.nodes.back().weight += nw.weight;
        } else {
            s.nodes.push_back(nw);
        }
    }
    s.far = std::move(far_);
    for (const auto& nw : s.nodes) s.diag_mass += nw.weight;
    for (const auto& f : s.far) s.diag_mass += f.weight;
    raw_.clear();
    far_.clear();
    return s;
}

Stencil combine(const Grid& grid, const Stencil& a, const Stencil& b) {
    if (a.center != b.center) throw ConfigError("cannot combine stencils with different centers");
    StencilBuilder sb(grid, a.center);
    sb.add(a);
    sb.add(b);
    return sb.finish();
}

}  // namespace mdq
