#pragma once

#include "mdq/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mdq {

/// How values outside the computational box are supplied.
enum class FarfieldKind {
    initial,   ///< evaluate the initial datum g at the query point
    constant,  ///< nearest boundary node (coordinates clamped into the box)
    periodic,  ///< wrap coordinates; the box spans exactly one period
    function,  ///< user function of (t, x)
};

using FarfieldFn = std::function<double(double, const Point&)>;

struct NodeWeight {
    std::size_t node;
    double weight;
};

/// Result of locating a point on the grid: either interpolation weights on
/// grid nodes, or a marker that the farfield function must be used.
struct Location {
    std::vector<NodeWeight> weights;
    bool outside = false;
};

/// Uniform Cartesian box with spacing dx. Bounds are integer multiples of dx.
class Grid {
public:
    Grid(double dx, std::vector<double> lo, std::vector<double> hi,
         FarfieldKind farfield = FarfieldKind::initial);

    /// Periodic box [lo, lo + period) with `nodes` points per axis.
    static Grid periodic(std::size_t dim, double lo, double period, std::size_t nodes);

    std::size_t dim() const { return shape_.size(); }
    double dx() const { return dx_; }
    std::size_t size() const { return size_; }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    double lo(std::size_t axis) const { return lo_[axis]; }
    double hi(std::size_t axis) const { return lo_[axis] + (shape_[axis] - 1) * dx_; }
    FarfieldKind farfield() const { return farfield_; }

    Point node(std::size_t flat) const;
    double coord(std::size_t axis, long i) const { return lo_[axis] + static_cast<double>(i) * dx_; }
    std::vector<long> multi_index(std::size_t flat) const;
    std::size_t flat_index(std::span<const long> idx) const;

    /// Multilinear interpolation weights (non-negative, partition of unity).
    /// Zero weights are dropped, so a grid node yields a single unit weight.
    Location locate(const Point& x) const;

    std::vector<NodeWeight> interpolation_weights(const Point& x) const { return locate(x).weights; }

private:
    double dx_;
    std::vector<double> lo_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 1;
    FarfieldKind farfield_;
};

/// Node values plus the rule producing values anywhere in R^N.
class GridFunction {
public:
    GridFunction(const Grid& grid, std::vector<double> values, FarfieldFn far = {});

    const Grid& grid() const { return *grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Total evaluation: interpolation inside the box, farfield outside.
    double operator()(const Point& x, double t = 0.0) const;

private:
    const Grid* grid_;
    std::vector<double> values_;
    FarfieldFn far_;
};

/// Samples a function at every grid node.
std::vector<double> sample(const Grid& grid, const std::function<double(const Point&)>& f);

// Monotone difference operators along a parametrised line r -> phi(r).
double diff_forward(const std::function<double(double)>& phi, double r, double h);
double diff_backward(const std::function<double(double)>& phi, double r, double h);
double diff_second(const std::function<double(double)>& phi, double r, double k);

}  // namespace mdq
