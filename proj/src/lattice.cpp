#include "mdq/lattice.hpp"

#include "mdq/error.hpp"

#include <algorithm>
#include <cmath>

namespace mdq {

namespace {

constexpr double kSnap = 1e-10;

long checked_multiple(double v, double dx, const char* what) {
    const double q = v / dx;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-8 * std::max(1.0, std::abs(q))) {
        throw ConfigError(std::string("grid bound ") + what + " is not an integer multiple of dx");
    }
    return static_cast<long>(r);
}

}  // namespace

Grid::Grid(double dx, std::vector<double> lo, std::vector<double> hi, FarfieldKind farfield)
    : dx_(dx), farfield_(farfield) {
    if (!(dx > 0.0) || !(dx < 1.0)) throw ConfigError("grid spacing must satisfy 0 < dx < 1");
    if (lo.empty() || lo.size() != hi.size()) throw ConfigError("grid bounds must have matching dimension");
    for (std::size_t a = 0; a < lo.size(); ++a) {
        const long il = checked_multiple(lo[a], dx, "lo");
        const long ih = checked_multiple(hi[a], dx, "hi");
        if (ih - il + 1 < 3) throw ConfigError("grid needs at least 3 nodes per axis");
        lo_.push_back(static_cast<double>(il) * dx);
        shape_.push_back(static_cast<std::size_t>(ih - il + 1));
    }
    stride_.resize(shape_.size());
    for (std::size_t a = shape_.size(); a-- > 0;) {
        stride_[a] = size_;
        size_ *= shape_[a];
    }
}

Grid Grid::periodic(std::size_t dim, double lo, double period, std::size_t nodes) {
    const double dx = period / static_cast<double>(nodes);
    // lo is snapped to the lattice; callers normally pass 0.
    const double l = std::round(lo / dx) * dx;
    return Grid(dx, std::vector<double>(dim, l),
                std::vector<double>(dim, l + static_cast<double>(nodes - 1) * dx),
                FarfieldKind::periodic);
}

Point Grid::node(std::size_t flat) const {
    Point x(static_cast<Eigen::Index>(dim()));
    for (std::size_t a = 0; a < dim(); ++a) {
        const std::size_t i = (flat / stride_[a]) % shape_[a];
        x[static_cast<Eigen::Index>(a)] = coord(a, static_cast<long>(i));
    }
    return x;
}

std::vector<long> Grid::multi_index(std::size_t flat) const {
    std::vector<long> idx(dim());
    for (std::size_t a = 0; a < dim(); ++a) idx[a] = static_cast<long>((flat / stride_[a]) % shape_[a]);
    return idx;
}

std::size_t Grid::flat_index(std::span<const long> idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < dim(); ++a) flat += static_cast<std::size_t>(idx[a]) * stride_[a];
    return flat;
}

Location Grid::locate(const Point& x) const {
    Location loc;
    const std::size_t n = dim();
    std::vector<long> base(n);
    std::vector<double> frac(n);
    for (std::size_t a = 0; a < n; ++a) {
        double s = (x[static_cast<Eigen::Index>(a)] - lo_[a]) / dx_;
        const double last = static_cast<double>(shape_[a] - 1);
        if (farfield_ == FarfieldKind::periodic) {
            const double period = static_cast<double>(shape_[a]);
            s = std::fmod(s, period);
            if (s < 0.0) s += period;
        } else if (farfield_ == FarfieldKind::constant) {
            s = std::clamp(s, 0.0, last);
        }
        const double r = std::round(s);
        if (std::abs(s - r) < kSnap) s = r;
        if (farfield_ != FarfieldKind::periodic && (s < 0.0 || s > last)) {
            loc.outside = true;
            return loc;
        }
        double fl = std::floor(s);
        if (farfield_ == FarfieldKind::periodic && fl >= static_cast<double>(shape_[a])) fl = 0.0, s = 0.0;
        base[a] = static_cast<long>(fl);
        frac[a] = s - fl;
    }
    // Enumerate the 2^n corners, skipping those with zero weight.
    std::vector<long> idx(n);
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        double w = 1.0;
        for (std::size_t a = 0; a < n && w != 0.0; ++a) {
            const bool up = (corner >> a) & 1U;
            w *= up ? frac[a] : 1.0 - frac[a];
            long i = base[a] + (up ? 1 : 0);
            if (farfield_ == FarfieldKind::periodic) i %= static_cast<long>(shape_[a]);
            idx[a] = i;
        }
        if (w == 0.0) continue;
        loc.weights.push_back({flat_index(idx), w});
    }
    return loc;
}

GridFunction::GridFunction(const Grid& grid, std::vector<double> values, FarfieldFn far)
    : grid_(&grid), values_(std::move(values)), far_(std::move(far)) {
    if (values_.size() != grid.size()) throw ConfigError("grid function size mismatch");
}

double GridFunction::operator()(const Point& x, double t) const {
    const Location loc = grid_->locate(x);
    if (loc.outside) {
        if (!far_) throw ConfigError("grid function has no farfield rule for an outside point");
        return far_(t, x);
    }
    double v = 0.0;
    for (const auto& nw : loc.weights) v += nw.weight * values_[nw.node];
    return v;
}

std::vector<double> sample(const Grid& grid, const std::function<double(const Point&)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
    return v;
}

double diff_forward(const std::function<double(double)>& phi, double r, double h) {
    return (phi(r + h) - phi(r)) / h;
}

double diff_backward(const std::function<double(double)>& phi, double r, double h) {
    return -(phi(r - h) - phi(r)) / h;
}

double diff_second(const std::function<double(double)>& phi, double r, double k) {
    return (phi(r + k) - 2.0 * phi(r) + phi(r - k)) / (k * k);
}

}  // namespace mdq
