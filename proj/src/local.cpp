#include "mdq/local.hpp"

#include "mdq/error.hpp"

#include <cmath>
#include <sstream>

namespace mdq {

Stencil build_L(const Matrix& a, const Point& b, const Grid& grid, std::size_t node) {
    const auto n = static_cast<Eigen::Index>(grid.dim());
    if (a.rows() != n || a.cols() != n || b.size() != n) throw ConfigError("coefficient sizes do not match the grid");
    const double dx = grid.dx();
    const double dx2 = dx * dx;
    const Point x = grid.node(node);
    StencilBuilder sb(grid, node);

    for (Eigen::Index i = 0; i < n; ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) off += std::abs(a(i, j));
        }
        const double axis = a(i, i) - off;
        if (axis < -1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
            std::ostringstream os;
            os << "diffusion is not diagonally dominant at node " << node << " (row " << i << "), a =\n" << a;
            throw MonotonicityError(os.str());
        }
        const double base = std::max(axis, 0.0) / dx2;
        Point y = x;
        y[i] += dx;
        sb.add_point(y, base + positive_part(b[i]) / dx);
        y[i] -= 2.0 * dx;
        sb.add_point(y, base + negative_part(b[i]) / dx);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            const double sj = aij > 0.0 ? 1.0 : -1.0;
            const double w = std::abs(aij) / dx2;
            Point z = x;
            z[i] += dx;
            z[j] += sj * dx;
            sb.add_point(z, w);
            z = x;
            z[i] -= dx;
            z[j] -= sj * dx;
            sb.add_point(z, w);
        }
    }
    return sb.finish();
}

Stencil build_L(const ControlProblem& p, std::size_t alpha, double t, const Grid& grid, std::size_t node) {
    const Point x = grid.node(node);
    return build_L(p.diffusion(alpha, t, x), p.drift(alpha, t, x), grid, node);
}

}  // namespace mdq
