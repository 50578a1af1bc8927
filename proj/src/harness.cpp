#include "mdq/harness.hpp"

#include "mdq/error.hpp"
#include "mdq/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace mdq {

TestFunction cos_sum(std::size_t dim, double shift) {
    TestFunction f;
    f.value = [shift](const Point& x) { return std::cos(shift + x.sum()); };
    f.gradient = [shift, dim](const Point& x) {
        return Point(Point::Constant(static_cast<Eigen::Index>(dim), -std::sin(shift + x.sum())));
    };
    f.hessian = [shift, dim](const Point& x) {
        const auto n = static_cast<Eigen::Index>(dim);
        return Matrix(Matrix::Constant(n, n, -std::cos(shift + x.sum())));
    };
    f.bound = 1.0;
    return f;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Angular integral of h over the circle of radius r (weight r included),
/// trapezoid rule doubled until it settles.
double circle_integral(const std::function<double(const Point&)>& h, double r, double tol) {
    auto trap = [&](std::size_t n) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            Point z(2);
            z << r * std::cos(th), r * std::sin(th);
            s += h(z);
        }
        return s * 2.0 * std::numbers::pi * r / static_cast<double>(n);
    };
    double prev = trap(16);
    for (std::size_t n = 32; n <= 16384; n *= 2) {
        const double cur = trap(n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw OracleError("angular quadrature did not settle at r = " + std::to_string(r));
}

}  // namespace

double oracle_J(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha, double t, const Point& x,
                const TestFunction& phi, double tol) {
    if (kern.zero) return 0.0;
    if (kern.dim > 2) throw OracleError("oracle supports M <= 2");
    if (!(tol > 0.0)) throw ConfigError("oracle tolerance must be positive");
    const double phi_x = phi.value(x);

    // Gauss-Legendre nodes for the Taylor remainder int_0^1 (1-s) eta^T H(x + s eta) eta ds.
    std::vector<double> gn, gw;
    quad::gauss_legendre(12, gn, gw);
    auto compensated = [&](const Point& z) {
        const double k = kern(z);
        if (k == 0.0) return 0.0;
        const Point eta = p.jump(alpha, t, x, z);
        double v = 0.0;
        if (z.norm() <= 1.0) {
            for (std::size_t q = 0; q < gn.size(); ++q) {
                const double s = 0.5 * (gn[q] + 1.0);
                v += 0.5 * gw[q] * (1.0 - s) * eta.dot(phi.hessian(x + s * eta) * eta);
            }
        } else {
            v = phi.value(x + eta) - phi_x;
        }
        return v * k;
    };
    const double ang_tol = 1e-13;
    auto radial = [&](double r) {
        if (kern.dim == 1) return compensated(scalar_point(r)) + compensated(scalar_point(-r));
        return circle_integral(compensated, r, ang_tol);
    };
    const double support = kern.support_radius;
    // Fixed Gauss-Kronrod on pieces short enough that the integrand is
    // resolved; the Kronrod error estimates are summed and checked at the end.
    double err_sum = 0.0;
    auto piece = [&](double a, double b) {
        if (a >= support) return 0.0;
        b = std::min(b, support);
        // Mapped onto [-1, 1] so the Kronrod estimate carries the interval scale.
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        auto g = [&](double u) { return half * radial(mid + half * u); };
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, 0, 0.0, &err);
        if (!std::isfinite(v)) throw OracleError("non-finite shell integral on [" + std::to_string(a) + ", " +
                                                 std::to_string(b) + "]");
        err_sum += err;
        return v;
    };

    // Dyadic shells toward the origin; the remainder is extrapolated from
    // the geometric decay of the last shells.
    double inner = 0.0;
    double prev_shell = kNaN;
    bool settled = false;
    for (int j = 0; j < 400; ++j) {
        const double hi = std::ldexp(1.0, -j);
        const double shell = piece(0.5 * hi, hi);
        inner += shell;
        if (shell == 0.0 && j > 2) {
            settled = true;
            break;
        }
        if (j >= 3 && std::isfinite(prev_shell) && prev_shell != 0.0) {
            const double q = std::clamp(std::abs(shell / prev_shell), 0.0, 0.95);
            const double rest = shell * q / (1.0 - q);
            if (std::abs(rest) < 0.25 * tol) {
                inner += rest;
                err_sum += std::abs(rest);
                settled = true;
                break;
            }
        }
        prev_shell = shell;
    }
    if (!settled) throw OracleError("inner shells did not converge to tol " + std::to_string(tol));

    // Unit pieces outward until the support ends or the tail mass times 2 sup|phi| is negligible.
    auto tail_mass = [&](double r) {
        auto dens = [&](double s) {
            if (kern.dim == 1) return kern(scalar_point(s)) + kern(scalar_point(-s));
            return circle_integral([&](const Point& z) { return kern(z); }, s, ang_tol);
        };
        if (std::isfinite(support)) return r >= support ? 0.0 : quad::adaptive(dens, r, support, 1e-10).value;
        return quad::to_infinity(dens, r, 1e-10).value;
    };
    double outer = 0.0;
    int quiet = 0;
    settled = false;
    for (int j = 1; j < 4096; ++j) {
        const double lo = static_cast<double>(j);
        if (lo >= support) {
            settled = true;
            break;
        }
        const double shell = piece(lo, lo + 1.0);
        outer += shell;
        const double r = lo + 1.0;
        if (std::isfinite(phi.bound)) {
            if ((j & 7) == 0 || r >= support) {
                const double rest = 2.0 * phi.bound * tail_mass(r);
                if (rest < 0.25 * tol) {
                    err_sum += rest;
                    settled = true;
                    break;
                }
            }
        } else {
            quiet = std::abs(shell) < 0.01 * tol ? quiet + 1 : 0;
            if (quiet >= 4 && r >= 32.0) {
                settled = true;
                break;
            }
        }
    }
    if (!settled) throw OracleError("outer shells did not converge to tol " + std::to_string(tol));
    if (err_sum > tol) {
        throw OracleError("quadrature error estimate " + std::to_string(err_sum) + " exceeds tol " +
                          std::to_string(tol));
    }
    return inner + outer;
}

double exact_L(const ControlProblem& p, std::size_t alpha, double t, const Point& x, const TestFunction& phi) {
    const Matrix a = p.diffusion(alpha, t, x);
    return (a.array() * phi.hessian(x).array()).sum() + p.drift(alpha, t, x).dot(phi.gradient(x));
}

ControlProblem manufactured_problem(const ManufacturedConfig& cfg) {
    const std::size_t n = cfg.dim;
    ControlProblem p = constant_problem({cfg.control}, n, cfg.kernel.dim, cfg.horizon, make_initial("cos"));
    // With x-independent jumps J[cos(s)] = A cos(s) + B sin(s), s = sum x_i.
    const TestFunction phi = cos_sum(n);
    Point x0 = Point::Zero(static_cast<Eigen::Index>(n));
    Point x1 = x0;
    x1[0] = 0.5 * std::numbers::pi;
    const double A = oracle_J(cfg.kernel, p, 0, 0.0, x0, phi);
    const double B = oracle_J(cfg.kernel, p, 0, 0.0, x1, phi);
    const Matrix a = p.diffusion(0, 0.0, x0);
    const double sum_a = a.sum();
    const double sum_b = p.drift(0, 0.0, x0).sum();
    const double c = cfg.control.discount;
    const double cc = -1.0 + sum_a + c - A;
    const double cs = sum_b - B;
    p.source = [cc, cs](std::size_t, double t, const Point& x) {
        const double s = x.sum();
        return std::exp(-t) * (cc * std::cos(s) + cs * std::sin(s));
    };
    p.time_dependent_source = true;
    return p;
}

std::vector<LevelError> manufactured_run(const ManufacturedConfig& cfg) {
    if (cfg.levels.empty()) throw ConfigError("manufactured run needs at least one level");
    const ControlProblem p = manufactured_problem(cfg);
    std::vector<LevelError> out;
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        const std::size_t nodes = cfg.levels[i];
        const Grid grid = Grid::periodic(cfg.dim, 0.0, 2.0 * std::numbers::pi, nodes);
        Discretization disc(p, cfg.kernel, grid, cfg.nonlocal, {}, cfg.scheme.exec);
        SchemeConfig sc = cfg.scheme;
        sc.cfl = CflMode::auto_dt;
        sc.dt = cfg.dt_per_dx > 0.0 ? cfg.dt_per_dx * grid.dx() : 0.0;
        const SolveResult r = solve(disc, sc);
        double err = 0.0;
        for (std::size_t b = 0; b < grid.size(); ++b) {
            const double exact = std::exp(-cfg.horizon) * std::cos(grid.node(b).sum());
            err = std::max(err, std::abs(r.values[b] - exact));
        }
        LevelError row;
        row.level = i;
        row.nodes = nodes;
        row.dx = grid.dx();
        row.dt = r.dt;
        row.dz = disc.nonlocal().regime() == Regime::double_tail ? disc.nonlocal().dz() : 0.0;
        row.steps = r.num_steps;
        row.sup_error = err;
        row.pair_order = out.empty() || err <= 0.0 || out.back().sup_error <= 0.0
                             ? kNaN
                             : std::log(err / out.back().sup_error) / std::log(row.dx / out.back().dx);
        out.push_back(row);
    }
    return out;
}

double guaranteed_order(const LevyKernel& kern) {
    return kern.kind == KernelKind::singular_gamma_ge_1 ? 0.1 : 0.2;
}

RateReport rate_report(const ManufacturedConfig& cfg) {
    RateReport rep;
    rep.rows = manufactured_run(cfg);
    rep.guaranteed_order = guaranteed_order(cfg.kernel);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        if (!(rep.rows[i].sup_error < rep.rows[i - 1].sup_error)) rep.strictly_decreasing = false;
    }
    if (rep.rows.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : rep.rows) pts.emplace_back(r.dx, r.sup_error);
        rep.fit = estimate_order(pts);
    } else {
        rep.fit.slope = kNaN;
    }
    return rep;
}

std::string RateReport::csv() const {
    std::ostringstream os;
    os << "level,dx,dt,dz,sup_error,pair_order\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.12e,%.12e,%.12e,%.12e,", r.level, r.dx, r.dt, r.dz, r.sup_error);
        os << buf;
        if (std::isfinite(r.pair_order)) {
            std::snprintf(buf, sizeof buf, "%.6f", r.pair_order);
            os << buf;
        }
        os << '\n';
    }
    std::snprintf(buf, sizeof buf, "guarantee,,,,,%.6f\n", guaranteed_order);
    os << buf;
    return os.str();
}

}  // namespace mdq
