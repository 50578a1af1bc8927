#include "mdq/nonlocal.hpp"

#include "mdq/error.hpp"
#include "mdq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdq {

Regime regime_of(const LevyKernel& kern) {
    switch (kern.kind) {
        case KernelKind::finite: return Regime::finite;
        case KernelKind::singular_gamma_lt_1: return Regime::single_tail;
        case KernelKind::singular_gamma_ge_1: return Regime::double_tail;
    }
    return Regime::finite;
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::finite: return "finite";
        case Regime::single_tail: return "single_tail";
        case Regime::double_tail: return "double_tail";
    }
    return "unknown";
}

namespace {

struct Ray {
    Point dir;
    double weight;
    const WeightTable* table;
};

std::vector<Ray> rays_of(const TailKernel1D& t) {
    return {{scalar_point(1.0), 1.0, &t.plus_table()}, {scalar_point(-1.0), 1.0, &t.minus_table()}};
}

std::vector<Ray> rays_of(const PolarTailKernel& t) {
    std::vector<Ray> out;
    for (std::size_t i = 0; i < t.rays.size(); ++i) out.push_back({t.sphere.nodes[i], t.sphere.weights[i], &t.rays[i].table()});
    return out;
}

void require_step(const WeightTable& tab, double dx) {
    if (std::abs(tab.step - dx) > 1e-12 * dx) {
        throw ConfigError("single-tail table step " + std::to_string(tab.step) + " does not match grid dx " +
                          std::to_string(dx));
    }
}

Stencil single_tail(const std::vector<Ray>& rays, const ControlProblem& p, std::size_t alpha, double t,
                    const Grid& grid, std::size_t node) {
    const Point x = grid.node(node);
    const double dx = grid.dx();
    StencilBuilder sb(grid, node);
    for (const auto& ray : rays) {
        require_step(*ray.table, dx);
        const auto& w = ray.table->weights;
        const std::size_t n_max = w.size() - 1;
        for (std::size_t n = 1; n <= n_max + 1; ++n) {
            const double next = n <= n_max ? w[n] : 0.0;
            const double c = ray.weight * (w[n - 1] - next) / dx;
            if (c <= 0.0) continue;
            const Point z = (static_cast<double>(n) * dx) * ray.dir;
            sb.add_point(x + p.jump(alpha, t, x, z), c);
        }
    }
    return sb.finish();
}

std::vector<std::ptrdiff_t> antipodes(const std::vector<Ray>& rays) {
    std::vector<std::ptrdiff_t> out(rays.size(), -1);
    for (std::size_t i = 0; i < rays.size(); ++i) {
        for (std::size_t j = 0; j < rays.size(); ++j) {
            if (i != j && (rays[i].dir + rays[j].dir).norm() < 1e-9 &&
                std::abs(rays[i].table->step - rays[j].table->step) <= 1e-14 * rays[i].table->step) {
                out[i] = static_cast<std::ptrdiff_t>(j);
                break;
            }
        }
    }
    return out;
}

DoubleTailStencil double_tail(const std::vector<Ray>& rays, const ControlProblem& p, std::size_t alpha, double t,
                              const Grid& grid, std::size_t node) {
    const Point x = grid.node(node);
    DoubleTailStencil out;
    out.drift = Point::Zero(static_cast<Eigen::Index>(p.dim_x));
    StencilBuilder sb(grid, node);
    const auto anti = antipodes(rays);
    const std::size_t nr = rays.size();

    auto W = [](const WeightTable& tab, std::size_t n) { return n < tab.nodal.size() ? tab.nodal[n] : 0.0; };

    // Coefficients (before division by h^2) of psi(+h dir) and of psi(-h dir)
    // for rays without an antipode.
    std::vector<double> first(nr), cross(nr);
    for (std::size_t d = 0; d < nr; ++d) {
        const WeightTable& tab = *rays[d].table;
        if (tab.nodal.empty()) continue;
        first[d] = rays[d].weight * (W(tab, 0) - 2.0 * W(tab, 1) + W(tab, 2));
        cross[d] = rays[d].weight * W(tab, 0);
    }
    for (std::size_t d = 0; d < nr; ++d) {
        if (anti[d] >= 0) first[d] += cross[static_cast<std::size_t>(anti[d])];
    }

    auto target = [&](std::size_t d, double r) {
        return Point(x + p.jump(alpha, t, x, Point(r * rays[d].dir)));
    };

    for (std::size_t d = 0; d < nr; ++d) {
        const WeightTable& tab = *rays[d].table;
        if (tab.nodal.empty()) continue;
        const double scale = rays[d].weight * W(tab, 0);
        if (first[d] >= -1e-13 * scale) {
            first[d] = std::max(first[d], 0.0);
            continue;
        }
        const double deficit = -first[d];
        first[d] = 0.0;
        const double h = tab.step;
        double& opposite = anti[d] >= 0 ? first[static_cast<std::size_t>(anti[d])] : cross[d];
        opposite -= deficit;
        if (opposite < -1e-13 * scale) {
            throw MonotonicityError("double-tail stencil cannot be made monotone near the origin along ray " +
                                    std::to_string(d) + " (deficit " + std::to_string(deficit) + ")");
        }
        opposite = std::max(opposite, 0.0);
        // The transfer added deficit (psi(h) - psi(-h)) / h^2, i.e. a first
        // derivative along the ray; remove it again as an x-drift.
        out.drift -= deficit / (h * h) * (target(d, h) - target(d, -h));
    }

    for (std::size_t d = 0; d < nr; ++d) {
        const WeightTable& tab = *rays[d].table;
        if (tab.nodal.empty()) continue;
        const double h = tab.step;
        const double inv = 1.0 / (h * h);
        const double omega = rays[d].weight;
        const std::size_t n_max = tab.nodal.size() - 1;
        sb.add_point(target(d, h), first[d] * inv);
        if (anti[d] < 0) sb.add_point(target(d, -h), cross[d] * inv);
        for (std::size_t m = 2; m <= n_max + 1; ++m) {
            double c = omega * (W(tab, m - 1) - 2.0 * W(tab, m) + W(tab, m + 1));
            if (c < 0.0) {
                // Only round-off and the truncation edge may dent convexity.
                if (-c > 1e-9 * omega * W(tab, m - 1) + 4.0 * omega * W(tab, n_max)) {
                    throw MonotonicityError("double-tail weights are not convex at n = " + std::to_string(m) +
                                            " along ray " + std::to_string(d));
                }
                c = 0.0;
            }
            if (c > 0.0) sb.add_point(target(d, static_cast<double>(m) * h), c * inv);
        }
    }
    out.stencil = sb.finish();
    return out;
}

double radius_for(const LevyKernel& kern, double trunc_tol) {
    if (std::isfinite(kern.support_radius)) return kern.support_radius;
    const double a = kern.decay_rate();
    if (!(a > 0.0)) throw ConfigError("kernel without exponential decay needs a finite support radius");
    return std::max(1.0, std::log(kern.bound_K / (a * trunc_tol)) / a);
}

}  // namespace

ZRule finite_rule(const LevyKernel& kern, double step, double trunc_tol, const SphereRule* sphere) {
    ZRule rule;
    if (kern.zero) return rule;
    if (!(step > 0.0)) throw ConfigError("quadrature step must be positive");
    const double radius = radius_for(kern, trunc_tol);
    const double a = kern.decay_rate();
    rule.tail_bound = std::isfinite(kern.support_radius) ? 0.0 : kern.bound_K * std::exp(-a * radius) / a;
    const auto cells = static_cast<std::size_t>(std::ceil(radius / step - 1e-12));
    if (cells > 5'000'000) throw ConfigError("quadrature needs too many cells at this step");

    std::vector<Point> dirs;
    std::vector<double> wts;
    if (kern.dim == 1) {
        dirs = {scalar_point(1.0), scalar_point(-1.0)};
        wts = {1.0, 1.0};
    } else {
        if (sphere == nullptr) throw ConfigError("finite quadrature for M >= 2 needs a sphere rule");
        sphere->validate(kern.dim);
        dirs = sphere->nodes;
        wts = sphere->weights;
    }
    const double power = static_cast<double>(kern.dim) - 1.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        auto f = [&](double r) { return kern(Point(r * dirs[d])) * std::pow(r, power); };
        for (std::size_t n = 0; n < cells; ++n) {
            const double lo = static_cast<double>(n) * step;
            const double hi = std::min(lo + step, kern.support_radius);
            if (lo >= hi) break;
            const double mass = n == 0 ? quad::endpoint_singular(f, lo, hi, 1e-12).value
                                       : quad::adaptive(f, lo, hi, 1e-12).value;
            if (mass < 0.0) throw ConfigError("negative quadrature weight in cell " + std::to_string(n));
            if (mass == 0.0) continue;
            rule.nodes.push_back((0.5 * (lo + hi)) * dirs[d]);
            rule.weights.push_back(wts[d] * mass);
        }
    }
    return rule;
}

Stencil build_J_finite(const ControlProblem& p, std::size_t alpha, double t, const Grid& grid, std::size_t node,
                       const ZRule& rule) {
    const Point x = grid.node(node);
    StencilBuilder sb(grid, node);
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        if (rule.weights[b] < 0.0) throw ConfigError("negative quadrature weight");
        sb.add_point(x + p.jump(alpha, t, x, rule.nodes[b]), rule.weights[b]);
    }
    return sb.finish();
}

Stencil build_J_single_tail_1d(const TailKernel1D& tails, const ControlProblem& p, std::size_t alpha, double t,
                               const Grid& grid, std::size_t node) {
    if (tails.order() != TailOrder::single) throw ConfigError("single-tail stencil needs single tails");
    return single_tail(rays_of(tails), p, alpha, t, grid, node);
}

Stencil build_J_single_tail_polar(const PolarTailKernel& tails, const ControlProblem& p, std::size_t alpha,
                                  double t, const Grid& grid, std::size_t node) {
    for (const auto& r : tails.rays) {
        if (r.order() != TailOrder::single) throw ConfigError("single-tail stencil needs single tails");
    }
    return single_tail(rays_of(tails), p, alpha, t, grid, node);
}

DoubleTailStencil build_J_double_tail_1d(const DoubleTailKernel1D& tails, const ControlProblem& p,
                                         std::size_t alpha, double t, const Grid& grid, std::size_t node) {
    if (tails.order() != TailOrder::double_tail) throw ConfigError("double-tail stencil needs double tails");
    return double_tail(rays_of(tails), p, alpha, t, grid, node);
}

DoubleTailStencil build_J_double_tail_polar(const PolarTailKernel& tails, const ControlProblem& p,
                                            std::size_t alpha, double t, const Grid& grid, std::size_t node) {
    for (const auto& r : tails.rays) {
        if (r.order() != TailOrder::double_tail) throw ConfigError("double-tail stencil needs double tails");
    }
    return double_tail(rays_of(tails), p, alpha, t, grid, node);
}

Stencil drift_stencil(const Grid& grid, std::size_t node, const Point& bvec) {
    StencilBuilder sb(grid, node);
    const Point x = grid.node(node);
    const double dx = grid.dx();
    for (Eigen::Index i = 0; i < bvec.size(); ++i) {
        if (bvec[i] == 0.0) continue;
        Point y = x;
        y[i] += bvec[i] > 0.0 ? dx : -dx;
        sb.add_point(y, std::abs(bvec[i]) / dx);
    }
    return sb.finish();
}

Point far_jump_mean(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha, double t, const Point& x,
                    const SphereRule* sphere) {
    const auto n = static_cast<Eigen::Index>(p.dim_x);
    Point out = Point::Zero(n);
    if (kern.zero || kern.support_radius <= 1.0) return out;
    std::vector<Point> dirs;
    std::vector<double> wts;
    SphereRule fallback;
    if (kern.dim == 1) {
        dirs = {scalar_point(1.0), scalar_point(-1.0)};
        wts = {1.0, 1.0};
    } else {
        if (sphere == nullptr) {
            if (kern.dim != 2) throw ConfigError("far jump mean for M > 2 needs a sphere rule");
            fallback = SphereRule::circle(64);
            sphere = &fallback;
        }
        dirs = sphere->nodes;
        wts = sphere->weights;
    }
    const double power = static_cast<double>(kern.dim) - 1.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        for (Eigen::Index i = 0; i < n; ++i) {
            auto g = [&](double r) {
                const Point z = r * dirs[d];
                return p.jump(alpha, t, x, z)[i] * kern(z) * std::pow(r, power);
            };
            const double v = std::isfinite(kern.support_radius)
                                 ? quad::adaptive(g, 1.0, kern.support_radius, 1e-12).value
                                 : quad::to_infinity(g, 1.0, 1e-12).value;
            out[i] += wts[d] * v;
        }
    }
    return out;
}

double default_dz(double dx) {
    // Lattice points x + m dz then land on grid nodes whenever eta(z) = z.
    return std::max(1.0, std::round(1.0 / std::sqrt(dx))) * dx;
}

NonlocalOperator::NonlocalOperator(LevyKernel kern, const Grid& grid, NonlocalConfig cfg)
    : kern_(std::move(kern)), grid_(&grid), cfg_(std::move(cfg)), regime_(regime_of(kern_)) {
    dz_ = cfg_.dz > 0.0 ? cfg_.dz : default_dz(grid.dx());
    if (kern_.dim >= 2) {
        if (cfg_.sphere) {
            sphere_ = *cfg_.sphere;
        } else if (kern_.dim == 2) {
            sphere_ = SphereRule::circle(cfg_.sphere_nodes);
        } else if (!kern_.zero) {
            throw ConfigError("M >= 3 needs a user sphere rule");
        }
        if (sphere_) sphere_->validate(kern_.dim);
    }
    if (kern_.zero) return;
    switch (regime_) {
        case Regime::finite:
            tables_ = finite_rule(kern_, grid.dx(), cfg_.trunc_tol, sphere());
            break;
        case Regime::single_tail:
            if (kern_.dim == 1) {
                tables_ = build_single_tail(kern_, grid.dx(), cfg_.trunc_tol);
            } else {
                tables_ = build_polar_tails(kern_, grid.dx(), *sphere_, TailOrder::single, cfg_.trunc_tol);
            }
            break;
        case Regime::double_tail: {
            if (kern_.dim == 1) {
                tables_ = build_double_tail(kern_, dz_, cfg_.trunc_tol);
            } else {
                tables_ = build_polar_tails(kern_, dz_, *sphere_, TailOrder::double_tail, cfg_.trunc_tol);
            }
            const std::size_t n_max =
                kern_.dim == 1 ? tails_1d()->plus_table().n_max() : polar()->rays.front().table().n_max();
            if (n_max < 2) throw ConfigError("dz is too coarse for the kernel support (n_max < 2)");
            break;
        }
    }
}

Stencil NonlocalOperator::build(const ControlProblem& p, std::size_t alpha, double t, std::size_t node) const {
    const Grid& grid = *grid_;
    if (kern_.zero) {
        Stencil s;
        s.center = node;
        return s;
    }
    const Point x = grid.node(node);
    Stencil body;
    Point drift;
    switch (regime_) {
        case Regime::finite:
            body = build_J_finite(p, alpha, t, grid, node, *finite());
            drift = -drift_correction_bbar(kern_, p, alpha, t, x, sphere());
            break;
        case Regime::single_tail:
            body = kern_.dim == 1 ? build_J_single_tail_1d(*tails_1d(), p, alpha, t, grid, node)
                                  : build_J_single_tail_polar(*polar(), p, alpha, t, grid, node);
            drift = -drift_correction_bbar(kern_, p, alpha, t, x, sphere());
            break;
        case Regime::double_tail: {
            DoubleTailStencil ds = kern_.dim == 1 ? build_J_double_tail_1d(*tails_1d(), p, alpha, t, grid, node)
                                                  : build_J_double_tail_polar(*polar(), p, alpha, t, grid, node);
            body = std::move(ds.stencil);
            const Point bt = kern_.dim == 1 ? drift_correction_btilde(*tails_1d(), p, alpha, t, x)
                                            : drift_correction_btilde(*polar(), p, alpha, t, x);
            drift = ds.drift - bt + far_jump_mean(kern_, p, alpha, t, x, sphere());
            break;
        }
    }
    return combine(grid, body, drift_stencil(grid, node, drift));
}

}  // namespace mdq
