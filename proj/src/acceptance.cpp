#include "mdq/acceptance.hpp"

#include "mdq/error.hpp"
#include "mdq/harness.hpp"
#include "mdq/local.hpp"
#include "mdq/nonlocal.hpp"
#include "mdq/rates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mdq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Runs `body`, times it and turns any library error into a failure.
CriterionResult timed(int id, std::string name, double limit, const std::function<void(CriterionResult&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = std::move(name);
    r.limit_seconds = limit;
    const auto start = std::chrono::steady_clock::now();
    try {
        r.passed = true;
        body(r);
    } catch (const Error& e) {
        r.passed = false;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > limit) {
        r.passed = false;
        r.detail += fmt("; over time limit %.0f s", limit);
    }
    return r;
}

Point zeros(std::size_t n) { return Point::Zero(static_cast<Eigen::Index>(n)); }

/// Two controls: a pure z jump and an asymmetric quadratic jump with drift.
ControlProblem stencil_problem(std::size_t dim) {
    ConstantControl a0;
    a0.label = "linear";
    a0.sigma = 0.4;
    a0.drift = zeros(dim);
    a0.drift[0] = 0.3;
    ConstantControl a1;
    a1.label = "quadratic";
    a1.sigma = 0.2;
    a1.drift = zeros(dim);
    a1.drift[0] = -0.2;
    a1.jump_scale = 0.8;
    a1.jump_quad = 0.25;
    ControlProblem p = constant_problem({a0, a1}, dim, dim, 1.0, make_initial("cos"));
    if (dim == 2) {
        // Correlated diffusion; still diagonally dominant.
        p.sigma = [](std::size_t a, double, const Point&) {
            Matrix s(2, 2);
            s << 0.4, 0.1, 0.1, 0.3;
            return Matrix(a == 0 ? s : Matrix(0.5 * s));
        };
    }
    return p;
}

const std::vector<double>& dx_family() {
    static const std::vector<double> v{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    return v;
}

std::vector<std::size_t> sample_nodes(const Grid& grid, std::size_t count) {
    std::vector<std::size_t> out;
    const std::size_t n = grid.size();
    if (count >= n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    for (std::size_t k = 0; k < count; ++k) out.push_back((2 * k + 1) * n / (2 * count));
    return out;
}

Grid box(std::size_t dim, double dx, double half) {
    return Grid(dx, std::vector<double>(dim, -half), std::vector<double>(dim, half));
}

/// Largest violation of the table shape each regime relies on, relative to the largest weight.
double table_violation(const WeightTable& t, Regime regime) {
    const auto& w = regime == Regime::double_tail ? t.nodal : t.weights;
    double scale = 0.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (double v : w) worst = std::max(worst, -v / scale);
    if (regime == Regime::single_tail) {
        for (std::size_t n = 2; n < w.size(); ++n) worst = std::max(worst, (w[n] - w[n - 1]) / scale);
    } else if (regime == Regime::double_tail) {
        for (std::size_t m = 2; m < w.size(); ++m) {
            const double next = m + 1 < w.size() ? w[m + 1] : 0.0;
            worst = std::max(worst, -(w[m - 1] - 2.0 * w[m] + next) / scale);
        }
    }
    return worst;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

CriterionResult check_weight_positivity() {
    return timed(1, "weight positivity", 60.0, [](CriterionResult& r) {
        std::size_t stencils = 0;
        std::size_t bad = 0;
        double worst = 0.0;
        std::string first;
        auto note = [&](double violation, const std::string& where) {
            worst = std::max(worst, violation);
            if (violation > 1e-14) {
                if (bad++ == 0) first = where;
            }
        };
        for (std::size_t dim : {1u, 2u}) {
            const ControlProblem p = stencil_problem(dim);
            for (const auto& nk : builtin_kernels(dim)) {
                for (double dx : dx_family()) {
                    const Grid grid = box(dim, dx, dim == 1 ? 2.0 : 1.0);
                    const NonlocalOperator op(nk.kernel, grid);
                    const std::string tag = nk.name + fmt(" dx=%g", dx);
                    if (const auto* t = op.tails_1d()) {
                        note(table_violation(t->plus_table(), op.regime()), tag + " plus table");
                        note(table_violation(t->minus_table(), op.regime()), tag + " minus table");
                    }
                    if (const auto* pt = op.polar()) {
                        for (const auto& ray : pt->rays) note(table_violation(ray.table(), op.regime()), tag + " ray");
                    }
                    if (const auto* z = op.finite()) {
                        for (double w : z->weights) note(w < 0.0 ? 1.0 : 0.0, tag + " z rule");
                    }
                    const auto nodes = sample_nodes(grid, dim == 1 ? grid.size() : 3);
                    for (std::size_t a = 0; a < p.num_controls(); ++a) {
                        for (std::size_t node : nodes) {
                            for (int which = 0; which < 2; ++which) {
                                Stencil s;
                                try {
                                    s = which == 0 ? op.build(p, a, 0.0, node) : build_L(p, a, 0.0, grid, node);
                                } catch (const MonotonicityError& e) {
                                    note(1.0, tag + " " + e.what());
                                    continue;
                                }
                                ++stencils;
                                const double scale = std::max(1.0, s.diag_mass);
                                note(std::max(0.0, -s.min_weight() / scale),
                                     tag + (which == 0 ? " J" : " L") + fmt(" node %zu", node));
                            }
                        }
                    }
                }
            }
        }
        r.passed = bad == 0;
        r.detail = fmt("%zu stencils, %zu violations, worst relative negative part %.2e", stencils, bad, worst);
        if (bad) r.detail += ", first at " + first;
    });
}

CriterionResult check_mass_bounds() {
    return timed(2, "diagonal mass bounds", 60.0, [](CriterionResult& r) {
        std::ostringstream os;
        double worst = 0.0;
        for (std::size_t dim : {1u, 2u}) {
            const ControlProblem p = stencil_problem(dim);
            for (const auto& nk : builtin_kernels(dim)) {
                if (nk.kernel.zero) continue;
                std::vector<double> jd, ld;
                for (double dx : dx_family()) {
                    const Grid grid = box(dim, dx, dim == 1 ? 2.0 : 1.0);
                    const NonlocalOperator op(nk.kernel, grid);
                    double jm = 0.0;
                    double lm = 0.0;
                    for (std::size_t node : sample_nodes(grid, dim == 1 ? 9 : 1)) {
                        for (std::size_t a = 0; a < p.num_controls(); ++a) {
                            jm = std::max(jm, op.build(p, a, 0.0, node).diag_mass);
                            const Stencil l = build_L(p.diffusion(a, 0.0, grid.node(node)), zeros(dim), grid, node);
                            lm = std::max(lm, l.diag_mass);
                        }
                    }
                    jd.push_back(jm * dx);
                    ld.push_back(lm * dx * dx);
                }
                auto growth = [](const std::vector<double>& v) {
                    return *std::max_element(v.begin(), v.end()) / v.front();
                };
                const double gj = growth(jd);
                const double gl = growth(ld);
                worst = std::max({worst, gj, gl});
                os << nk.name << fmt(" jbar*dx %.3g->%.3g", jd.front(), jd.back()) << "; ";
            }
        }
        r.passed = worst <= 1.5;
        r.detail = os.str() + fmt("largest ratio to coarsest level %.3f (limit 1.5)", worst);
    });
}

CriterionResult check_consistency() {
    return timed(3, "consistency", 300.0, [](CriterionResult& r) {
        const std::vector<std::size_t> levels{64, 256, 1024};
        const TestFunction phi = cos_sum(1);
        std::ostringstream os;
        ConstantControl c;
        c.sigma = 0.5;
        c.drift = scalar_point(0.3);
        const ControlProblem p = constant_problem({c}, 1, 1, 1.0, make_initial("cos"));
        auto order_of = [&](const std::function<double(const Grid&, std::span<const double>, std::size_t)>& apply,
                            const std::function<double(const Point&)>& exact) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t n : levels) {
                const Grid grid = Grid::periodic(1, 0.0, kTwoPi, n);
                const std::vector<double> u = sample(grid, phi.value);
                double err = 0.0;
                for (std::size_t node : sample_nodes(grid, 16)) {
                    err = std::max(err, std::abs(apply(grid, u, node) - exact(grid.node(node))));
                }
                pts.emplace_back(grid.dx(), err);
            }
            return std::pair{estimate_order(pts).slope, pts};
        };
        const auto [lord, lpts] = order_of(
            [&](const Grid& g, std::span<const double> u, std::size_t node) {
                return build_L(p, 0, 0.0, g, node).apply(u, 0.0);
            },
            [&](const Point& x) { return exact_L(p, 0, 0.0, x, phi); });
        r.passed = lord >= 0.9;
        os << fmt("L order %.3f (need 0.9)", lord);
        for (const auto& nk : builtin_kernels(1)) {
            const LevyKernel& k = nk.kernel;
            if (k.zero || nk.name.rfind("tempered", 0) != 0) continue;
            const double need = 0.8;
            const auto [jord, jpts] = order_of(
                [&](const Grid& g, std::span<const double> u, std::size_t node) {
                    const NonlocalOperator op(k, g);
                    return op.build(p, 0, 0.0, node).apply(u, 0.0);
                },
                [&](const Point& x) { return oracle_J(k, p, 0, 0.0, x, phi); });
            if (!(jord >= need)) r.passed = false;
            os << "; " << nk.name << fmt(" J order %.3f (err %.2e->%.2e, need %.1f)", jord, jpts.front().second,
                                         jpts.back().second, need);
            if (k.kind == KernelKind::singular_gamma_ge_1) {
                // Reported only: dz = dx^(1/2) exactly instead of the default multiple of dx.
                const auto [eord, epts] = order_of(
                    [&](const Grid& g, std::span<const double> u, std::size_t node) {
                        NonlocalConfig nl;
                        nl.dz = std::sqrt(g.dx());
                        const NonlocalOperator op(k, g, nl);
                        return op.build(p, 0, 0.0, node).apply(u, 0.0);
                    },
                    [&](const Point& x) { return oracle_J(k, p, 0, 0.0, x, phi); });
                os << fmt(" [exact dz = dx^(1/2): order %.3f, err %.2e->%.2e, not gated]", eord, epts.front().second,
                          epts.back().second);
            }
        }
        r.detail = os.str();
    });
}

CriterionResult check_comparison(std::uint64_t seed) {
    return timed(4, "discrete comparison", 120.0, [seed](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const auto kernels = builtin_kernels(1);
        const double weights[3] = {0.0, 0.5, 1.0};
        const Grid grid(0.125, {-3.0}, {3.0});
        std::size_t bad = 0;
        double worst = 0.0;
        const std::size_t pairs = 100;
        for (std::size_t i = 0; i < pairs; ++i) {
            const auto& nk = kernels[rng() % kernels.size()];
            std::vector<ConstantControl> cs(1 + rng() % 2);
            for (auto& c : cs) {
                c.sigma = 0.5 * unit(rng);
                c.drift = scalar_point(unit(rng) - 0.5);
                c.discount = 0.3 * unit(rng);
                c.jump_scale = 0.5 + unit(rng);
                c.jump_quad = 0.3 * unit(rng);
            }
            const double g_shift = unit(rng);
            const double f_shift = unit(rng);
            const double phase = kTwoPi * unit(rng);
            ControlProblem lo = constant_problem(cs, 1, 1, 0.3, make_initial("bump", {{"width", 1.0}}));
            ControlProblem hi = lo;
            const auto base_g = lo.initial;
            lo.source = [phase](std::size_t a, double, const Point& x) {
                return std::sin(x[0] + phase) + 0.1 * static_cast<double>(a);
            };
            hi.source = [phase, f_shift](std::size_t a, double, const Point& x) {
                return std::sin(x[0] + phase) + 0.1 * static_cast<double>(a) +
                       f_shift * (1.0 + std::cos(x[0])) * 0.5;
            };
            hi.initial = [base_g, g_shift](const Point& x) {
                return base_g(x) + g_shift * std::exp(-x.squaredNorm());
            };
            SchemeConfig s;
            s.theta = weights[rng() % 3];
            s.vartheta = weights[rng() % 3];
            s.cfl = CflMode::auto_dt;
            s.dt = 0.05;
            s.keep_trajectory = true;
            s.tol = 1e-13;
            const SolveResult a = solve(lo, nk.kernel, grid, s);
            const SolveResult b = solve(hi, nk.kernel, grid, s);
            const ComparisonReport rep = discrete_comparison_check(a, b, 1e-10);
            worst = std::max(worst, rep.max_violation);
            if (!rep.ordered) ++bad;
        }
        r.passed = bad == 0;
        r.detail = fmt("%zu ordered pairs, %zu violations, largest U1 - U2 %.2e", pairs, bad, worst);
    });
}

CriterionResult check_stability() {
    return timed(5, "stability", 120.0, [](CriterionResult& r) {
        std::ostringstream os;
        std::size_t bad = 0;
        const auto runs = builtin_runs();
        for (auto run : runs) {
            const SolveResult res = solve(run.problem, run.kernel, run.grid, run.scheme, run.nonlocal);
            double ratio = 0.0;
            for (const auto& d : res.steps) {
                if (d.stability_bound > 0.0) ratio = std::max(ratio, d.sup_norm / d.stability_bound);
            }
            if (!res.stable) ++bad;
            os << run.name << fmt(" %.3f", ratio) << (res.stable ? "" : " UNSTABLE") << "; ";
        }
        r.passed = bad == 0;
        r.detail = fmt("%zu runs, %zu unstable; max sup|U^n| / bound: ", runs.size(), bad) + os.str();
    });
}

CriterionResult check_contraction(std::uint64_t seed) {
    return timed(6, "implicit contraction", 60.0, [seed](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::ostringstream os;
        std::size_t tested = 0;
        for (auto run : builtin_runs()) {
            const SchemeConfig& s = run.scheme;
            if (s.theta == 0.0 && s.vartheta == 0.0) continue;
            Discretization disc(run.problem, run.kernel, run.grid, run.nonlocal);
            const auto prev = disc.at(0.0);
            const auto [steps, dt] =
                plan_steps(run.problem.horizon, s, cfl_max_dt(*prev, s.theta, s.vartheta));
            (void)steps;
            const auto now = disc.at(dt);
            const std::vector<double> u0 = sample(run.grid, run.problem.initial);
            const ImplicitProblem prob(*now, u0, explicit_terms(*prev, u0, s.theta, s.vartheta), s.theta,
                                       s.vartheta, dt);
            const double eps = default_relaxation(*now, s.theta, s.vartheta, dt);
            const double factor = 1.0 - eps;
            const std::size_t n = run.grid.size();
            std::vector<double> u(n), v(n), tu(n), tv(n);
            double worst = 0.0;
            for (int k = 0; k < 50; ++k) {
                const double spread = k % 2 == 0 ? 2.0 : 1e-3;
                for (std::size_t i = 0; i < n; ++i) {
                    u[i] = u0[i] + unit(rng);
                    v[i] = u[i] + spread * unit(rng);
                }
                prob.apply_T(u, tu, eps);
                prob.apply_T(v, tv, eps);
                worst = std::max(worst, sup_diff(tu, tv) / sup_diff(u, v));
                ++tested;
            }
            if (worst > factor + 1e-12) r.passed = false;
            os << run.name << fmt(" %.4f <= %.4f", worst, factor) << "; ";
        }
        r.detail = fmt("%zu pairs; largest |TU-TV|/|U-V| against 1-eps: ", tested) + os.str();
    });
}

CriterionResult check_convergence() {
    return timed(7, "convergence rate", 900.0, [](CriterionResult& r) {
        std::ostringstream os;
        for (double gamma : {0.0, 0.5, 1.5}) {
            ManufacturedConfig cfg;
            cfg.control.sigma = 0.0;
            cfg.control.drift = scalar_point(0.0);
            cfg.kernel = tempered_stable(1.0, 1.0, gamma);
            cfg.levels = {512, 1024, 2048, 4096};
            cfg.dt_per_dx = 1.0;
            cfg.horizon = 0.5;
            const RateReport rep = rate_report(cfg);
            const double need = std::max(0.5, rep.guaranteed_order);
            const bool ok = rep.strictly_decreasing && rep.fit.slope >= need;
            if (!ok) r.passed = false;
            os << fmt("gamma %.1f: order %.3f (need %.2f), errors %.2e->%.2e%s; ", gamma, rep.fit.slope, need,
                      rep.rows.front().sup_error, rep.rows.back().sup_error,
                      rep.strictly_decreasing ? "" : " not decreasing");
        }
        r.detail = os.str();
    });
}

CriterionResult check_switching() {
    return timed(8, "switching limit", 600.0, [](CriterionResult& r) {
        const SwitchingSetup su = builtin_switching();
        const SolveResult scalar = solve(su.system.base, su.kernel, su.grid, su.scheme);
        const std::vector<double> costs{0.4, 0.2, 0.1, 0.05};
        const GapStudy study =
            switching_gap_study(su.system, costs, scalar.values, su.kernel, su.grid, su.scheme);
        std::ostringstream os;
        for (const auto& row : study.rows) {
            if (row.min_diff < -1e-6 || row.max_spread > row.k + 1e-12) r.passed = false;
            os << fmt("k %.2f gap %.3e min %.1e spread %.3f; ", row.k, row.gap, row.min_diff, row.max_spread);
        }
        if (!study.non_increasing) r.passed = false;
        SwitchingProblem same = su.system;
        same.partition = {{0, 1}, {0, 1}};
        const SwitchingResult twin = solve_switching(same, su.kernel, su.grid, su.scheme);
        double diff = 0.0;
        for (const auto& v : twin.values) diff = std::max(diff, sup_diff(v, scalar.values));
        if (diff > 1e-10) r.passed = false;
        r.detail = os.str() + fmt("exponent %.3f; identical partitions differ from U by %.1e", study.exponent, diff) +
                   (study.non_increasing ? "" : "; gap not monotone");
    });
}

CriterionResult check_crank_nicolson() {
    return timed(9, "Crank-Nicolson order", 300.0, [](CriterionResult& r) {
        ConstantControl c;
        c.sigma = 0.3;
        c.drift = scalar_point(0.0);
        const ControlProblem p = constant_problem({c}, 1, 1, 0.48, make_initial("cos"));
        const LevyKernel kern = tempered_stable(0.5, 1.0, 0.5);
        const Grid grid = Grid::periodic(1, 0.0, kTwoPi, 128);
        Discretization disc(p, kern, grid);
        SchemeConfig s;
        s.theta = 0.5;
        s.vartheta = 0.5;
        s.tol = 1e-13;
        s.cfl = CflMode::enforce;
        const double dt_max = cfl_max_dt(*disc.at(0.0), s.theta, s.vartheta);
        s.dt = 0.008 / 16.0;
        const std::vector<double> ref = solve(disc, s).values;
        std::vector<std::pair<double, double>> pts;
        std::ostringstream os;
        for (double dt : {0.032, 0.016, 0.008}) {
            s.dt = dt;
            const double e = sup_diff(solve(disc, s).values, ref);
            pts.emplace_back(dt, e);
            os << fmt("dt %.3f err %.3e; ", dt, e);
        }
        const double order = estimate_order(pts).slope;
        r.passed = order >= 1.7;
        r.detail = os.str() + fmt("order %.3f (need 1.7), CFL bound %.4f", order, dt_max);
    });
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
    using Check = std::function<CriterionResult()>;
    const std::vector<Check> all{
        [] { return check_weight_positivity(); }, [] { return check_mass_bounds(); },
        [] { return check_consistency(); },       [] { return check_comparison(); },
        [] { return check_stability(); },         [] { return check_contraction(); },
        [] { return check_convergence(); },       [] { return check_switching(); },
        [] { return check_crank_nicolson(); },
    };
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!ids.empty() && std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
        out.push_back(all[i]());
    }
    return out;
}

std::string format(const CriterionResult& r) {
    return fmt("[%s] %d %s (%.1f s): ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) + r.detail;
}

}  // namespace mdq
