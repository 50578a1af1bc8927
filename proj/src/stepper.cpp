#include "mdq/stepper.hpp"

#include "mdq/error.hpp"
#include "mdq/local.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace mdq {

namespace {

double sup_norm(std::span<const double> u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

Discretization::Discretization(const ControlProblem& p, const LevyKernel& kern, const Grid& grid, NonlocalConfig nl,
                               FarfieldFn far, Execution exec)
    : p_(&p), grid_(&grid), nonlocal_(kern, grid, std::move(nl)), far_(std::move(far)), exec_(exec) {
    if (p.dim_x != grid.dim()) throw ConfigError("problem dimension does not match the grid");
    if (p.dim_z != kern.dim) throw ConfigError("jump dimension does not match the kernel");
    if (p.num_controls() == 0) throw ConfigError("problem has no controls");
    if (!far_) {
        if (grid.farfield() == FarfieldKind::function) throw ConfigError("farfield 'function' needs a function");
        if (grid.farfield() == FarfieldKind::initial) {
            far_ = [g = p.initial](double, const Point& x) { return g(x); };
        } else {
            far_ = [](double, const Point&) -> double {
                throw ConfigError("farfield value requested on a grid that wraps or clamps");
            };
        }
    }
}

std::shared_ptr<const Operators> Discretization::at(double t) {
    for (const auto& ops : cache_) {
        if (ops->t == t) return ops;
    }
    const bool far_moves = grid_->farfield() == FarfieldKind::function;
    std::shared_ptr<const Operators> ops;
    if (!cache_.empty() && !p_->time_dependent) {
        if (!p_->time_dependent_source && !far_moves) return cache_.back();
        auto copy = std::make_shared<Operators>(*cache_.back());
        copy->t = t;
        if (p_->time_dependent_source) {
            for (std::size_t a = 0; a < copy->controls(); ++a) {
                for_each_index(copy->nodes(), exec_,
                               [&](std::size_t b) { copy->f[a][b] = p_->source(a, t, grid_->node(b)); });
            }
        }
        if (far_moves) refresh_far(*copy);
        ops = copy;
    } else {
        ops = assemble(t);
    }
    if (cache_.size() >= 2) cache_.erase(cache_.begin());
    cache_.push_back(ops);
    return ops;
}

void Discretization::refresh_far(Operators& ops) const {
    std::vector<double> far_sup(ops.nodes(), 0.0);
    for (std::size_t a = 0; a < ops.controls(); ++a) {
        for_each_index(ops.nodes(), exec_, [&](std::size_t b) {
            double fl = 0.0;
            double fj = 0.0;
            for (const auto& ft : ops.L[a][b].far) {
                const double v = far_(ops.t, ft.x);
                far_sup[b] = std::max(far_sup[b], std::abs(v));
                fl += ft.weight * v;
            }
            for (const auto& ft : ops.J[a][b].far) {
                const double v = far_(ops.t, ft.x);
                far_sup[b] = std::max(far_sup[b], std::abs(v));
                fj += ft.weight * v;
            }
            ops.far_L[a][b] = fl;
            ops.far_J[a][b] = fj;
        });
    }
    ops.far_sup = far_sup.empty() ? 0.0 : *std::max_element(far_sup.begin(), far_sup.end());
}

std::shared_ptr<const Operators> Discretization::assemble(double t) const {
    auto ops = std::make_shared<Operators>();
    ops->t = t;
    const std::size_t na = p_->num_controls();
    const std::size_t nn = grid_->size();
    ops->L.assign(na, std::vector<Stencil>(nn));
    ops->J.assign(na, std::vector<Stencil>(nn));
    ops->c.assign(na, std::vector<double>(nn));
    ops->f.assign(na, std::vector<double>(nn));
    ops->far_L.assign(na, std::vector<double>(nn));
    ops->far_J.assign(na, std::vector<double>(nn));
    for (std::size_t a = 0; a < na; ++a) {
        for_each_index(nn, exec_, [&](std::size_t b) {
            const Point x = grid_->node(b);
            ops->L[a][b] = build_L(*p_, a, t, *grid_, b);
            ops->J[a][b] = nonlocal_.build(*p_, a, t, b);
            ops->c[a][b] = p_->discount(a, t, x);
            ops->f[a][b] = p_->source(a, t, x);
            if (ops->c[a][b] < 0.0) throw DataError("negative discount at node " + std::to_string(b));
        });
    }
    refresh_far(*ops);
    return ops;
}

double cfl_max_dt(std::span<const double> lbar, std::span<const double> jbar, std::span<const double> c, double theta,
                  double vartheta) {
    if (lbar.size() != jbar.size() || lbar.size() != c.size()) throw ConfigError("mass arrays differ in length");
    double q = 0.0;
    for (std::size_t i = 0; i < lbar.size(); ++i) {
        q = std::max(q, (1.0 - theta) * lbar[i] + (1.0 - vartheta) * jbar[i] + c[i]);
    }
    return q > 0.0 ? 1.0 / q : kInf;
}

double cfl_max_dt(const Operators& ops, double theta, double vartheta) {
    double q = 0.0;
    for (std::size_t a = 0; a < ops.controls(); ++a) {
        for (std::size_t b = 0; b < ops.nodes(); ++b) {
            q = std::max(q, (1.0 - theta) * ops.L[a][b].diag_mass + (1.0 - vartheta) * ops.J[a][b].diag_mass +
                                ops.c[a][b]);
        }
    }
    return q > 0.0 ? 1.0 / q : kInf;
}

double default_relaxation(const Operators& ops, double theta, double vartheta, double dt) {
    double m = 0.0;
    for (std::size_t a = 0; a < ops.controls(); ++a) {
        for (std::size_t b = 0; b < ops.nodes(); ++b) {
            m = std::max(m, theta * ops.L[a][b].diag_mass + vartheta * ops.J[a][b].diag_mass);
        }
    }
    return 0.9 / (1.0 + dt * m);
}

std::vector<std::vector<double>> explicit_terms(const Operators& ops, std::span<const double> u_prev, double theta,
                                                double vartheta, Execution exec) {
    std::vector<std::vector<double>> e(ops.controls(), std::vector<double>(ops.nodes()));
    for (std::size_t a = 0; a < ops.controls(); ++a) {
        for_each_index(ops.nodes(), exec, [&](std::size_t b) {
            double v = ops.c[a][b] * u_prev[b] - ops.f[a][b];
            if (theta < 1.0) v -= (1.0 - theta) * ops.L[a][b].apply(u_prev, ops.far_L[a][b]);
            if (vartheta < 1.0) v -= (1.0 - vartheta) * ops.J[a][b].apply(u_prev, ops.far_J[a][b]);
            e[a][b] = v;
        });
    }
    return e;
}

std::vector<double> explicit_step(const Operators& ops, std::span<const double> u_prev, const SchemeConfig& cfg,
                                  std::vector<std::size_t>* active) {
    if (cfg.cfl == CflMode::enforce) {
        const double dt_max = cfl_max_dt(ops, cfg.theta, cfg.vartheta);
        if (cfg.dt > dt_max * (1.0 + 1e-12)) {
            throw StepError("dt = " + std::to_string(cfg.dt) + " violates the CFL bound " + std::to_string(dt_max));
        }
    }
    const auto e = explicit_terms(ops, u_prev, cfg.theta, cfg.vartheta, cfg.exec);
    std::vector<double> out(ops.nodes());
    if (active) active->assign(ops.nodes(), 0);
    for_each_index(ops.nodes(), cfg.exec, [&](std::size_t b) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < ops.controls(); ++a) {
            if (e[a][b] > e[best][b]) best = a;
        }
        out[b] = u_prev[b] - cfg.dt * e[best][b];
        if (active) (*active)[b] = best;
    });
    return out;
}

ImplicitProblem::ImplicitProblem(const Operators& ops_now, std::span<const double> u_prev,
                                 std::vector<std::vector<double>> explicit_part, double theta, double vartheta,
                                 double dt, Execution exec)
    : ops_(&ops_now),
      u_prev_(u_prev),
      explicit_(std::move(explicit_part)),
      theta_(theta),
      vartheta_(vartheta),
      dt_(dt),
      exec_(exec) {}

void ImplicitProblem::residual(std::span<const double> u, std::span<double> r, std::vector<std::size_t>* active) const {
    const Operators& ops = *ops_;
    if (active) active->assign(ops.nodes(), 0);
    for_each_index(ops.nodes(), exec_, [&](std::size_t b) {
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t a = 0; a < ops.controls(); ++a) {
            double v = explicit_[a][b];
            if (theta_ > 0.0) v -= theta_ * ops.L[a][b].apply(u, ops.far_L[a][b]);
            if (vartheta_ > 0.0) v -= vartheta_ * ops.J[a][b].apply(u, ops.far_J[a][b]);
            if (v > best) {
                best = v;
                arg = a;
            }
        }
        r[b] = u[b] - u_prev_[b] + dt_ * best;
        if (active) (*active)[b] = arg;
    });
}

double ImplicitProblem::rounding_floor(std::span<const double> u) const {
    const Operators& ops = *ops_;
    const double u_sup = std::max(sup_norm(u), sup_norm(u_prev_));
    double term = 0.0;
    for (std::size_t a = 0; a < ops.controls(); ++a) {
        for (std::size_t b = 0; b < ops.nodes(); ++b) {
            const double mass = theta_ * ops.L[a][b].diag_mass + vartheta_ * ops.J[a][b].diag_mass;
            term = std::max(term, std::abs(explicit_[a][b]) + 2.0 * mass * u_sup);
        }
    }
    return 64.0 * std::numeric_limits<double>::epsilon() * (2.0 * u_sup + dt_ * term);
}

void ImplicitProblem::apply_T(std::span<const double> u, std::span<double> out, double eps) const {
    std::vector<double> r(u.size());
    residual(u, r);
    for (std::size_t b = 0; b < u.size(); ++b) out[b] = u[b] - eps * r[b];
}

ImplicitResult implicit_solve(const ImplicitProblem& prob, std::vector<double> start, double eps, double tol,
                              std::size_t max_iter) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("relaxation must lie in (0,1]");
    ImplicitResult res;
    std::vector<double> r(start.size());
    res.values = std::move(start);
    tol = std::max(tol, prob.rounding_floor(res.values));
    for (;;) {
        prob.residual(res.values, r);
        res.residual = sup_norm(r);
        res.residual_history.push_back(res.residual);
        if (res.residual <= tol) return res;
        if (res.iterations >= max_iter) {
            std::string hist;
            const std::size_t from = res.residual_history.size() > 5 ? res.residual_history.size() - 5 : 0;
            for (std::size_t i = from; i < res.residual_history.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3e", res.residual_history[i]);
                hist += (i > from ? ", " : "") + std::string(buf);
            }
            char tb[32];
            std::snprintf(tb, sizeof tb, "%.3e", tol);
            throw ConvergenceError("fixed point did not reach tol " + std::string(tb) + " in " +
                                   std::to_string(max_iter) + " iterations; last residuals: " + hist);
        }
        for (std::size_t b = 0; b < r.size(); ++b) res.values[b] -= eps * r[b];
        ++res.iterations;
    }
}

std::pair<std::size_t, double> plan_steps(double horizon, const SchemeConfig& cfg, double dt_max) {
    if (cfg.theta < 0.0 || cfg.theta > 1.0 || cfg.vartheta < 0.0 || cfg.vartheta > 1.0) {
        throw ConfigError("theta and vartheta must lie in [0,1]");
    }
    if (cfg.cfl == CflMode::auto_dt) {
        double dt = cfg.dt > 0.0 ? std::min(cfg.dt, dt_max) : dt_max;
        if (!std::isfinite(dt)) throw ConfigError("auto dt needs a finite CFL bound or an explicit dt");
        const auto n = static_cast<std::size_t>(std::ceil(horizon / dt * (1.0 - 1e-12)));
        return {std::max<std::size_t>(n, 1), horizon / static_cast<double>(std::max<std::size_t>(n, 1))};
    }
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    const double steps = horizon / cfg.dt;
    const double n = std::round(steps);
    if (n < 1.0 || std::abs(steps - n) > 1e-9 * steps) {
        throw ConfigError("horizon is not an integer multiple of dt");
    }
    if (cfg.cfl == CflMode::enforce && cfg.dt > dt_max * (1.0 + 1e-12)) {
        throw StepError("dt = " + std::to_string(cfg.dt) + " violates the CFL bound " + std::to_string(dt_max));
    }
    return {static_cast<std::size_t>(n), horizon / n};
}

std::vector<double> advance(Discretization& disc, const SchemeConfig& cfg, std::span<const double> u_prev,
                            double t_prev, double dt, StepDiagnostics& diag, std::vector<std::size_t>* active,
                            double* relax_used) {
    const double t_now = t_prev + dt;
    auto prev = disc.at(t_prev);
    const double dt_max = cfl_max_dt(*prev, cfg.theta, cfg.vartheta);
    if (cfg.cfl != CflMode::off && dt > dt_max * (1.0 + 1e-12)) {
        throw StepError("t = " + std::to_string(t_prev) + ": dt = " + std::to_string(dt) +
                        " violates the CFL bound " + std::to_string(dt_max));
    }
    diag.t = t_now;
    diag.cfl_margin = std::isfinite(dt_max) ? 1.0 - dt / dt_max : 1.0;
    diag.iterations = 0;
    diag.residual = 0.0;

    const bool implicit = cfg.theta > 0.0 || cfg.vartheta > 0.0;
    if (!implicit) {
        SchemeConfig c = cfg;
        c.dt = dt;
        c.cfl = CflMode::off;
        return explicit_step(*prev, u_prev, c, active);
    }
    auto now = disc.at(t_now);
    auto e = explicit_terms(*prev, u_prev, cfg.theta, cfg.vartheta, cfg.exec);
    double implicit_mass = 0.0;
    for (std::size_t a = 0; a < now->controls(); ++a) {
        for (std::size_t b = 0; b < now->nodes(); ++b) {
            implicit_mass =
                std::max(implicit_mass, cfg.theta * now->L[a][b].diag_mass + cfg.vartheta * now->J[a][b].diag_mass);
        }
    }
    ImplicitProblem prob(*now, u_prev, std::move(e), cfg.theta, cfg.vartheta, dt, cfg.exec);
    const double eps = cfg.relax > 0.0 ? cfg.relax : 0.9 / (1.0 + dt * implicit_mass);
    if (eps * (1.0 + dt * implicit_mass) > 1.0 + 1e-12) {
        throw ConfigError("relaxation " + std::to_string(eps) + " breaks the contraction condition");
    }
    if (relax_used) *relax_used = eps;
    std::vector<double> next(u_prev.begin(), u_prev.end());
    std::vector<double> r(next.size());
    if (implicit_mass == 0.0) {
        // Nothing couples the nodes implicitly: one residual evaluation is exact.
        prob.residual(next, r);
        for (std::size_t b = 0; b < r.size(); ++b) next[b] -= r[b];
        diag.iterations = 1;
    } else {
        auto sol = implicit_solve(prob, std::move(next), eps, cfg.tol, cfg.max_iter);
        next = std::move(sol.values);
        diag.iterations = sol.iterations;
    }
    prob.residual(next, r, active);
    diag.residual = sup_norm(r);
    return next;
}

SolveResult solve(Discretization& disc, const SchemeConfig& cfg_in) {
    const ControlProblem& p = disc.problem();
    const Grid& grid = disc.grid();
    SchemeConfig cfg = cfg_in;
    auto ops0 = disc.at(0.0);
    const auto [steps, dt] = plan_steps(p.horizon, cfg, cfl_max_dt(*ops0, cfg.theta, cfg.vartheta));
    cfg.dt = dt;

    SolveResult res;
    res.dt = dt;
    res.num_steps = steps;
    std::vector<double> u = sample(grid, p.initial);
    res.g_sup = std::max(sup_norm(u), ops0->far_sup);
    if (cfg.keep_trajectory) res.trajectory.push_back(u);

    const bool implicit = cfg.theta > 0.0 || cfg.vartheta > 0.0;
    for (std::size_t n = 1; n <= steps; ++n) {
        const double t_prev = static_cast<double>(n - 1) * dt;
        const double t_now = static_cast<double>(n) * dt;
        for (double t : {t_prev, t_now}) {
            if (t == t_now && !implicit) continue;
            auto ops = disc.at(t);
            res.g_sup = std::max(res.g_sup, ops->far_sup);
            if (t != t_prev) continue;
            for (std::size_t a = 0; a < ops->controls(); ++a) {
                for (std::size_t b = 0; b < ops->nodes(); ++b) {
                    res.f_sup = std::max(res.f_sup, std::abs(ops->f[a][b]));
                    res.c_sup = std::max(res.c_sup, std::abs(ops->c[a][b]));
                }
            }
        }
        StepDiagnostics diag;
        diag.step = n;
        u = advance(disc, cfg, u, t_prev, dt, diag, &res.active, &res.relax);
        res.min_coefficient = std::min(res.min_coefficient, diag.cfl_margin);
        diag.sup_norm = sup_norm(u);
        diag.stability_bound = std::exp(res.c_sup * t_now) * (res.g_sup + t_now * res.f_sup);
        // Each implicit solve may leave up to tol of error behind.
        const double slack = 1e-12 * std::max(1.0, diag.stability_bound) +
                             (implicit ? static_cast<double>(n) * std::max(cfg.tol, diag.residual) : 0.0);
        diag.stable = diag.sup_norm <= diag.stability_bound + slack;
        res.stable = res.stable && diag.stable;
        res.steps.push_back(diag);
        if (cfg.keep_trajectory) res.trajectory.push_back(u);
    }
    res.values = std::move(u);
    return res;
}

SolveResult solve(const ControlProblem& p, const LevyKernel& kern, const Grid& grid, const SchemeConfig& cfg,
                  NonlocalConfig nl, FarfieldFn far) {
    Discretization disc(p, kern, grid, std::move(nl), std::move(far), cfg.exec);
    return solve(disc, cfg);
}

ComparisonReport discrete_comparison_check(const SolveResult& lower, const SolveResult& upper, double tol) {
    ComparisonReport rep;
    auto compare = [&](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) throw ConfigError("runs live on different grids");
        for (std::size_t i = 0; i < a.size(); ++i) rep.max_violation = std::max(rep.max_violation, a[i] - b[i]);
    };
    if (!lower.trajectory.empty() && lower.trajectory.size() == upper.trajectory.size()) {
        for (std::size_t n = 0; n < lower.trajectory.size(); ++n) compare(lower.trajectory[n], upper.trajectory[n]);
    } else {
        compare(lower.values, upper.values);
    }
    rep.max_violation = std::max(rep.max_violation, 0.0);
    rep.ordered = rep.max_violation <= tol;
    return rep;
}

}  // namespace mdq
