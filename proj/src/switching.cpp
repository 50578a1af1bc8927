#include "mdq/switching.hpp"

#include "mdq/error.hpp"
#include "mdq/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace mdq {

void SwitchingProblem::validate() const {
    if (!(switch_cost > 0.0)) throw ConfigError("switching cost must be positive");
    if (partition.empty()) throw ConfigError("switching system needs at least one component");
    std::vector<bool> seen(base.num_controls(), false);
    for (std::size_t i = 0; i < partition.size(); ++i) {
        if (partition[i].empty()) throw ConfigError("component " + std::to_string(i) + " has no controls");
        for (std::size_t a : partition[i]) {
            if (a >= seen.size()) throw ConfigError("control index " + std::to_string(a) + " out of range");
            seen[a] = true;
        }
    }
    for (std::size_t a = 0; a < seen.size(); ++a) {
        if (!seen[a]) throw ConfigError("control '" + base.controls[a] + "' is in no component");
    }
}

ControlProblem restrict_controls(const ControlProblem& p, const std::vector<std::size_t>& subset) {
    ControlProblem q = p;
    q.controls.clear();
    for (std::size_t a : subset) q.controls.push_back(p.controls.at(a));
    auto map = std::make_shared<const std::vector<std::size_t>>(subset);
    q.sigma = [f = p.sigma, map](std::size_t a, double t, const Point& x) { return f((*map)[a], t, x); };
    q.drift = [f = p.drift, map](std::size_t a, double t, const Point& x) { return f((*map)[a], t, x); };
    q.discount = [f = p.discount, map](std::size_t a, double t, const Point& x) { return f((*map)[a], t, x); };
    q.source = [f = p.source, map](std::size_t a, double t, const Point& x) { return f((*map)[a], t, x); };
    q.jump = [f = p.jump, map](std::size_t a, double t, const Point& x, const Point& z) {
        return f((*map)[a], t, x, z);
    };
    return q;
}

SwitchingResult solve_switching(const SwitchingProblem& sp, const LevyKernel& kern, const Grid& grid,
                                const SchemeConfig& cfg_in, NonlocalConfig nl, FarfieldFn far) {
    sp.validate();
    const std::size_t m = sp.components();
    std::vector<ControlProblem> parts;
    parts.reserve(m);
    for (const auto& subset : sp.partition) parts.push_back(restrict_controls(sp.base, subset));
    std::vector<std::unique_ptr<Discretization>> discs;
    double dt_max = kInf;
    for (const auto& q : parts) {
        discs.push_back(std::make_unique<Discretization>(q, kern, grid, nl, far, cfg_in.exec));
        dt_max = std::min(dt_max, cfl_max_dt(*discs.back()->at(0.0), cfg_in.theta, cfg_in.vartheta));
    }
    SchemeConfig cfg = cfg_in;
    const auto [steps, dt] = plan_steps(sp.base.horizon, cfg, dt_max);
    cfg.dt = dt;

    SwitchingResult res;
    res.dt = dt;
    res.num_steps = steps;
    const std::size_t nn = grid.size();
    std::vector<std::vector<double>> v(m, sample(grid, sp.base.initial));
    if (cfg.keep_trajectory) res.trajectory.push_back(v);
    const double k = sp.switch_cost;

    std::vector<std::size_t> hits(nn);
    for (std::size_t n = 1; n <= steps; ++n) {
        const double t_prev = static_cast<double>(n - 1) * dt;
        std::vector<std::vector<double>> pre(m);
        for (std::size_t i = 0; i < m; ++i) {
            StepDiagnostics diag;
            pre[i] = advance(*discs[i], cfg, v[i], t_prev, dt, diag);
        }
        std::vector<double> spread(nn, 0.0);
        for_each_index(nn, cfg.exec, [&](std::size_t b) {
            hits[b] = 0;
            double lo = kInf;
            double hi = -kInf;
            for (std::size_t i = 0; i < m; ++i) {
                double obstacle = kInf;
                for (std::size_t j = 0; j < m; ++j) {
                    if (j != i) obstacle = std::min(obstacle, pre[j][b] + k);
                }
                if (obstacle < pre[i][b]) {
                    v[i][b] = obstacle;
                    ++hits[b];
                } else {
                    v[i][b] = pre[i][b];
                }
                lo = std::min(lo, v[i][b]);
                hi = std::max(hi, v[i][b]);
            }
            spread[b] = hi - lo;
        });
        for (std::size_t b = 0; b < nn; ++b) {
            res.projections += hits[b];
            res.max_spread = std::max(res.max_spread, spread[b]);
        }
        if (cfg.keep_trajectory) res.trajectory.push_back(v);
    }
    res.values = std::move(v);
    return res;
}

GapStudy switching_gap_study(const SwitchingProblem& sp, const std::vector<double>& costs,
                             const std::vector<double>& scalar, const LevyKernel& kern, const Grid& grid,
                             const SchemeConfig& cfg, NonlocalConfig nl, FarfieldFn far) {
    if (costs.empty()) throw ConfigError("gap study needs at least one switching cost");
    if (scalar.size() != grid.size()) throw ConfigError("scalar solution does not match the grid");
    GapStudy study;
    std::vector<std::pair<double, double>> fit;
    bool all_positive = true;
    for (double k : costs) {
        SwitchingProblem s = sp;
        s.switch_cost = k;
        const auto r = solve_switching(s, kern, grid, cfg, nl, far);
        GapRow row;
        row.k = k;
        row.min_diff = kInf;
        row.max_spread = r.max_spread;
        for (const auto& vi : r.values) {
            for (std::size_t b = 0; b < vi.size(); ++b) {
                const double d = vi[b] - scalar[b];
                row.gap = std::max(row.gap, std::abs(d));
                row.min_diff = std::min(row.min_diff, d);
            }
        }
        if (!study.rows.empty()) {
            const GapRow& prev = study.rows.back();
            if (k < prev.k && row.gap > prev.gap + 1e-12) study.non_increasing = false;
            if (k > prev.k && row.gap < prev.gap - 1e-12) study.non_increasing = false;
        }
        if (!(row.gap > 0.0)) all_positive = false;
        fit.emplace_back(k, row.gap);
        study.rows.push_back(row);
    }
    if (all_positive && fit.size() >= 3) {
        study.exponent = estimate_order(fit).slope;
    } else {
        study.exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return study;
}

}  // namespace mdq
