#include "mdq/acceptance.hpp"

#include "mdq/error.hpp"

#include <cmath>
#include <numbers>

namespace mdq {

std::vector<NamedKernel> builtin_kernels(std::size_t dim) {
    if (dim == 1) {
        return {
            {"finite_exp", finite_exp(1.0, 1.0)},
            {"tempered_stable_g0", tempered_stable(1.0, 1.0, 0.0)},
            {"tempered_stable_g0.5", tempered_stable(1.0, 1.0, 0.5)},
            {"tempered_stable_g1.5", tempered_stable(1.0, 1.0, 1.5)},
            {"frac_laplace_trunc_g0.5", frac_laplace_trunc(0.5, 2.0)},
            {"frac_laplace_trunc_g1.5", frac_laplace_trunc(1.5, 2.0)},
            {"zero", zero_kernel(1)},
        };
    }
    if (dim == 2) {
        return {
            {"finite_exp_2d", finite_exp(1.0, 1.0, 2)},
            {"tempered_stable_g0.5_2d", tempered_stable(1.0, 1.0, 0.5, 2)},
            {"tempered_stable_g1.5_2d", tempered_stable(1.0, 1.0, 1.5, 2)},
        };
    }
    throw ConfigError("built-in kernels exist for M = 1 and M = 2 only");
}

namespace {

Point vec(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

ConstantControl control(std::string label, double sigma, Point drift, double discount, double source,
                        double jump_scale = 1.0, double jump_quad = 0.0) {
    ConstantControl c;
    c.label = std::move(label);
    c.sigma = sigma;
    c.drift = std::move(drift);
    c.discount = discount;
    c.source = source;
    c.jump_scale = jump_scale;
    c.jump_quad = jump_quad;
    return c;
}

SchemeConfig scheme(double theta, double vartheta, double dt_cap) {
    SchemeConfig s;
    s.theta = theta;
    s.vartheta = vartheta;
    s.dt = dt_cap;
    s.cfl = CflMode::auto_dt;
    s.tol = 1e-12;
    return s;
}

}  // namespace

std::vector<BuiltinRun> builtin_runs() {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<BuiltinRun> runs;
    runs.push_back({"heat_explicit",
                    constant_problem({control("a0", 0.5, vec({0.0}), 0.2, 0.1)}, 1, 1, 0.5, make_initial("cos")),
                    zero_kernel(1), Grid::periodic(1, 0.0, two_pi, 64), scheme(0.0, 0.0, 0.05), {}});
    runs.push_back({"finite_explicit",
                    constant_problem({control("a0", 0.3, vec({0.2}), 0.1, 0.5),
                                      control("a1", 0.1, vec({-0.3}), 0.3, 0.2, 0.8, 0.2)},
                                     1, 1, 0.5, make_initial("put", {{"strike", 1.0}})),
                    finite_exp(1.0, 1.0), Grid(1.0 / 16.0, {-4.0}, {4.0}), scheme(0.0, 0.0, 0.05), {}});
    runs.push_back({"ts0_explicit",
                    constant_problem({control("a0", 0.2, vec({0.1}), 0.0, 0.3),
                                      control("a1", 0.4, vec({0.0}), 0.1, 0.0, 1.2)},
                                     1, 1, 0.5, make_initial("bump", {{"width", 1.5}})),
                    tempered_stable(1.0, 1.0, 0.0), Grid(1.0 / 16.0, {-3.0}, {3.0}), scheme(0.0, 0.0, 0.05), {}});
    runs.push_back({"ts05_implicit",
                    constant_problem({control("up", 0.3, vec({0.4}), 0.1, 0.2),
                                      control("down", 0.3, vec({-0.4}), 0.1, -0.1, 1.0, 0.25)},
                                     1, 1, 0.5, make_initial("bump", {{"width", 1.0}})),
                    tempered_stable(1.0, 1.0, 0.5), Grid(1.0 / 16.0, {-3.0}, {3.0}), scheme(1.0, 0.5, 0.05), {}});
    runs.push_back({"ts15_crank_nicolson",
                    constant_problem({control("a0", 0.3, vec({0.0}), 0.0, 0.0)}, 1, 1, 0.4, make_initial("cos")),
                    tempered_stable(0.5, 1.0, 1.5), Grid::periodic(1, 0.0, two_pi, 64), scheme(0.5, 0.5, 0.04),
                    {}});
    runs.push_back({"ts15_implicit_quadratic_jump",
                    constant_problem({control("a0", 0.2, vec({0.1}), 0.2, 0.1, 1.0, 0.3)}, 1, 1, 0.3,
                                     make_initial("put", {{"strike", 1.0}})),
                    tempered_stable(1.0, 2.0, 1.5), Grid(1.0 / 16.0, {-3.0}, {3.0}), scheme(0.5, 1.0, 0.05), {}});
    runs.push_back({"frac_laplace_implicit",
                    constant_problem({control("a0", 0.0, vec({0.0}), 0.05, 0.0)}, 1, 1, 0.3,
                                     make_initial("bump", {{"width", 1.0}})),
                    frac_laplace_trunc(1.5, 2.0), Grid(1.0 / 16.0, {-3.0}, {3.0}), scheme(1.0, 1.0, 0.05), {}});
    runs.push_back({"ts05_2d_explicit",
                    constant_problem({control("a0", 0.3, vec({0.1, -0.1}), 0.1, 0.1)}, 2, 2, 0.1,
                                     make_initial("cos")),
                    tempered_stable(1.0, 1.0, 0.5, 2), Grid::periodic(2, 0.0, two_pi, 16), scheme(0.0, 0.0, 0.05),
                    {}});
    return runs;
}

std::vector<std::string> builtin_run_names() {
    std::vector<std::string> names;
    for (const auto& r : builtin_runs()) names.push_back(r.name);
    return names;
}

BuiltinRun builtin_run(const std::string& name) {
    for (auto& r : builtin_runs()) {
        if (r.name == name) return r;
    }
    throw ConfigError("unknown built-in run '" + name + "'");
}

SwitchingSetup builtin_switching() {
    ControlProblem base = constant_problem(
        {control("east", 0.3, vec({0.4}), 0.0, 0.0), control("west", 0.3, vec({-0.4}), 0.0, 0.0)}, 1, 1, 1.0,
        make_initial("sin"));
    base.source = [](std::size_t a, double, const Point& x) { return a == 0 ? std::cos(x[0]) : -std::cos(x[0]); };
    SwitchingProblem sys{std::move(base), {{0}, {1}}, 0.4};
    SchemeConfig s = scheme(0.0, 0.0, 0.05);
    return {std::move(sys), tempered_stable(0.5, 1.0, 0.5), Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, 128), s};
}

}  // namespace mdq
