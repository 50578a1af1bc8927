#include "mdq/error.hpp"
#include "mdq/models.hpp"
#include "mdq/stepper.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mdq;

namespace {

ControlProblem heat(double sigma, double horizon) {
    ConstantControl c;
    c.sigma = sigma;
    return constant_problem({c}, 1, 1, horizon, make_initial("cos"));
}

double heat_error(std::size_t n, double theta) {
    const double sigma = 0.5;
    const ControlProblem p = heat(sigma, 0.5);
    const Grid g = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, n);
    SchemeConfig s;
    s.theta = theta;
    s.cfl = CflMode::auto_dt;
    s.dt = theta > 0.0 ? 0.25 * g.dx() : 0.0;
    const SolveResult r = solve(p, zero_kernel(), g, s);
    // u_t = (sigma^2 / 2) u_xx backwards: U(T) = exp(-sigma^2 T / 2) cos x.
    const double decay = std::exp(-0.5 * sigma * sigma * 0.5);
    double err = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b) err = std::max(err, std::abs(r.values[b] - decay * std::cos(g.node(b)[0])));
    return err;
}

}  // namespace

TEST_CASE("stepper: explicit heat equation converges") {
    const double e1 = heat_error(32, 0.0);
    const double e2 = heat_error(64, 0.0);
    CHECK(std::log2(e1 / e2) >= 0.9);
}

TEST_CASE("stepper: fully implicit heat equation converges") {
    const double e1 = heat_error(32, 1.0);
    const double e2 = heat_error(64, 1.0);
    CHECK(std::log2(e1 / e2) >= 0.9);
}

TEST_CASE("stepper: constants are preserved") {
    ControlProblem p = heat(0.4, 0.3);
    p.initial = [](const Point&) { return 2.5; };
    const Grid g(0.125, {-2.0}, {2.0});
    SchemeConfig s;
    s.theta = 0.5;
    s.vartheta = 0.5;
    s.dt = 0.05;
    s.cfl = CflMode::auto_dt;
    const SolveResult r = solve(p, tempered_stable(1.0, 1.0, 0.5), g, s);
    for (double v : r.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("stepper: CFL enforcement and step planning") {
    const ControlProblem p = heat(1.0, 1.0);
    const Grid g = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, 64);
    Discretization d(p, zero_kernel(), g);
    const double dt_max = cfl_max_dt(*d.at(0.0), 0.0, 0.0);
    CHECK(dt_max == doctest::Approx(g.dx() * g.dx()));
    CHECK(std::isinf(cfl_max_dt(*d.at(0.0), 1.0, 1.0)));
    SchemeConfig s;
    s.dt = 0.5;
    CHECK_THROWS_AS(solve(d, s), StepError);
    s.dt = 0.3;
    s.theta = 1.0;
    CHECK_THROWS_AS(plan_steps(1.0, s, dt_max), ConfigError);
    s.cfl = CflMode::auto_dt;
    const auto [steps, dt] = plan_steps(1.0, s, 0.07);
    CHECK(steps == 15);
    CHECK(dt == doctest::Approx(1.0 / 15.0));
}

TEST_CASE("stepper: negative discount is rejected") {
    ConstantControl c;
    c.discount = -0.1;
    CHECK_THROWS_AS(constant_problem({c}, 1, 1, 1.0, make_initial("cos")), ConfigError);
    ControlProblem p = constant_problem({ConstantControl{}}, 1, 1, 1.0, make_initial("cos"));
    p.discount = [](std::size_t, double, const Point& x) { return x[0] > 0.5 ? -0.1 : 0.0; };
    const Grid g(0.25, {-1.0}, {1.0});
    Discretization d(p, zero_kernel(), g);
    CHECK_THROWS_AS(d.at(0.0), DataError);
}

TEST_CASE("stepper: explicit step picks the maximizing control") {
    ConstantControl a, b;
    a.source = 1.0;
    b.source = -1.0;
    const ControlProblem p = constant_problem({a, b}, 1, 1, 0.1, make_initial("zero"));
    const Grid g(0.25, {-1.0}, {1.0});
    Discretization d(p, zero_kernel(), g);
    SchemeConfig s;
    s.dt = 0.1;
    std::vector<std::size_t> active;
    const std::vector<double> u0(g.size(), 0.0);
    const auto u1 = explicit_step(*d.at(0.0), u0, s, &active);
    // The sup of -f picks f = -1, so U drops by dt.
    for (std::size_t b2 = 0; b2 < g.size(); ++b2) {
        CHECK(u1[b2] == doctest::Approx(-0.1));
        CHECK(active[b2] == 1);
    }
}

TEST_CASE("stepper: implicit solve failure reports its residuals") {
    const ControlProblem p = heat(0.5, 0.1);
    const Grid g = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, 32);
    SchemeConfig s;
    s.theta = 1.0;
    s.dt = 0.1;
    s.max_iter = 2;
    s.tol = 1e-14;
    CHECK_THROWS_AS(solve(p, zero_kernel(), g, s), ConvergenceError);
}

TEST_CASE("property: ordered data give ordered solutions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Grid g(0.125, {-2.0}, {2.0});
    for (int i = 0; i < 10; ++i) {
        ConstantControl c;
        c.sigma = 0.5 * u(rng);
        c.drift = scalar_point(u(rng) - 0.5);
        c.discount = 0.2 * u(rng);
        c.jump_quad = 0.2 * u(rng);
        ControlProblem lo = constant_problem({c}, 1, 1, 0.2, make_initial("bump", {{"width", 1.0}}));
        ControlProblem hi = lo;
        const double lift = u(rng);
        const auto g0 = lo.initial;
        hi.initial = [g0, lift](const Point& x) { return g0(x) + 0.1 * lift * (1.0 + std::cos(x[0])); };
        SchemeConfig s;
        s.theta = (rng() % 2) * 1.0;
        s.vartheta = (rng() % 3) * 0.5;
        s.dt = 0.05;
        s.cfl = CflMode::auto_dt;
        s.keep_trajectory = true;
        const LevyKernel k = tempered_stable(1.0, 1.0, (rng() % 3) * 0.7);
        const auto a = solve(lo, k, g, s);
        const auto b = solve(hi, k, g, s);
        CHECK(discrete_comparison_check(a, b).ordered);
    }
}

TEST_CASE("property: the relaxed implicit map contracts") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ControlProblem p = heat(0.6, 0.5);
    const Grid g(0.125, {-2.0}, {2.0});
    Discretization d(p, tempered_stable(1.0, 1.0, 1.5), g);
    const auto ops = d.at(0.0);
    const double dt = 0.05;
    const std::vector<double> u0 = sample(g, p.initial);
    const ImplicitProblem prob(*ops, u0, explicit_terms(*ops, u0, 1.0, 1.0), 1.0, 1.0, dt);
    const double eps = default_relaxation(*ops, 1.0, 1.0, dt);
    std::vector<double> a(g.size()), b(g.size()), ta(g.size()), tb(g.size());
    for (int i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            a[j] = u(rng);
            b[j] = u(rng);
        }
        prob.apply_T(a, ta, eps);
        prob.apply_T(b, tb, eps);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            num = std::max(num, std::abs(ta[j] - tb[j]));
            den = std::max(den, std::abs(a[j] - b[j]));
        }
        CHECK(num <= (1.0 - eps) * den + 1e-12);
    }
}

TEST_CASE("stepper: serial and parallel paths agree") {
    const ControlProblem p = heat(0.3, 0.2);
    const Grid g = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, 64);
    SchemeConfig s;
    s.theta = 0.5;
    s.vartheta = 0.5;
    s.dt = 0.05;
    s.cfl = CflMode::auto_dt;
    s.exec = Execution::serial;
    const auto a = solve(p, tempered_stable(1.0, 1.0, 0.5), g, s);
    s.exec = Execution::parallel;
    const auto b = solve(p, tempered_stable(1.0, 1.0, 0.5), g, s);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}
