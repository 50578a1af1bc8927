#include "mdq/error.hpp"
#include "mdq/harness.hpp"
#include "mdq/lattice.hpp"
#include "mdq/local.hpp"
#include "mdq/models.hpp"
#include "mdq/nonlocal.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mdq;

namespace {

double apply_to(const Stencil& s, const Grid& g, const std::function<double(const Point&)>& f) {
    const std::vector<double> u = sample(g, f);
    return s.apply(u, [&](double, const Point& x) { return f(x); }, 0.0);
}

void check_monotone(const Stencil& s) {
    double sum = 0.0;
    for (const auto& nw : s.nodes) {
        CHECK(nw.weight >= 0.0);
        CHECK(nw.node != s.center);
        sum += nw.weight;
    }
    for (const auto& f : s.far) {
        CHECK(f.weight >= 0.0);
        sum += f.weight;
    }
    CHECK(sum == doctest::Approx(s.diag_mass).epsilon(1e-12));
}

}  // namespace

TEST_CASE("lattice: interpolation weights form a partition of unity") {
    const Grid g(0.25, {-1.0, -1.0}, {1.0, 1.0});
    const Location loc = g.locate((Point(2) << 0.1, -0.37).finished());
    double s = 0.0;
    for (const auto& nw : loc.weights) {
        CHECK(nw.weight >= 0.0);
        s += nw.weight;
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(g.locate(g.node(7)).weights.size() == 1);
}

TEST_CASE("lattice: grid function evaluation is total") {
    const Grid g(0.5, {-1.0}, {1.0});
    const GridFunction u(g, {1.0, 2.0, 3.0, 4.0, 5.0}, [](double, const Point& x) { return 10.0 * x[0]; });
    CHECK(u(scalar_point(0.25)) == doctest::Approx(3.5));
    CHECK(u(scalar_point(3.0)) == doctest::Approx(30.0));
    const Grid p = Grid::periodic(1, 0.0, 1.0, 4);
    const GridFunction w(p, {0.0, 1.0, 2.0, 3.0});
    CHECK(w(scalar_point(1.25)) == doctest::Approx(1.0));
}

TEST_CASE("local: Kushner stencil reproduces second-order polynomials") {
    const Grid g(0.1, {-1.0, -1.0}, {1.0, 1.0});
    Matrix a(2, 2);
    a << 0.5, 0.2, 0.2, 0.3;
    const Point b = Point::Zero(2);
    const std::size_t node = g.size() / 2;
    const Stencil s = build_L(a, b, g, node);
    check_monotone(s);
    CHECK(apply_to(s, g, [](const Point& x) { return x[0] * x[1]; }) == doctest::Approx(0.4));
    CHECK(apply_to(s, g, [](const Point& x) { return x[0] * x[0]; }) == doctest::Approx(1.0));
    CHECK(apply_to(s, g, [](const Point&) { return 7.0; }) == doctest::Approx(0.0));
}

TEST_CASE("local: upwind drift is exact on linear functions") {
    const Grid g(0.1, {-1.0}, {1.0});
    const Stencil s = build_L(Matrix::Zero(1, 1), scalar_point(-0.7), g, 10);
    check_monotone(s);
    CHECK(apply_to(s, g, [](const Point& x) { return 2.0 * x[0]; }) == doctest::Approx(-1.4));
}

TEST_CASE("local: lost diagonal dominance raises MonotonicityError") {
    const Grid g(0.1, {-1.0, -1.0}, {1.0, 1.0});
    Matrix a(2, 2);
    a << 0.1, 0.3, 0.3, 0.9;
    CHECK_THROWS_AS(build_L(a, Point::Zero(2), g, g.size() / 2), MonotonicityError);
}

TEST_CASE("nonlocal: every regime yields monotone stencils that kill constants") {
    ConstantControl c;
    c.jump_quad = 0.2;
    const ControlProblem p = constant_problem({c}, 1, 1, 1.0, make_initial("cos"));
    const Grid g(0.0625, {-2.0}, {2.0});
    for (const LevyKernel& k : {finite_exp(1.0, 1.0), tempered_stable(1.0, 1.0, 0.5), tempered_stable(1.0, 1.0, 1.5)}) {
        const NonlocalOperator op(k, g);
        for (std::size_t node : {std::size_t{0}, g.size() / 2, g.size() - 1}) {
            const Stencil s = op.build(p, 0, 0.0, node);
            check_monotone(s);
            CHECK(apply_to(s, g, [](const Point&) { return 3.0; }) == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("nonlocal: finite-measure stencil approximates the oracle") {
    const LevyKernel k = finite_exp(1.0, 1.0);
    const ControlProblem p = constant_problem({ConstantControl{}}, 1, 1, 1.0, make_initial("cos"));
    const TestFunction phi = cos_sum(1);
    // int (cos z - 1) e^{-|z|} dz = 2 (1/2 - 1) = -1.
    CHECK(oracle_J(k, p, 0, 0.0, scalar_point(0.0), phi) == doctest::Approx(-1.0).epsilon(1e-10));
    double prev = kInf;
    for (std::size_t n : {64, 256}) {
        const Grid g = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, n);
        const NonlocalOperator op(k, g);
        const double err = std::abs(apply_to(op.build(p, 0, 0.0, 0), g, phi.value) + 1.0);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 5e-3);
}

TEST_CASE("property: random controls give monotone stencils") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<LevyKernel> kernels{finite_exp(1.0, 1.0), tempered_stable(1.0, 1.0, 0.0),
                                          tempered_stable(1.0, 1.0, 0.5), tempered_stable(1.0, 1.0, 1.5),
                                          frac_laplace_trunc(1.5, 1.5)};
    for (int i = 0; i < 20; ++i) {
        ConstantControl c;
        c.sigma = u(rng);
        c.drift = scalar_point(2.0 * u(rng) - 1.0);
        c.jump_scale = 0.2 + 1.5 * u(rng);
        c.jump_quad = 0.5 * u(rng);
        const ControlProblem p = constant_problem({c}, 1, 1, 1.0, make_initial("cos"));
        const double dx = std::ldexp(1.0, -3 - static_cast<int>(rng() % 3));
        const Grid g(dx, {-1.0}, {1.0});
        const LevyKernel& k = kernels[rng() % kernels.size()];
        const NonlocalOperator op(k, g);
        const std::size_t node = rng() % g.size();
        check_monotone(op.build(p, 0, 0.0, node));
        check_monotone(build_L(p, 0, 0.0, g, node));
    }
}
