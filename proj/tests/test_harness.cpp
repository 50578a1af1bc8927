#include "mdq/error.hpp"
#include "mdq/harness.hpp"
#include "mdq/models.hpp"
#include "mdq/problem.hpp"
#include "mdq/rates.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace mdq;

namespace {

ControlProblem plain(std::size_t dim = 1) {
    ConstantControl c;
    c.drift = Point::Zero(static_cast<Eigen::Index>(dim));
    return constant_problem({c}, dim, dim, 1.0, make_initial("cos"));
}

/// int (cos z - 1) kappa e^{-lambda|z|} |z|^{-1-gamma} dz on the real line.
double tempered_cos(double kappa, double lambda, double gamma) {
    if (gamma == 0.0) return -kappa * std::log1p(1.0 / (lambda * lambda));
    return 2.0 * kappa * std::tgamma(-gamma) *
           (std::pow(lambda * lambda + 1.0, 0.5 * gamma) * std::cos(gamma * std::atan(1.0 / lambda)) -
            std::pow(lambda, gamma));
}

double fit(const std::vector<std::pair<double, double>>& pts) { return estimate_order(pts).slope; }

}  // namespace

TEST_CASE("oracle: tempered-stable closed forms") {
    const ControlProblem p = plain();
    const TestFunction phi = cos_sum(1);
    for (double gamma : {0.0, 0.3, 0.5, 1.2, 1.5, 1.8}) {
        CAPTURE(gamma);
        const double got = oracle_J(tempered_stable(0.7, 1.3, gamma), p, 0, 0.0, scalar_point(0.0), phi);
        CHECK(got == doctest::Approx(tempered_cos(0.7, 1.3, gamma)).epsilon(1e-9));
    }
}

TEST_CASE("oracle: odd part of the compensated integral") {
    // At x = pi/2, cos(x + z) - cos x + z sin x = z - sin z on |z| <= 1; the
    // symmetric kernel cancels the odd part and leaves -int_{|z|>1} sin(z) k = 0.
    const ControlProblem p = plain();
    const double v = oracle_J(tempered_stable(1.0, 1.0, 0.5), p, 0, 0.0, scalar_point(0.5 * std::numbers::pi),
                              cos_sum(1));
    CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("oracle: exponential kernel in two dimensions") {
    // Radial symmetry: int (cos(z1 + z2) - 1) k dz = int (cos(sqrt2 r cos th) - 1) k.
    const ControlProblem p = plain(2);
    const LevyKernel k = finite_exp(1.0, 1.0, 2);
    const double got = oracle_J(k, p, 0, 0.0, Point::Zero(2), cos_sum(2));
    // 2 pi int_0^inf (J0(sqrt2 r) - 1) e^{-r} r dr = 2 pi (1/(1+2)^{3/2} - 1).
    CHECK(got == doctest::Approx(2.0 * std::numbers::pi * (std::pow(3.0, -1.5) - 1.0)).epsilon(1e-8));
}

TEST_CASE("oracle: exact local operator") {
    ConstantControl c;
    c.sigma = 0.5;
    c.drift = scalar_point(0.3);
    const ControlProblem p = constant_problem({c}, 1, 1, 1.0, make_initial("cos"));
    const double x = 0.4;
    CHECK(exact_L(p, 0, 0.0, scalar_point(x), cos_sum(1)) ==
          doctest::Approx(-0.125 * std::cos(x) - 0.3 * std::sin(x)));
}

TEST_CASE("rates: least-squares order") {
    CHECK(fit({{0.1, 0.1}, {0.05, 0.05}, {0.025, 0.025}}) == doctest::Approx(1.0));
    CHECK(fit({{0.1, 0.3}, {0.05, 0.3}, {0.025, 0.3}}) == doctest::Approx(0.0));
    CHECK(fit({{0.1, 0.09}, {0.05, 0.047}, {0.025, 0.0243}}) == doctest::Approx(0.944).epsilon(2e-3));
    const OrderFit f = estimate_order(std::vector<std::pair<double, double>>{{0.1, 0.01}, {0.05, 0.0025}, {0.025, 0.000625}});
    REQUIRE(f.pair_slopes.size() == 2);
    CHECK(f.pair_slopes[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(fit({{0.1, 0.1}, {0.05, 0.05}}), DataError);
    CHECK_THROWS_AS(fit({{0.1, 0.1}, {0.05, 0.0}, {0.025, 0.01}}), DataError);
}

TEST_CASE("harness: manufactured heat run converges at first order or better") {
    ManufacturedConfig cfg;
    cfg.control.sigma = 0.5;
    cfg.control.drift = scalar_point(0.0);
    cfg.levels = {32, 64, 128};
    const RateReport rep = rate_report(cfg);
    CHECK(rep.strictly_decreasing);
    CHECK(rep.fit.slope >= 0.9);
    CHECK(rep.guaranteed_order == doctest::Approx(0.2));
}

TEST_CASE("harness: manufactured source makes the exact solution a fixed point") {
    ManufacturedConfig cfg;
    cfg.control.sigma = 0.3;
    cfg.control.drift = scalar_point(0.2);
    cfg.control.discount = 0.1;
    cfg.kernel = tempered_stable(1.0, 1.0, 0.5);
    const ControlProblem p = manufactured_problem(cfg);
    CHECK(p.time_dependent_source);
    // u_t = L u + J u - c u + f with u = e^{-t} cos x at x = 0.3, t = 0.2.
    const double t = 0.2;
    const double x = 0.3;
    const TestFunction phi = cos_sum(1);
    const double lhs = -std::exp(-t) * std::cos(x);
    const double rhs = std::exp(-t) * (exact_L(p, 0, t, scalar_point(x), phi) +
                                       oracle_J(cfg.kernel, p, 0, t, scalar_point(x), phi) - 0.1 * std::cos(x)) +
                       p.source(0, t, scalar_point(x));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("harness: rate report CSV layout") {
    RateReport rep;
    rep.rows.push_back({0, 32, 0.1, 0.01, 0.0, 10, 1e-2, std::nan("")});
    rep.rows.push_back({1, 64, 0.05, 0.005, 0.0, 20, 5e-3, 1.0});
    rep.guaranteed_order = 0.2;
    const std::string csv = rep.csv();
    CHECK(csv.rfind("level,dx,dt,dz,sup_error,pair_order\n", 0) == 0);
    CHECK(csv.find("guarantee,,,,,0.200000") != std::string::npos);
    CHECK(csv.find(",1.000000\n") != std::string::npos);
}

TEST_CASE("problem: assumption probes accept smooth data and flag violations") {
    const ControlProblem p = plain();
    SamplingPlan plan;
    plan.xs = {scalar_point(-1.0), scalar_point(0.0), scalar_point(1.0)};
    plan.zs = {scalar_point(-0.5), scalar_point(0.1), scalar_point(2.0)};
    CHECK(validate_assumptions(p, tempered_stable(1.0, 1.0, 0.5), plan).all_passed());
    ControlProblem bad = p;
    bad.discount = [](std::size_t, double, const Point&) { return -1.0; };
    CHECK_FALSE(validate_assumptions(bad, tempered_stable(1.0, 1.0, 0.5), plan).all_passed());
}
