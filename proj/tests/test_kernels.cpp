#include "mdq/error.hpp"
#include "mdq/kernels.hpp"
#include "mdq/models.hpp"
#include "mdq/nonlocal.hpp"
#include "mdq/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mdq;

namespace {

void check_single(const WeightTable& t) {
    REQUIRE_FALSE(t.weights.empty());
    for (std::size_t n = 0; n < t.weights.size(); ++n) {
        CHECK(t.weights[n] >= 0.0);
        if (n > 0) CHECK(t.weights[n] <= t.weights[n - 1] * (1.0 + 1e-12) + 1e-300);
    }
}

void check_double(const WeightTable& t) {
    REQUIRE_FALSE(t.weights.empty());
    const double scale = t.weights.front();
    for (std::size_t n = 0; n < t.weights.size(); ++n) CHECK(t.weights[n] >= 0.0);
    for (std::size_t n = 1; n + 1 < t.weights.size(); ++n) {
        CHECK(t.weights[n + 1] - 2.0 * t.weights[n] + t.weights[n - 1] >= -1e-13 * scale);
    }
    for (std::size_t n = 2; n + 1 < t.nodal.size(); ++n) {
        CHECK(t.nodal[n + 1] - 2.0 * t.nodal[n] + t.nodal[n - 1] >= -1e-13 * t.nodal.front());
    }
}

}  // namespace

TEST_CASE("quadrature: Gauss-Legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    quad::gauss_legendre(6, x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 10);
    CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("quadrature: singular endpoint and infinite range") {
    const auto a = quad::endpoint_singular([](double r) { return std::pow(r, -0.5); }, 0.0, 1.0);
    CHECK(a.value == doctest::Approx(2.0).epsilon(1e-10));
    const auto b = quad::to_infinity([](double r) { return std::exp(-r); }, 1.0);
    CHECK(b.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("models: registry ids and parameter checks") {
    CHECK(kernel_ids().size() >= 3);
    const LevyKernel k = make_kernel("tempered_stable", {{"kappa", 2.0}, {"gamma", 1.5}});
    CHECK(k.kind == KernelKind::singular_gamma_ge_1);
    CHECK(k(1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK_THROWS_AS(make_kernel("tempered_stable", {{"sigma", 1.0}}), ConfigError);
    CHECK_THROWS_AS(make_kernel("nope", {}), ConfigError);
    CHECK(make_kernel("frac_laplace_trunc", {{"gamma", 0.5}, {"radius", 2.0}})(3.0) == 0.0);
}

TEST_CASE("models: envelope bounds the density") {
    for (const LevyKernel& k : {finite_exp(1.0, 2.0), tempered_stable(1.0, 1.0, 0.5), tempered_stable(0.5, 2.0, 1.5),
                                frac_laplace_trunc(1.2, 2.0)}) {
        for (double z : {-3.0, -0.5, -1e-3, 1e-3, 0.2, 1.0, 1.9}) {
            CHECK(k(z) <= k.envelope(scalar_point(z)) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("kernels: single-tail tables are non-negative and non-increasing") {
    for (const LevyKernel& k : {finite_exp(1.0, 1.0), tempered_stable(1.0, 1.0, 0.0), tempered_stable(1.0, 1.0, 0.5),
                                frac_laplace_trunc(0.5, 2.0)}) {
        for (double dx : {0.25, 0.0625}) {
            const TailKernel1D t = build_single_tail(k, dx, 1e-10);
            check_single(t.plus_table());
            check_single(t.minus_table());
            CHECK(t.plus_table().neglected <= 1e-10 + 1e-14);
            CHECK(t.plus_table().sum() == doctest::Approx(t.mass_plus()).epsilon(1e-8));
        }
    }
}

TEST_CASE("kernels: single-tail mass is the first absolute moment") {
    // int_0^inf khat = int_0^inf z k(z) dz = kappa / lambda^2 for the exponential kernel.
    const TailKernel1D t = build_single_tail(finite_exp(1.5, 2.0), 0.05, 1e-12);
    CHECK(t.mass_plus() == doctest::Approx(1.5 / 4.0).epsilon(1e-9));
    CHECK(t.khat(0.3) == doctest::Approx(1.5 / 2.0 * std::exp(-0.6)).epsilon(1e-9));
}

TEST_CASE("kernels: double-tail tables are convex") {
    for (const LevyKernel& k : {tempered_stable(1.0, 1.0, 1.5), tempered_stable(1.0, 3.0, 1.0),
                                frac_laplace_trunc(1.5, 2.0)}) {
        for (double dx : {0.25, 0.0625}) {
            const DoubleTailKernel1D t = build_double_tail(k, dx, 1e-10);
            check_double(t.plus_table());
            check_double(t.minus_table());
            CHECK(t.plus_table().neglected <= 1e-10 + 1e-14);
        }
    }
}

TEST_CASE("kernels: polar tails inherit the radial shape") {
    const SphereRule s = SphereRule::circle(32);
    double total = 0.0;
    for (double w : s.weights) {
        CHECK(w >= 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(2.0 * std::numbers::pi));
    const PolarTailKernel single = build_polar_tails(tempered_stable(1.0, 1.0, 0.5, 2), 0.125, s, TailOrder::single,
                                                     1e-10);
    for (const auto& ray : single.rays) check_single(ray.table());
    const PolarTailKernel dbl = build_polar_tails(tempered_stable(1.0, 1.0, 1.5, 2), 0.125, s,
                                                  TailOrder::double_tail, 1e-10);
    for (const auto& ray : dbl.rays) check_double(ray.table());
}

TEST_CASE("nonlocal: default dz is the multiple of dx nearest sqrt(dx)") {
    CHECK(default_dz(0.0625) == doctest::Approx(0.25));
    CHECK(default_dz(1.0 / 128.0) == doctest::Approx(11.0 / 128.0));
    CHECK(default_dz(0.5) == doctest::Approx(0.5));
}

TEST_CASE("nonlocal: regimes follow the kernel kind") {
    const Grid g(0.125, {-1.0}, {1.0});
    CHECK(NonlocalOperator(finite_exp(1.0, 1.0), g).regime() == Regime::finite);
    CHECK(NonlocalOperator(tempered_stable(1.0, 1.0, 0.5), g).regime() == Regime::single_tail);
    CHECK(NonlocalOperator(tempered_stable(1.0, 1.0, 1.5), g).regime() == Regime::double_tail);
}

TEST_CASE("property: random tempered-stable tables keep their shape") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 12; ++i) {
        const double kappa = 0.2 + 2.0 * u(rng);
        const double lambda = 0.3 + 3.0 * u(rng);
        const double gamma = 1.95 * u(rng);
        const double dx = std::ldexp(1.0, -2 - static_cast<int>(rng() % 4));
        const LevyKernel k = tempered_stable(kappa, lambda, gamma);
        CAPTURE(kappa);
        CAPTURE(lambda);
        CAPTURE(gamma);
        CAPTURE(dx);
        if (gamma < 1.0) {
            const TailKernel1D t = build_single_tail(k, dx, 1e-10);
            check_single(t.plus_table());
        } else {
            const DoubleTailKernel1D t = build_double_tail(k, default_dz(dx), 1e-10);
            check_double(t.plus_table());
        }
    }
}
