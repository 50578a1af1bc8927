#include "mdq/quadrature.hpp"

#include "mdq/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace mdq::quad {

namespace {

Result checked(double value, double error, const char* rule, double a, double b) {
    if (!std::isfinite(value)) {
        throw KernelError(std::string(rule) + ": non-finite integral on [" + std::to_string(a) +
                          ", " + std::to_string(b) + "]");
    }
    return {value, error};
}

}  // namespace

Result adaptive(const Integrand& f, double a, double b, double rel_tol, unsigned max_depth) {
    if (a == b) return {};
    double err = 0.0;
    double v = 0.0;
    try {
        v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth,
                                                                          rel_tol, &err);
    } catch (const std::exception& e) {
        throw KernelError(std::string("gauss_kronrod: ") + e.what());
    }
    return checked(v, err, "gauss_kronrod", a, b);
}

Result endpoint_singular(const Integrand& f, double a, double b, double rel_tol) {
    if (a == b) return {};
    // Tanh-sinh samples so close to the endpoints that a factor like |z|^(-M-gamma)
    // overflows before the compensating power of |z| is applied. The abscissa
    // weights there are far below double resolution, so such samples are dropped.
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    auto g = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : 0.0;
    };
    double err = 0.0;
    double l1 = 0.0;
    double v = 0.0;
    try {
        v = rule.integrate(g, a, b, rel_tol, &err, &l1);
    } catch (const std::exception& e) {
        throw KernelError(std::string("tanh_sinh: ") + e.what());
    }
    return checked(v, err, "tanh_sinh", a, b);
}

Result to_infinity(const Integrand& f, double a, double rel_tol) {
    thread_local boost::math::quadrature::exp_sinh<double> rule(9);
    double err = 0.0;
    double l1 = 0.0;
    double v = 0.0;
    try {
        v = rule.integrate([&](double s) { return f(a + s); }, rel_tol, &err, &l1);
    } catch (const std::exception& e) {
        throw KernelError(std::string("exp_sinh: ") + e.what());
    }
    return checked(v, err, "exp_sinh", a, a);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        if (n == 1) {
            x = 0.0;
            dp = 1.0;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

}  // namespace mdq::quad
