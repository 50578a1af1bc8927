#pragma once

#include "mdq/models.hpp"
#include "mdq/rates.hpp"
#include "mdq/stepper.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace mdq {

/// Smooth test function with analytic derivatives.
struct TestFunction {
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;
    std::function<Matrix(const Point&)> hessian;
    /// sup |phi|, used to bound the far tail; infinity when unknown.
    double bound = kInf;
};

/// phi(x) = cos(shift + sum_i x_i).
TestFunction cos_sum(std::size_t dim, double shift = 0.0);

/// J^alpha[phi](t, x) by quadrature. Near the origin the compensated
/// integrand is evaluated through the integral form of the Taylor remainder,
/// so no cancellation occurs; |z| <= 1 is split into dyadic shells toward 0
/// and |z| > 1 into dyadic shells outward. M <= 2. Throws OracleError when
/// the tolerance cannot be certified.
double oracle_J(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha, double t, const Point& x,
                const TestFunction& phi, double tol = 1e-10);

/// tr(a D^2 phi) + b . D phi.
double exact_L(const ControlProblem& p, std::size_t alpha, double t, const Point& x, const TestFunction& phi);

/// Single-control problem on [0, 2pi)^N with source chosen so that
/// u(t, x) = exp(-t) cos(sum x_i) solves it. The jump must not depend on x.
struct ManufacturedConfig {
    ConstantControl control;
    LevyKernel kernel = zero_kernel();
    std::size_t dim = 1;
    double horizon = 0.5;
    SchemeConfig scheme;
    /// dt = dt_per_dx * dx, capped by the CFL bound; 0 takes the CFL bound itself.
    double dt_per_dx = 0.0;
    std::vector<std::size_t> levels{32, 64, 128};
    NonlocalConfig nonlocal;
};

struct LevelError {
    std::size_t level = 0;
    std::size_t nodes = 0;
    double dx = 0.0;
    double dt = 0.0;
    double dz = 0.0;
    std::size_t steps = 0;
    double sup_error = 0.0;
    double pair_order = 0.0;  // NaN on the first level
};

ControlProblem manufactured_problem(const ManufacturedConfig& cfg);

std::vector<LevelError> manufactured_run(const ManufacturedConfig& cfg);

struct RateReport {
    std::vector<LevelError> rows;
    OrderFit fit;
    /// Worst-case spatial exponent guaranteed for this regime.
    double guaranteed_order = 0.0;
    bool strictly_decreasing = true;

    std::string csv() const;
};

/// Guaranteed exponent in dx: 1/5 below gamma = 1, 1/10 from there on.
double guaranteed_order(const LevyKernel& kern);

RateReport rate_report(const ManufacturedConfig& cfg);

}  // namespace mdq
