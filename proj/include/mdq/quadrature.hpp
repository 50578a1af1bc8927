#pragma once

#include <functional>
#include <vector>

namespace mdq::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (31-point) on a finite or semi-infinite interval.
/// Throws KernelError when the estimate is not finite.
Result adaptive(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                unsigned max_depth = 12);

/// Double-exponential rule for integrands with an integrable endpoint
/// singularity at `a` (or `b`). Throws KernelError on a non-finite result.
Result endpoint_singular(const Integrand& f, double a, double b, double rel_tol = 1e-12);

/// Integral over [a, +inf) with exponential-sinh substitution.
Result to_infinity(const Integrand& f, double a, double rel_tol = 1e-12);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace mdq::quad
