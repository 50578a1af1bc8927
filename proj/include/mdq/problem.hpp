#pragma once

#include "mdq/types.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mdq {

/// Coefficients of a finite-horizon Bellman problem with jumps. Every
/// per-control callable receives the control index first; all callables
/// must be pure so they can be evaluated concurrently.
struct ControlProblem {
    std::vector<std::string> controls;
    std::size_t dim_x = 1;
    std::size_t dim_z = 1;
    double horizon = 1.0;

    std::function<Matrix(std::size_t, double, const Point&)> sigma;   // N x P
    std::function<Point(std::size_t, double, const Point&)> drift;
    std::function<double(std::size_t, double, const Point&)> discount;
    std::function<double(std::size_t, double, const Point&)> source;
    std::function<Point(std::size_t, double, const Point&, const Point&)> jump;
    std::function<double(const Point&)> initial;

    /// False when no coefficient depends on t; stencils are then assembled once.
    bool time_dependent = false;
    /// Only the source depends on t; stencils are reused and f is re-evaluated.
    bool time_dependent_source = false;

    std::size_t num_controls() const { return controls.size(); }

    /// a = sigma sigma^T / 2.
    Matrix diffusion(std::size_t alpha, double t, const Point& x) const {
        const Matrix s = sigma(alpha, t, x);
        return 0.5 * s * s.transpose();
    }
};

enum class KernelKind { finite, singular_gamma_lt_1, singular_gamma_ge_1 };

std::string to_string(KernelKind kind);

/// Levy measure with density k(z) and the envelope constants
/// k(z) <= K exp(-(Lambda+eps)|z|) / |z|^(M+gamma).
struct LevyKernel {
    std::function<double(const Point&)> density;
    std::size_t dim = 1;
    double gamma = 0.0;
    double decay_lambda = 0.0;
    double decay_eps = 1.0;
    double bound_K = 1.0;
    KernelKind kind = KernelKind::finite;
    /// Density vanishes for |z| beyond this radius.
    double support_radius = kInf;
    /// Density is identically zero (lets builders skip quadrature).
    bool zero = false;

    double operator()(const Point& z) const { return zero ? 0.0 : density(z); }
    double operator()(double z) const { return zero ? 0.0 : density(scalar_point(z)); }

    /// Exponential rate of the envelope, Lambda + eps.
    double decay_rate() const { return decay_lambda + decay_eps; }
    double envelope(const Point& z) const;
};

/// Probe points and caps for assumption falsification.
struct SamplingPlan {
    std::vector<double> times{0.0};
    std::vector<Point> xs;
    std::vector<Point> zs;
    /// Finite-difference increment for derivative estimates in z.
    double fd_step = 1e-4;
    /// Per-check caps; checks without an entry use `default_cap`.
    std::map<std::string, double> caps;
    double default_cap = kInf;
    /// Inner radii used for the finite-measure divergence probe.
    std::vector<double> finite_mass_radii{1e-2, 1e-4, 1e-6};
};

struct CheckResult {
    std::string name;
    double estimate = 0.0;
    double cap = 0.0;
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
    const CheckResult& find(const std::string& name) const;
};

/// Estimates sup-norms and Lipschitz/Holder quotients of the data at the
/// probe points and compares them with the caps. Only falsifies.
ValidationReport validate_assumptions(const ControlProblem& p, const LevyKernel& kern,
                                      const SamplingPlan& samples);

}  // namespace mdq
