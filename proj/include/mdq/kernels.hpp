#pragma once

#include "mdq/problem.hpp"
#include "mdq/types.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace mdq {

enum class TailOrder { single, double_tail };

/// Cell weights of a tail kernel along one ray, r_n = n * step.
///
/// `weights[n]` integrates the tail over [r_n, r_{n+1}]. Double-tail tables
/// additionally carry `nodal[n]`, the integral of the tail against the hat
/// function centred at r_n; these are the weights used by the second-difference
/// stencils.
struct WeightTable {
    double step = 0.0;
    std::vector<double> weights;
    std::vector<double> nodal;
    /// Envelope bound of the discarded mass beyond n_max.
    double tail_bound = 0.0;
    /// Discarded mass computed by quadrature.
    double neglected = 0.0;

    std::size_t n_max() const { return weights.empty() ? 0 : weights.size() - 1; }
    double sum() const;
};

/// Density restricted to a ray, f(r) = k(r y) r^(M-1), with its envelope data.
struct RadialDensity {
    std::function<double(double)> f;
    double gamma = 0.0;
    double bound_K = 1.0;
    double rate = 1.0;
    double support = kInf;
    bool zero = false;
};

/// Integrated tails of one ray:
///   single:  khat(r)   = int_r^inf f
///   double:  ktilde(r) = int_r^inf khat
/// Built once per (density, step); immutable afterwards.
class RayTail {
public:
    static RayTail build(RadialDensity density, double step, double trunc_tol, TailOrder order);

    TailOrder order() const { return order_; }
    const WeightTable& table() const { return table_; }
    double khat(double r) const;
    double ktilde(double r) const;
    /// int_0^inf khat (single) or int_0^inf ktilde (double).
    double mass() const { return mass_; }

private:
    /// Index of the cell containing r and the distance to its right end.
    std::size_t cell_of(double r) const;

    RadialDensity density_;
    TailOrder order_ = TailOrder::single;
    WeightTable table_;
    std::vector<double> khat_nodes_;    // khat(r_n), n = 1..n_max+1 (index 0 unused)
    std::vector<double> ktilde_nodes_;  // ktilde(r_n), n = 1..n_max+1
    double mass_ = 0.0;
};

/// One-dimensional tail kernel: the z > 0 and z < 0 rays of a density with M = 1.
class TailKernel1D {
public:
    TailKernel1D(RayTail plus, RayTail minus) : plus_(std::move(plus)), minus_(std::move(minus)) {}

    TailOrder order() const { return plus_.order(); }
    const RayTail& plus() const { return plus_; }
    const RayTail& minus() const { return minus_; }
    const WeightTable& plus_table() const { return plus_.table(); }
    const WeightTable& minus_table() const { return minus_.table(); }

    double khat(double z) const { return z > 0.0 ? plus_.khat(z) : minus_.khat(-z); }
    double ktilde(double z) const { return z > 0.0 ? plus_.ktilde(z) : minus_.ktilde(-z); }
    double mass_plus() const { return plus_.mass(); }
    double mass_minus() const { return minus_.mass(); }
    double total_mass() const { return plus_.mass() + minus_.mass(); }

private:
    RayTail plus_;
    RayTail minus_;
};

using DoubleTailKernel1D = TailKernel1D;

/// Positive quadrature on the unit sphere of R^M.
struct SphereRule {
    std::vector<Point> nodes;
    std::vector<double> weights;

    /// Uniform trapezoid rule on the circle, theta_j = 2 pi j / n.
    static SphereRule circle(std::size_t n);
    /// Checks positivity and total measure; throws ConfigError.
    void validate(std::size_t dim) const;
};

double sphere_area(std::size_t dim);

struct PolarTailKernel {
    SphereRule sphere;
    std::vector<RayTail> rays;  // one per sphere node

    double mass() const;
};

/// Single tails for kernels of kind finite or gamma < 1, M = 1.
TailKernel1D build_single_tail(const LevyKernel& kern, double dx, double trunc_tol);
/// Double tails for kernels of kind gamma in [1,2), M = 1.
DoubleTailKernel1D build_double_tail(const LevyKernel& kern, double dx, double trunc_tol);
/// Radial tails along every node of a sphere rule, M >= 2. For M = 2 pass
/// `SphereRule::circle(n)`; higher dimensions need a user rule.
PolarTailKernel build_polar_tails(const LevyKernel& kern, double dx, const SphereRule& sphere,
                                  TailOrder order, double trunc_tol);

/// Radius beyond which the envelope bounds the discarded tail mass by `tol`.
double truncation_radius(double bound_K, double rate, double support, TailOrder order, double tol);

/// int_{0<|z|<1} eta(t,x,z) k(z) dz. For M >= 2 the sphere rule is used in
/// the angular variable (circle(64) when none is given and M = 2).
Point drift_correction_bbar(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha,
                            double t, const Point& x, const SphereRule* sphere = nullptr,
                            double tol = 1e-11);

/// int d_z^2 eta(t,x,z) ktilde(z) dz, quadrature against the nodal
/// double-tail weights; d_z^2 eta by central differences.
Point drift_correction_btilde(const DoubleTailKernel1D& tails, const ControlProblem& p,
                              std::size_t alpha, double t, const Point& x);
/// Polar form: sum over sphere nodes of the radial second derivative of eta.
Point drift_correction_btilde(const PolarTailKernel& tails, const ControlProblem& p,
                              std::size_t alpha, double t, const Point& x);

}  // namespace mdq
