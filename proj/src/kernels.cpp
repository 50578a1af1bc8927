#include "mdq/kernels.hpp"

#include "mdq/error.hpp"
#include "mdq/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mdq {

namespace {

constexpr std::size_t kMaxCells = 5'000'000;

using Moments = std::array<double, 4>;  // int f u^j, j = 0..3, u = r - a

const std::vector<double>& gl_nodes() {
    static const auto nodes = [] {
        std::vector<double> x, w;
        quad::gauss_legendre(24, x, w);
        return std::pair{x, w};
    }();
    return nodes.first;
}

const std::vector<double>& gl_weights() {
    static const auto w = [] {
        std::vector<double> x, ww;
        quad::gauss_legendre(24, x, ww);
        return ww;
    }();
    return w;
}

Moments gl_moments(const std::function<double(double)>& f, double a, double lo, double hi) {
    Moments m{};
    const auto& x = gl_nodes();
    const auto& w = gl_weights();
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = mid + half * x[i];
        const double v = f(r) * w[i] * half;
        // Offset from a without forming r - a, which cancels far out.
        const double u = (lo - a) + half * (1.0 + x[i]);
        m[0] += v;
        m[1] += v * u;
        m[2] += v * u * u;
        m[3] += v * u * u * u;
    }
    return m;
}

/// Moments of a smooth integrand over a regular cell [a, b]: fixed Gauss-Legendre,
/// cross-checked against the two-half composite rule; adaptive fallback otherwise.
Moments cell_moments(const std::function<double(double)>& f, double a, double b) {
    const Moments whole = gl_moments(f, a, a, b);
    const double mid = 0.5 * (a + b);
    Moments halves = gl_moments(f, a, a, mid);
    const Moments right = gl_moments(f, a, mid, b);
    bool agree = true;
    for (std::size_t j = 0; j < 4; ++j) {
        halves[j] += right[j];
        if (std::abs(halves[j] - whole[j]) > 1e-12 * std::abs(halves[j]) + 1e-300) agree = false;
    }
    if (agree) return halves;
    Moments m{};
    for (int j = 0; j < 4; ++j) {
        m[static_cast<std::size_t>(j)] =
            quad::adaptive([&](double r) { return f(r) * std::pow(r - a, j); }, a, b, 1e-12, 10).value;
    }
    return m;
}

/// Integral of f(r) r^j over [0, b] where f(r) ~ r^(-1-gamma) at 0. For a
/// negative endpoint exponent e = j - 1 - gamma the substitution r = b s^(1/(1+e))
/// leaves a bounded integrand.
double head_moment(const std::function<double(double)>& f, double b, int j, double gamma) {
    const double e = static_cast<double>(j) - 1.0 - gamma;
    if (e <= -1.0) {
        throw KernelError("tail integral does not converge near the origin (moment " + std::to_string(j) +
                          "); the density is too singular for this tail order");
    }
    quad::Result res;
    if (e < 0.0) {
        const double m = 1.0 / (1.0 + e);
        auto g = [&](double s) {
            if (s <= 0.0) return 0.0;
            const double r = b * std::pow(s, m);
            return f(r) * std::pow(r, j) * b * m * std::pow(s, m - 1.0);
        };
        res = quad::endpoint_singular(g, 0.0, 1.0, 1e-13);
    } else {
        res = quad::endpoint_singular([&](double r) { return f(r) * std::pow(r, j); }, 0.0, b, 1e-13);
    }
    if (!std::isfinite(res.value) || res.error > 1e-6 * std::abs(res.value) + 1e-14) {
        throw KernelError("tail integral near the origin (moment " + std::to_string(j) +
                          ") did not reach its tolerance");
    }
    return res.value;
}

/// int_a^end f(r) (r - a)^j / j! over the remainder of the support.
double beyond(const RadialDensity& d, double a, int j) {
    if (d.zero || a >= d.support) return 0.0;
    const double fact = j == 2 ? 0.5 : 1.0;
    auto g = [&](double r) { return d.f(r) * std::pow(r - a, j) * fact; };
    if (std::isfinite(d.support)) return quad::adaptive(g, a, d.support, 1e-12).value;
    return quad::to_infinity(g, a, 1e-12).value;
}

}  // namespace

double WeightTable::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double truncation_radius(double bound_K, double rate, double support, TailOrder order, double tol) {
    if (std::isfinite(support)) return support;
    if (!(rate > 0.0)) throw ConfigError("kernel without exponential decay needs a finite support radius");
    if (!(tol > 0.0)) throw ConfigError("truncation tolerance must be positive");
    const double p = order == TailOrder::single ? 2.0 : 3.0;
    const double r = std::log(bound_K / (std::pow(rate, p) * tol)) / rate;
    return std::max(r, 1.0);
}

RayTail RayTail::build(RadialDensity density, double step, double trunc_tol, TailOrder order) {
    if (!(step > 0.0)) throw ConfigError("tail step must be positive");
    RayTail t;
    t.density_ = std::move(density);
    t.order_ = order;
    const RadialDensity& d = t.density_;

    const double radius = truncation_radius(d.bound_K, d.rate, d.support, order, trunc_tol);
    const double cells = std::ceil(radius / step - 1e-12);
    if (cells > static_cast<double>(kMaxCells)) {
        throw ConfigError("truncation tolerance needs more than " + std::to_string(kMaxCells) +
                          " cells at this step");
    }
    const std::size_t n_max = std::max<std::size_t>(static_cast<std::size_t>(cells), 1);
    const double h = step;
    WeightTable& tab = t.table_;
    tab.step = h;
    if (std::isfinite(d.support)) {
        tab.tail_bound = 0.0;
    } else {
        const double p = order == TailOrder::single ? 2.0 : 3.0;
        const double rr = static_cast<double>(n_max + 1) * h;
        tab.tail_bound = d.bound_K * std::exp(-d.rate * rr) / std::pow(d.rate, p);
    }

    t.khat_nodes_.assign(n_max + 2, 0.0);
    t.ktilde_nodes_.assign(n_max + 2, 0.0);
    tab.weights.assign(n_max + 1, 0.0);
    if (order == TailOrder::double_tail) tab.nodal.assign(n_max + 1, 0.0);
    if (d.zero) return t;

    std::vector<Moments> mom(n_max + 1);
    for (std::size_t m = 1; m <= n_max; ++m) {
        const double a = static_cast<double>(m) * h;
        if (a >= d.support) break;
        mom[m] = cell_moments(d.f, a, std::min(a + h, d.support));
    }
    const double head_end = std::min(h, d.support);
    if (order == TailOrder::single) {
        mom[0][1] = head_moment(d.f, head_end, 1, d.gamma);
    } else {
        mom[0][2] = head_moment(d.f, head_end, 2, d.gamma);
        mom[0][3] = head_moment(d.f, head_end, 3, d.gamma);
    }

    const double r_end = static_cast<double>(n_max + 1) * h;
    const double tail0 = beyond(d, r_end, 0);
    const double tail1 = beyond(d, r_end, 1);
    auto& kh = t.khat_nodes_;
    auto& kt = t.ktilde_nodes_;
    kh[n_max + 1] = tail0;
    kt[n_max + 1] = tail1;
    for (std::size_t n = n_max; n >= 1; --n) kh[n] = kh[n + 1] + mom[n][0];

    std::vector<double> w(n_max + 1, 0.0);  // single-tail cell weights
    for (std::size_t m = n_max + 1; m-- > 0;) {
        if (m == 0 && order == TailOrder::double_tail) break;
        w[m] = h * kh[m + 1] + mom[m][1];
    }
    for (std::size_t n = n_max; n >= 1; --n) kt[n] = kt[n + 1] + w[n];

    if (order == TailOrder::single) {
        // k-hat is monotone, so any increase here is round-off.
        for (std::size_t n = 1; n <= n_max; ++n) {
            if (w[n] > w[n - 1]) {
                if (w[n] - w[n - 1] > 1e-10 * w[n - 1]) {
                    throw KernelError("single-tail weights are not non-increasing at n = " + std::to_string(n));
                }
                w[n] = w[n - 1];
            }
        }
        tab.weights = w;
        tab.neglected = tail1;
        t.mass_ = tab.sum() + tail1;
        return t;
    }

    for (std::size_t m = 0; m <= n_max; ++m) {
        tab.weights[m] = h * kt[m + 1] + 0.5 * h * h * kh[m + 1] + 0.5 * mom[m][2];
    }
    std::vector<double> fall(n_max + 1), rise(n_max + 1);
    for (std::size_t m = 0; m <= n_max; ++m) {
        fall[m] = 0.5 * h * kt[m + 1] + h * h / 3.0 * kh[m + 1] + 0.5 * mom[m][2] - mom[m][3] / (6.0 * h);
        rise[m] = 0.5 * h * kt[m + 1] + h * h / 6.0 * kh[m + 1] + mom[m][3] / (6.0 * h);
    }
    tab.nodal[0] = fall[0];
    for (std::size_t n = 1; n <= n_max; ++n) tab.nodal[n] = rise[n - 1] + fall[n];
    tab.neglected = beyond(d, r_end, 2);
    t.mass_ = tab.sum() + tab.neglected;
    return t;
}

std::size_t RayTail::cell_of(double r) const {
    return static_cast<std::size_t>(std::floor(r / table_.step));
}

double RayTail::khat(double r) const {
    if (density_.zero) return 0.0;
    if (!(r > 0.0)) return kInf;
    const std::size_t m = cell_of(r);
    if (m + 1 >= khat_nodes_.size()) return beyond(density_, r, 0);
    const double right = static_cast<double>(m + 1) * table_.step;
    const double top = std::min(right, density_.support);
    const double part = r < top ? quad::adaptive(density_.f, r, top, 1e-12).value : 0.0;
    return khat_nodes_[m + 1] + part;
}

double RayTail::ktilde(double r) const {
    if (density_.zero) return 0.0;
    if (!(r > 0.0)) return kInf;
    const std::size_t m = cell_of(r);
    if (m + 1 >= ktilde_nodes_.size()) return beyond(density_, r, 1);
    const double right = static_cast<double>(m + 1) * table_.step;
    const double top = std::min(right, density_.support);
    const double part =
        r < top ? quad::adaptive([&](double s) { return (s - r) * density_.f(s); }, r, top, 1e-12).value : 0.0;
    return ktilde_nodes_[m + 1] + (right - r) * khat_nodes_[m + 1] + part;
}

SphereRule SphereRule::circle(std::size_t n) {
    if (n == 0) throw ConfigError("circle rule needs at least one node");
    SphereRule rule;
    for (std::size_t j = 0; j < n; ++j) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        Point y(2);
        y << std::cos(th), std::sin(th);
        rule.nodes.push_back(y);
        rule.weights.push_back(2.0 * std::numbers::pi / static_cast<double>(n));
    }
    return rule;
}

double sphere_area(std::size_t dim) {
    const double m = static_cast<double>(dim);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

void SphereRule::validate(std::size_t dim) const {
    if (nodes.empty() || nodes.size() != weights.size()) throw ConfigError("sphere rule is empty or ragged");
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(weights[i] > 0.0)) throw ConfigError("sphere rule weight " + std::to_string(i) + " is not positive");
        if (static_cast<std::size_t>(nodes[i].size()) != dim || std::abs(nodes[i].norm() - 1.0) > 1e-10) {
            throw ConfigError("sphere rule node " + std::to_string(i) + " is not a unit vector of the right size");
        }
        total += weights[i];
    }
    if (std::abs(total - sphere_area(dim)) > 1e-8 * sphere_area(dim)) {
        throw ConfigError("sphere rule weights do not sum to the surface measure");
    }
}

double PolarTailKernel::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rays.size(); ++i) m += sphere.weights[i] * rays[i].mass();
    return m;
}

namespace {

RadialDensity ray_density(const LevyKernel& kern, Point direction) {
    RadialDensity d;
    d.gamma = kern.gamma;
    d.bound_K = kern.bound_K;
    d.rate = kern.decay_rate();
    d.support = kern.support_radius;
    d.zero = kern.zero;
    const double power = static_cast<double>(kern.dim) - 1.0;
    d.f = [density = kern.density, y = std::move(direction), power](double r) {
        const Point z = r * y;
        return density(z) * (power == 0.0 ? 1.0 : std::pow(r, power));
    };
    return d;
}

TailKernel1D build_1d(const LevyKernel& kern, double dx, double tol, TailOrder order) {
    if (kern.dim != 1) throw ConfigError("one-dimensional tail kernels need M = 1");
    return TailKernel1D(RayTail::build(ray_density(kern, scalar_point(1.0)), dx, tol, order),
                        RayTail::build(ray_density(kern, scalar_point(-1.0)), dx, tol, order));
}

}  // namespace

TailKernel1D build_single_tail(const LevyKernel& kern, double dx, double trunc_tol) {
    if (kern.kind == KernelKind::singular_gamma_ge_1) {
        throw ConfigError("single tails need a finite kernel or gamma < 1");
    }
    return build_1d(kern, dx, trunc_tol, TailOrder::single);
}

DoubleTailKernel1D build_double_tail(const LevyKernel& kern, double dx, double trunc_tol) {
    if (kern.kind != KernelKind::singular_gamma_ge_1) throw ConfigError("double tails need gamma in [1,2)");
    return build_1d(kern, dx, trunc_tol, TailOrder::double_tail);
}

PolarTailKernel build_polar_tails(const LevyKernel& kern, double dx, const SphereRule& sphere,
                                  TailOrder order, double trunc_tol) {
    if (kern.dim < 2) throw ConfigError("polar tails need M >= 2");
    const bool wants_double = kern.kind == KernelKind::singular_gamma_ge_1;
    if (wants_double != (order == TailOrder::double_tail)) {
        throw ConfigError("tail order does not match the kernel kind " + to_string(kern.kind));
    }
    sphere.validate(kern.dim);
    PolarTailKernel out;
    out.sphere = sphere;
    for (const auto& y : sphere.nodes) out.rays.push_back(RayTail::build(ray_density(kern, y), dx, trunc_tol, order));
    return out;
}

Point drift_correction_bbar(const LevyKernel& kern, const ControlProblem& p, std::size_t alpha, double t,
                            const Point& x, const SphereRule* sphere, double tol) {
    const auto n = static_cast<Eigen::Index>(p.dim_x);
    Point out = Point::Zero(n);
    if (kern.zero) return out;
    if (kern.kind == KernelKind::singular_gamma_ge_1) throw ConfigError("bbar is undefined for gamma >= 1");
    const double top = std::min(1.0, kern.support_radius);

    std::vector<Point> dirs;
    std::vector<double> wts;
    if (kern.dim == 1) {
        dirs = {scalar_point(1.0), scalar_point(-1.0)};
        wts = {1.0, 1.0};
    } else {
        SphereRule fallback;
        if (sphere == nullptr) {
            if (kern.dim != 2) throw ConfigError("bbar for M > 2 needs a sphere rule");
            fallback = SphereRule::circle(64);
            sphere = &fallback;
        }
        dirs = sphere->nodes;
        wts = sphere->weights;
    }
    const double power = static_cast<double>(kern.dim) - 1.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        for (Eigen::Index i = 0; i < n; ++i) {
            auto g = [&](double r) {
                const Point z = r * dirs[d];
                return p.jump(alpha, t, x, z)[i] * kern(z) * std::pow(r, power);
            };
            const auto res = quad::endpoint_singular(g, 0.0, top, tol);
            out[i] += wts[d] * res.value;
        }
    }
    return out;
}

namespace {

Point second_derivative_along(const ControlProblem& p, std::size_t alpha, double t, const Point& x,
                              const Point& dir, double r) {
    const double h = 1e-4 * std::max(1.0, std::abs(r));
    const Point ep = p.jump(alpha, t, x, Point((r + h) * dir));
    const Point e0 = p.jump(alpha, t, x, Point(r * dir));
    const Point em = p.jump(alpha, t, x, Point((r - h) * dir));
    return (ep - 2.0 * e0 + em) / (h * h);
}

void accumulate_ray(Point& out, const RayTail& ray, double weight, const ControlProblem& p, std::size_t alpha,
                    double t, const Point& x, const Point& dir) {
    const auto& tab = ray.table();
    for (std::size_t n = 0; n < tab.nodal.size(); ++n) {
        if (tab.nodal[n] == 0.0) continue;
        out += weight * tab.nodal[n] * second_derivative_along(p, alpha, t, x, dir, static_cast<double>(n) * tab.step);
    }
}

}  // namespace

Point drift_correction_btilde(const DoubleTailKernel1D& tails, const ControlProblem& p, std::size_t alpha,
                              double t, const Point& x) {
    if (tails.order() != TailOrder::double_tail) throw ConfigError("btilde needs double tails");
    Point out = Point::Zero(static_cast<Eigen::Index>(p.dim_x));
    accumulate_ray(out, tails.plus(), 1.0, p, alpha, t, x, scalar_point(1.0));
    accumulate_ray(out, tails.minus(), 1.0, p, alpha, t, x, scalar_point(-1.0));
    return out;
}

Point drift_correction_btilde(const PolarTailKernel& tails, const ControlProblem& p, std::size_t alpha,
                              double t, const Point& x) {
    Point out = Point::Zero(static_cast<Eigen::Index>(p.dim_x));
    for (std::size_t i = 0; i < tails.rays.size(); ++i) {
        if (tails.rays[i].order() != TailOrder::double_tail) throw ConfigError("btilde needs double tails");
        accumulate_ray(out, tails.rays[i], tails.sphere.weights[i], p, alpha, t, x, tails.sphere.nodes[i]);
    }
    return out;
}

}  // namespace mdq
