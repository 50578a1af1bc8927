#include "mdq/models.hpp"

#include "mdq/error.hpp"

#include <cmath>
#include <numbers>

namespace mdq {

namespace {

KernelKind kind_for(double gamma) {
    if (gamma < 0.0 || gamma >= 2.0) throw ConfigError("gamma must lie in [0,2)");
    return gamma < 1.0 ? KernelKind::singular_gamma_lt_1 : KernelKind::singular_gamma_ge_1;
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_keys(const std::map<std::string, double>& p, std::initializer_list<const char*> allowed,
                const std::string& id) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError("kernel '" + id + "' has no parameter '" + k + "'");
        if (!std::isfinite(v)) throw ConfigError("kernel parameter '" + k + "' is not finite");
    }
}

}  // namespace

LevyKernel finite_exp(double kappa, double lambda, std::size_t dim) {
    if (!(kappa >= 0.0) || !(lambda > 0.0)) throw ConfigError("finite_exp needs kappa >= 0, lambda > 0");
    LevyKernel k;
    k.dim = dim;
    k.gamma = 0.0;
    k.decay_lambda = 0.0;
    k.decay_eps = 0.5 * lambda;
    // kappa e^{-lambda r} <= K e^{-lambda r / 2} / r^M; the worst case of
    // r^M e^{-lambda r / 2} is at r = 2M / lambda.
    const double m = static_cast<double>(dim);
    const double peak = std::pow(2.0 * m / (std::numbers::e * lambda), m);
    k.bound_K = kappa * std::max(1.0, peak) + (kappa == 0.0 ? 1.0 : 0.0);
    k.kind = KernelKind::finite;
    k.zero = kappa == 0.0;
    k.density = [kappa, lambda](const Point& z) { return kappa * std::exp(-lambda * z.norm()); };
    return k;
}

LevyKernel tempered_stable(double kappa, double lambda, double gamma, std::size_t dim) {
    if (!(kappa >= 0.0) || !(lambda > 0.0)) throw ConfigError("tempered_stable needs kappa >= 0, lambda > 0");
    LevyKernel k;
    k.dim = dim;
    k.gamma = gamma;
    k.decay_lambda = 0.0;
    k.decay_eps = lambda;
    k.bound_K = kappa > 0.0 ? kappa : 1.0;
    k.kind = kind_for(gamma);
    k.zero = kappa == 0.0;
    const double power = static_cast<double>(dim) + gamma;
    k.density = [kappa, lambda, power](const Point& z) {
        const double r = z.norm();
        return kappa * std::exp(-lambda * r) / std::pow(r, power);
    };
    return k;
}

LevyKernel frac_laplace_trunc(double gamma, double radius, std::size_t dim) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("frac_laplace_trunc needs a finite radius");
    LevyKernel k;
    k.dim = dim;
    k.gamma = gamma;
    k.decay_lambda = 0.0;
    k.decay_eps = 1.0;
    k.bound_K = std::exp(radius);
    k.kind = kind_for(gamma);
    k.support_radius = radius;
    const double power = static_cast<double>(dim) + gamma;
    k.density = [radius, power](const Point& z) {
        const double r = z.norm();
        return r <= radius ? std::pow(r, -power) : 0.0;
    };
    return k;
}

LevyKernel zero_kernel(std::size_t dim) {
    LevyKernel k;
    k.dim = dim;
    k.kind = KernelKind::finite;
    k.zero = true;
    k.support_radius = 0.0;
    k.density = [](const Point&) { return 0.0; };
    return k;
}

std::vector<std::string> kernel_ids() { return {"finite_exp", "tempered_stable", "frac_laplace_trunc", "zero"}; }

LevyKernel make_kernel(const std::string& id, const std::map<std::string, double>& params, std::size_t dim) {
    if (id == "finite_exp") {
        check_keys(params, {"kappa", "lambda"}, id);
        return finite_exp(param(params, "kappa", 1.0), param(params, "lambda", 1.0), dim);
    }
    if (id == "tempered_stable") {
        check_keys(params, {"kappa", "lambda", "gamma"}, id);
        return tempered_stable(param(params, "kappa", 1.0), param(params, "lambda", 1.0),
                               param(params, "gamma", 0.5), dim);
    }
    if (id == "frac_laplace_trunc") {
        check_keys(params, {"gamma", "radius"}, id);
        return frac_laplace_trunc(param(params, "gamma", 0.5), param(params, "radius", 1.0), dim);
    }
    if (id == "zero") {
        check_keys(params, {}, id);
        return zero_kernel(dim);
    }
    throw ConfigError("unknown kernel model '" + id + "'");
}

std::function<double(const Point&)> make_initial(const std::string& name, const std::map<std::string, double>& params) {
    const double shift = param(params, "shift", 0.0);
    if (name == "cos") return [shift](const Point& x) { return std::cos(x.sum() + shift); };
    if (name == "sin") return [shift](const Point& x) { return std::sin(x.sum() + shift); };
    if (name == "zero") return [](const Point&) { return 0.0; };
    if (name == "const") {
        const double v = param(params, "value", 1.0);
        return [v](const Point&) { return v; };
    }
    if (name == "bump") {
        const double w = param(params, "width", 1.0);
        return [w, shift](const Point& x) {
            const double r2 = (x.array() - shift).square().sum() / (w * w);
            return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
        };
    }
    if (name == "put" || name == "call") {
        const double strike = param(params, "strike", 1.0);
        const bool put = name == "put";
        return [strike, put](const Point& x) {
            const double s = std::exp(x.mean());
            return put ? std::max(strike - s, 0.0) : std::max(s - strike, 0.0);
        };
    }
    if (name == "square") return [shift](const Point& x) { return (x.array() - shift).square().sum(); };
    throw ConfigError("unknown initial datum '" + name + "'");
}

ControlProblem constant_problem(const std::vector<ConstantControl>& controls, std::size_t dim_x, std::size_t dim_z,
                                double horizon, std::function<double(const Point&)> initial) {
    if (controls.empty()) throw ConfigError("a problem needs at least one control");
    if (dim_x == 0 || dim_z == 0) throw ConfigError("dimensions must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    const auto n = static_cast<Eigen::Index>(dim_x);
    const auto m = static_cast<Eigen::Index>(dim_z);
    std::vector<ConstantControl> cs = controls;
    for (auto& c : cs) {
        if (c.drift.size() == 0) c.drift = Point::Zero(n);
        if (c.drift.size() != n) throw ConfigError("drift of control '" + c.label + "' has the wrong size");
        if (c.discount < 0.0) throw ConfigError("discount of control '" + c.label + "' is negative");
    }
    if (dim_x != dim_z) {
        for (const auto& c : cs) {
            if (c.jump_scale != 0.0) throw ConfigError("eta = s z needs dim_x == dim_z");
        }
    }
    ControlProblem p;
    p.dim_x = dim_x;
    p.dim_z = dim_z;
    p.horizon = horizon;
    for (const auto& c : cs) p.controls.push_back(c.label);
    p.sigma = [cs, n](std::size_t a, double, const Point&) -> Matrix { return cs[a].sigma * Matrix::Identity(n, n); };
    p.drift = [cs](std::size_t a, double, const Point&) -> Point { return cs[a].drift; };
    p.discount = [cs](std::size_t a, double, const Point&) { return cs[a].discount; };
    p.source = [cs](std::size_t a, double, const Point&) { return cs[a].source; };
    p.jump = [cs, n, m](std::size_t a, double, const Point&, const Point& z) -> Point {
        Point out = Point::Zero(n);
        if (cs[a].jump_scale != 0.0) out += cs[a].jump_scale * z.head(std::min(n, m));
        out[0] += cs[a].jump_quad * z.squaredNorm();
        return out;
    };
    p.initial = std::move(initial);
    return p;
}

}  // namespace mdq
