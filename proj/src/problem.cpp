#include "mdq/problem.hpp"

#include "mdq/error.hpp"
#include "mdq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <type_traits>

namespace mdq {

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::finite: return "finite";
        case KernelKind::singular_gamma_lt_1: return "singular_gamma_lt_1";
        case KernelKind::singular_gamma_ge_1: return "singular_gamma_ge_1";
    }
    return "unknown";
}

double LevyKernel::envelope(const Point& z) const {
    const double r = z.norm();
    return bound_K * std::exp(-decay_rate() * r) /
           std::pow(r, static_cast<double>(dim) + gamma);
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult& ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw ConfigError("no validation check named '" + name + "'");
}

namespace {

std::string describe(double t, const Point& x) {
    std::ostringstream os;
    os << "t=" << t << ", x=(";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ")";
    return os.str();
}

template <class F>
auto probe(const char* what, double t, const Point& x, F&& f) {
    try {
        auto v = f();
        bool finite = true;
        if constexpr (std::is_arithmetic_v<decltype(v)>) {
            finite = std::isfinite(v);
        } else {
            finite = v.allFinite();
        }
        if (!finite) throw DataError("non-finite value");
        return v;
    } catch (const std::exception& e) {
        throw DataError(std::string("coefficient '") + what + "' failed at " + describe(t, x) +
                        ": " + e.what());
    }
}

double norm_of(double v) { return std::abs(v); }
double norm_of(const Eigen::MatrixXd& m) { return m.norm(); }
double norm_of(const Eigen::VectorXd& v) { return v.norm(); }

struct Sample {
    double t;
    Point x;
};

class Validator {
public:
    Validator(const ControlProblem& p, const LevyKernel& k, const SamplingPlan& s)
        : p_(p), k_(k), s_(s) {
        for (double t : s_.times) {
            for (const auto& x : s_.xs) samples_.push_back({t, x});
        }
    }

    void add(const std::string& name, double estimate, std::string detail = {}) {
        const auto it = s_.caps.find(name);
        const double cap = it == s_.caps.end() ? s_.default_cap : it->second;
        report_.checks.push_back({name, estimate, cap, estimate <= cap, std::move(detail)});
    }

    /// |w|_1 over the (t, x) probe set for a per-control coefficient.
    template <class Eval>
    double holder_norm(const char* what, Eval&& eval) {
        double sup = 0.0;
        double lip = 0.0;
        for (std::size_t a = 0; a < p_.num_controls(); ++a) {
            std::vector<decltype(eval(a, 0.0, Point()))> vals;
            for (const auto& smp : samples_) {
                vals.push_back(probe(what, smp.t, smp.x, [&] { return eval(a, smp.t, smp.x); }));
                sup = std::max(sup, norm_of(vals.back()));
            }
            for (std::size_t i = 0; i < samples_.size(); ++i) {
                for (std::size_t j = i + 1; j < samples_.size(); ++j) {
                    const double d = std::sqrt(std::abs(samples_[i].t - samples_[j].t)) +
                                     (samples_[i].x - samples_[j].x).norm();
                    if (d > 0.0) lip = std::max(lip, norm_of(std::decay_t<decltype(vals[i])>(vals[i] - vals[j])) / d);
                }
            }
        }
        return sup + lip;
    }

    ValidationReport run() {
        check_data();
        check_jump();
        check_kernel();
        return std::move(report_);
    }

private:
    void check_data() {
        {
            double sup = 0.0;
            double lip = 0.0;
            std::vector<double> vals;
            for (const auto& x : s_.xs) {
                vals.push_back(probe("initial", 0.0, x, [&] { return p_.initial(x); }));
                sup = std::max(sup, std::abs(vals.back()));
            }
            for (std::size_t i = 0; i < s_.xs.size(); ++i)
                for (std::size_t j = i + 1; j < s_.xs.size(); ++j) {
                    const double d = (s_.xs[i] - s_.xs[j]).norm();
                    if (d > 0.0) lip = std::max(lip, std::abs(vals[i] - vals[j]) / d);
                }
            add("|g|_1", sup + lip);
        }
        add("|sigma|_1", holder_norm("sigma", [&](std::size_t a, double t, const Point& x) {
                return Matrix(p_.sigma(a, t, x));
            }));
        add("|b|_1", holder_norm("drift", [&](std::size_t a, double t, const Point& x) {
                return Point(p_.drift(a, t, x));
            }));
        add("|c|_1", holder_norm("discount", [&](std::size_t a, double t, const Point& x) {
                return p_.discount(a, t, x);
            }));
        add("|f|_1", holder_norm("source", [&](std::size_t a, double t, const Point& x) {
                return p_.source(a, t, x);
            }));

        double min_c = kInf;
        for (std::size_t a = 0; a < p_.num_controls(); ++a)
            for (const auto& smp : samples_)
                min_c = std::min(min_c, p_.discount(a, smp.t, smp.x));
        CheckResult c{"discount_nonneg", min_c, 0.0, min_c >= 0.0, "estimate is min c"};
        report_.checks.push_back(c);
    }

    Point eval_jump(std::size_t a, double t, const Point& x, const Point& z) {
        return probe("jump", t, x, [&] { return Point(p_.jump(a, t, x, z)); });
    }

    void check_jump() {
        const double lam = k_.decay_lambda;
        const Point origin = Point::Zero(static_cast<Eigen::Index>(p_.dim_z));
        double at_origin = 0.0;
        double growth = 0.0;
        double lip_x = 0.0;
        double lip_z = 0.0;
        double dz1 = 0.0;
        double dz2 = 0.0;
        const double h = s_.fd_step;
        for (std::size_t a = 0; a < p_.num_controls(); ++a) {
            for (const auto& smp : samples_) {
                at_origin = std::max(at_origin, eval_jump(a, smp.t, smp.x, origin).norm());
            }
            for (const auto& z : s_.zs) {
                const double r = z.norm();
                if (r == 0.0) continue;
                const double w = std::exp(-lam * r);
                const double scale = std::min(r, 1.0);
                std::vector<Point> vals;
                for (const auto& smp : samples_) {
                    vals.push_back(eval_jump(a, smp.t, smp.x, z));
                    growth = std::max(growth, w * vals.back().norm() / scale);
                    // Derivatives along each z axis by central differences.
                    for (Eigen::Index d = 0; d < z.size(); ++d) {
                        Point zp = z, zm = z;
                        zp[d] += h;
                        zm[d] -= h;
                        const Point ep = eval_jump(a, smp.t, smp.x, zp);
                        const Point em = eval_jump(a, smp.t, smp.x, zm);
                        dz1 = std::max(dz1, w * (ep - em).norm() / (2.0 * h));
                        dz2 = std::max(dz2, w * (ep - 2.0 * vals.back() + em).norm() / (h * h));
                    }
                }
                for (std::size_t i = 0; i < samples_.size(); ++i)
                    for (std::size_t j = i + 1; j < samples_.size(); ++j) {
                        const double d = std::sqrt(std::abs(samples_[i].t - samples_[j].t)) +
                                         (samples_[i].x - samples_[j].x).norm();
                        if (d > 0.0) lip_x = std::max(lip_x, w * (vals[i] - vals[j]).norm() / d / scale);
                    }
            }
            for (const auto& smp : samples_) {
                for (std::size_t i = 0; i < s_.zs.size(); ++i)
                    for (std::size_t j = i + 1; j < s_.zs.size(); ++j) {
                        const Point& zi = s_.zs[i];
                        const Point& zj = s_.zs[j];
                        const double d = (zi - zj).norm();
                        if (d == 0.0) continue;
                        const Point vi = std::exp(-lam * zi.norm()) * eval_jump(a, smp.t, smp.x, zi);
                        const Point vj = std::exp(-lam * zj.norm()) * eval_jump(a, smp.t, smp.x, zj);
                        lip_z = std::max(lip_z, (vi - vj).norm() / d);
                    }
            }
        }
        report_.checks.push_back({"jump_origin", at_origin, 1e-12, at_origin <= 1e-12,
                                  "|eta(t,x,0)| must vanish"});
        add("jump_growth", growth, "sup e^{-Lambda|z|}|eta| / (|z| ^ 1)");
        add("jump_lipschitz_x", lip_x, "sup_z e^{-Lambda|z|} Lip_(t,x) eta / (|z| ^ 1)");
        add("jump_lipschitz_z", lip_z, "Lip_z of e^{-Lambda|z|} eta");
        add("jump_dz", dz1, "sup e^{-Lambda|z|}|D_z eta| (central differences)");
        add("jump_dzz", dz2, "sup e^{-Lambda|z|}|D_z^2 eta| (central differences)");
    }

    double mass_between(double inner, double outer) const {
        if (k_.zero) return 0.0;
        if (k_.dim == 1) {
            auto f = [&](double z) { return k_(z) + k_(-z); };
            return quad::adaptive(f, inner, outer, 1e-10).value;
        }
        if (k_.dim == 2) {
            constexpr int dirs = 64;
            double total = 0.0;
            for (int j = 0; j < dirs; ++j) {
                const double th = 2.0 * std::numbers::pi * j / dirs;
                Point y(2);
                y << std::cos(th), std::sin(th);
                auto f = [&](double r) { return k_(Point(r * y)) * r; };
                total += quad::adaptive(f, inner, outer, 1e-10).value * 2.0 * std::numbers::pi / dirs;
            }
            return total;
        }
        return std::nan("");
    }

    void check_kernel() {
        double ratio = 0.0;
        for (const auto& z : s_.zs) {
            if (z.norm() == 0.0) continue;
            const double v = probe("density", 0.0, z, [&] { return k_(z); });
            if (v < 0.0) throw DataError("density is negative at a probe point");
            ratio = std::max(ratio, v / k_.envelope(z));
        }
        report_.checks.push_back({"envelope", ratio, 1.0, ratio <= 1.0 + 1e-12,
                                  "max k(z) / (K e^{-(Lambda+eps)|z|} |z|^{-M-gamma})"});

        bool ok = true;
        std::string detail;
        switch (k_.kind) {
            case KernelKind::singular_gamma_lt_1:
                ok = k_.gamma >= 0.0 && k_.gamma < 1.0;
                detail = "gamma must lie in [0,1)";
                break;
            case KernelKind::singular_gamma_ge_1:
                ok = k_.gamma >= 1.0 && k_.gamma < 2.0;
                detail = "gamma must lie in [1,2)";
                break;
            case KernelKind::finite: {
                detail = "mass of {delta<|z|<1} must stay bounded as delta -> 0";
                std::vector<double> masses;
                for (double r : s_.finite_mass_radii) masses.push_back(mass_between(r, 1.0));
                if (!masses.empty() && std::isfinite(masses.front())) {
                    for (std::size_t i = 1; i < masses.size(); ++i) {
                        if (masses[i] > 1.05 * masses[i - 1] + 1e-9) ok = false;
                    }
                } else if (!masses.empty()) {
                    detail += " (not probed for M > 2)";
                }
                break;
            }
        }
        report_.checks.push_back({"kind_consistency", k_.gamma, 0.0, ok, detail});
    }

    const ControlProblem& p_;
    const LevyKernel& k_;
    const SamplingPlan& s_;
    std::vector<Sample> samples_;
    ValidationReport report_;
};

}  // namespace

ValidationReport validate_assumptions(const ControlProblem& p, const LevyKernel& kern,
                                      const SamplingPlan& samples) {
    if (samples.xs.empty()) throw ConfigError("sampling plan needs at least one x probe");
    return Validator(p, kern, samples).run();
}

}  // namespace mdq
