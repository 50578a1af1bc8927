#include "mdq/config.hpp"

#include "mdq/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mdq {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"problem",
         {"dim", "horizon", "initial", "strike", "width", "value", "shift", "controls", "sigma", "drift", "discount",
          "source", "jump_scale", "jump_quad"}},
        {"kernels", {"model", "kappa", "lambda", "gamma", "radius"}},
        {"lattice", {"dx", "lo", "hi", "periodic", "nodes", "farfield"}},
        {"nonlocal", {"dz", "trunc_tol", "sphere_nodes"}},
        {"stepper", {"theta", "vartheta", "dt", "cfl", "tol", "max_iter", "relax", "exec"}},
        {"switching", {"partition", "cost", "gap_costs"}},
        {"harness", {"levels", "dt_per_dx"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
}

std::vector<double> numbers(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(to_double(key, tok));
    return out;
}

/// Per-control list: one entry per control, or one entry shared by all.
std::vector<std::string> per_control(const pt::ptree& t, const std::string& key, std::size_t controls,
                                     const std::string& fallback) {
    const auto v = t.get_optional<std::string>("problem." + key);
    if (!v) return std::vector<std::string>(controls, fallback);
    auto items = split(*v, ',');
    if (items.size() == 1) return std::vector<std::string>(controls, items[0]);
    if (items.size() != controls) {
        throw ConfigError("problem." + key + " has " + std::to_string(items.size()) + " entries for " +
                          std::to_string(controls) + " controls");
    }
    return items;
}

FarfieldKind farfield_of(const std::string& s) {
    if (s == "initial") return FarfieldKind::initial;
    if (s == "constant") return FarfieldKind::constant;
    if (s == "periodic") return FarfieldKind::periodic;
    throw ConfigError("lattice.farfield must be initial, constant or periodic, got '" + s + "'");
}

CflMode cfl_of(const std::string& s) {
    if (s == "enforce") return CflMode::enforce;
    if (s == "auto") return CflMode::auto_dt;
    if (s == "off") return CflMode::off;
    throw ConfigError("stepper.cfl must be enforce, auto or off, got '" + s + "'");
}

Grid make_grid(const pt::ptree& t, std::size_t dim) {
    const bool periodic = t.get("lattice.periodic", false);
    auto axis_values = [&](const std::string& key, double fallback) {
        const auto v = t.get_optional<std::string>("lattice." + key);
        std::vector<double> out = v ? numbers("lattice." + key, *v) : std::vector<double>{fallback};
        if (out.size() == 1) out.assign(dim, out[0]);
        if (out.size() != dim) throw ConfigError("lattice." + key + " needs 1 or " + std::to_string(dim) + " values");
        return out;
    };
    const auto lo = axis_values("lo", periodic ? 0.0 : -1.0);
    const auto hi = axis_values("hi", periodic ? 2.0 * std::numbers::pi : 1.0);
    if (periodic) {
        auto nodes = t.get_optional<std::size_t>("lattice.nodes");
        if (!nodes) {
            const double dx = t.get<double>("lattice.dx", 0.0);
            if (!(dx > 0.0)) throw ConfigError("periodic lattice needs nodes or dx");
            nodes = static_cast<std::size_t>(std::lround((hi[0] - lo[0]) / dx));
        }
        return Grid::periodic(dim, lo[0], hi[0] - lo[0], *nodes);
    }
    const double dx = t.get<double>("lattice.dx", 0.0);
    if (!(dx > 0.0)) throw ConfigError("lattice.dx must be positive");
    return Grid(dx, lo, hi, farfield_of(t.get<std::string>("lattice.farfield", "initial")));
}

}  // namespace

SwitchingProblem RunConfig::switching() const {
    SwitchingProblem sp{problem, partition, switch_cost};
    if (sp.partition.empty()) {
        for (std::size_t a = 0; a < problem.num_controls(); ++a) sp.partition.push_back({a});
    }
    sp.validate();
    return sp;
}

ManufacturedConfig RunConfig::manufactured() const {
    ManufacturedConfig m;
    m.control = controls.front();
    m.kernel = kernel;
    m.dim = problem.dim_x;
    m.horizon = problem.horizon;
    m.scheme = scheme;
    m.dt_per_dx = dt_per_dx;
    if (!levels.empty()) m.levels = levels;
    m.nonlocal = nonlocal;
    return m;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    pt::ptree t;
    try {
        std::istringstream is(text);
        pt::read_ini(is, t);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw ConfigError("override '" + o + "' is not section.key=value");
        }
        t.put(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    for (const auto& [section, keys] : t) {
        const auto it = schema().find(section);
        if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : keys) {
            if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        }
    }

    try {
        const std::size_t dim = t.get<std::size_t>("problem.dim", 1);
        const std::size_t n_controls = t.get<std::size_t>("problem.controls", 1);
        if (dim == 0 || n_controls == 0) throw ConfigError("problem.dim and problem.controls must be positive");

        std::vector<ConstantControl> controls(n_controls);
        const auto sigma = per_control(t, "sigma", n_controls, "0");
        const auto drift = per_control(t, "drift", n_controls, "0");
        const auto discount = per_control(t, "discount", n_controls, "0");
        const auto source = per_control(t, "source", n_controls, "0");
        const auto scale = per_control(t, "jump_scale", n_controls, "1");
        const auto quad = per_control(t, "jump_quad", n_controls, "0");
        for (std::size_t a = 0; a < n_controls; ++a) {
            auto& c = controls[a];
            c.label = "a" + std::to_string(a);
            c.sigma = to_double("problem.sigma", sigma[a]);
            auto b = numbers("problem.drift", drift[a]);
            if (b.size() == 1) b.assign(dim, b[0]);
            if (b.size() != dim) throw ConfigError("problem.drift entries need 1 or dim components");
            c.drift = Point::Map(b.data(), static_cast<Eigen::Index>(dim));
            c.discount = to_double("problem.discount", discount[a]);
            c.source = to_double("problem.source", source[a]);
            c.jump_scale = to_double("problem.jump_scale", scale[a]);
            c.jump_quad = to_double("problem.jump_quad", quad[a]);
        }
        std::map<std::string, double> init_params;
        for (const char* k : {"strike", "width", "value", "shift"}) {
            if (auto v = t.get_optional<double>(std::string("problem.") + k)) init_params[k] = *v;
        }
        ControlProblem problem = constant_problem(controls, dim, dim, t.get("problem.horizon", 1.0),
                                                  make_initial(t.get<std::string>("problem.initial", "cos"),
                                                               init_params));

        std::map<std::string, double> kparams;
        for (const char* k : {"kappa", "lambda", "gamma", "radius"}) {
            if (auto v = t.get_optional<double>(std::string("kernels.") + k)) kparams[k] = *v;
        }
        LevyKernel kernel = make_kernel(t.get<std::string>("kernels.model", "zero"), kparams, dim);

        Grid grid = make_grid(t, dim);

        SchemeConfig scheme;
        scheme.theta = t.get("stepper.theta", 0.0);
        scheme.vartheta = t.get("stepper.vartheta", 0.0);
        scheme.dt = t.get("stepper.dt", 0.0);
        scheme.cfl = cfl_of(t.get<std::string>("stepper.cfl", scheme.dt > 0.0 ? "enforce" : "auto"));
        scheme.tol = t.get("stepper.tol", scheme.tol);
        scheme.max_iter = t.get("stepper.max_iter", scheme.max_iter);
        scheme.relax = t.get("stepper.relax", 0.0);
        const std::string exec = t.get<std::string>("stepper.exec", "parallel");
        if (exec != "serial" && exec != "parallel") throw ConfigError("stepper.exec must be serial or parallel");
        scheme.exec = exec == "serial" ? Execution::serial : Execution::parallel;

        NonlocalConfig nl;
        nl.dz = t.get("nonlocal.dz", 0.0);
        nl.trunc_tol = t.get("nonlocal.trunc_tol", nl.trunc_tol);
        nl.sphere_nodes = t.get("nonlocal.sphere_nodes", nl.sphere_nodes);

        std::vector<std::vector<std::size_t>> partition;
        if (auto v = t.get_optional<std::string>("switching.partition")) {
            for (const auto& comp : split(*v, '|')) {
                std::vector<std::size_t> idx;
                for (double d : numbers("switching.partition", comp)) {
                    if (d < 0.0 || d != std::floor(d)) throw ConfigError("switching.partition takes control indices");
                    idx.push_back(static_cast<std::size_t>(d));
                }
                partition.push_back(std::move(idx));
            }
        }
        std::vector<double> gap_costs = numbers("switching.gap_costs", t.get<std::string>("switching.gap_costs", ""));
        std::vector<std::size_t> levels;
        for (double d : numbers("harness.levels", t.get<std::string>("harness.levels", ""))) {
            if (d < 2.0 || d != std::floor(d)) throw ConfigError("harness.levels takes node counts");
            levels.push_back(static_cast<std::size_t>(d));
        }

        return RunConfig{std::move(controls), std::move(problem), std::move(kernel), std::move(grid), scheme,
                         std::move(nl), std::move(partition), t.get("switching.cost", 1.0), std::move(gap_costs),
                         std::move(levels), t.get("harness.dt_per_dx", 0.0)};
    } catch (const pt::ptree_bad_data& e) {
        throw ConfigError(std::string("config value: ") + e.what());
    }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

}  // namespace mdq
