// Command-line front end: solve, switching, kernels, stencil, convergence, verify.
// Exit codes: 0 success, 1 a gated check failed, 2 bad input or solver error.

#include "mdq/acceptance.hpp"
#include "mdq/config.hpp"
#include "mdq/error.hpp"
#include "mdq/harness.hpp"
#include "mdq/io.hpp"
#include "mdq/local.hpp"
#include "mdq/nonlocal.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

namespace {

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        mdq::write_file(path, text);
    }
}

std::string sibling(const std::string& path, const std::string& suffix) {
    if (path.empty() || path == "-") return "";
    const auto dot = path.rfind(".csv");
    return (dot == std::string::npos ? path : path.substr(0, dot)) + suffix;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& s : items) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw mdq::ConfigError("parameter '" + s + "' is not name=value");
        try {
            out[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
        } catch (const std::exception&) {
            throw mdq::ConfigError("parameter '" + s + "' has a non-numeric value");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone difference-quadrature solver for Bellman integro-PDEs"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> sets;
    std::string out;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", sets, "override, section.key=value (repeatable)");
        sub->add_option("--out", out, "CSV output path ('-' for stdout)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "march the scheme to the horizon");
    add_config(solve_cmd);
    std::string diag_out;
    solve_cmd->add_option("--diagnostics", diag_out, "per-step CSV (default <out>.steps.csv)");

    auto* switch_cmd = app.add_subcommand("switching", "solve the switching system and its gap table");
    add_config(switch_cmd);

    auto* kernels_cmd = app.add_subcommand("kernels", "dump a kernel weight table");
    std::string model = "tempered_stable";
    double dx = 0.0625;
    double tol = 1e-10;
    std::vector<std::string> params;
    bool minus = false;
    kernels_cmd->add_option("--model", model, "registry id")->capture_default_str();
    kernels_cmd->add_option("--dx", dx, "grid step")->capture_default_str();
    kernels_cmd->add_option("--tol", tol, "truncation tolerance")->capture_default_str();
    kernels_cmd->add_option("--param", params, "model parameter, name=value (repeatable)");
    kernels_cmd->add_flag("--minus", minus, "dump the z < 0 ray");
    kernels_cmd->add_option("--out", out, "CSV output path");

    auto* stencil_cmd = app.add_subcommand("stencil", "dump one L or J stencil");
    add_config(stencil_cmd);
    std::size_t node = 0;
    std::size_t control = 0;
    std::string op = "J";
    stencil_cmd->add_option("--node", node, "flat node index")->capture_default_str();
    stencil_cmd->add_option("--control", control, "control index")->capture_default_str();
    stencil_cmd->add_option("--op", op, "J or L")->check(CLI::IsMember({"J", "L"}))->capture_default_str();

    auto* conv_cmd = app.add_subcommand("convergence", "manufactured-solution rate study");
    add_config(conv_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance property suite");
    std::vector<int> criteria;
    verify_cmd->add_option("--criteria", criteria, "criterion numbers (default all)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) {
            const mdq::RunConfig rc = mdq::load_config(config, sets);
            const mdq::SolveResult r = mdq::solve(rc.problem, rc.kernel, rc.grid, rc.scheme, rc.nonlocal);
            emit(out, mdq::grid_csv(rc.grid, r.values));
            const std::string dpath = diag_out.empty() ? sibling(out, ".steps.csv") : diag_out;
            if (!dpath.empty()) mdq::write_file(dpath, mdq::diagnostics_csv(r));
            std::fprintf(stderr, "%zu steps of dt %.6g, min coefficient %.4f, %s\n", r.num_steps, r.dt,
                         r.min_coefficient, r.stable ? "stable" : "UNSTABLE");
            return r.stable ? 0 : 1;
        }
        if (switch_cmd->parsed()) {
            const mdq::RunConfig rc = mdq::load_config(config, sets);
            const mdq::SwitchingProblem sp = rc.switching();
            const mdq::SwitchingResult r = mdq::solve_switching(sp, rc.kernel, rc.grid, rc.scheme, rc.nonlocal);
            emit(out, mdq::components_csv(rc.grid, r));
            bool ok = r.max_spread <= sp.switch_cost + 1e-12;
            if (!rc.gap_costs.empty()) {
                const mdq::SolveResult u = mdq::solve(rc.problem, rc.kernel, rc.grid, rc.scheme, rc.nonlocal);
                const mdq::GapStudy g =
                    mdq::switching_gap_study(sp, rc.gap_costs, u.values, rc.kernel, rc.grid, rc.scheme, rc.nonlocal);
                std::ostringstream os;
                os << "k,gap,min_diff,max_spread\n";
                for (const auto& row : g.rows) {
                    os << row.k << ',' << row.gap << ',' << row.min_diff << ',' << row.max_spread << '\n';
                }
                os << "exponent,,," << g.exponent << '\n';
                const std::string gpath = sibling(out, ".gaps.csv");
                if (gpath.empty()) {
                    std::cout << os.str();
                } else {
                    mdq::write_file(gpath, os.str());
                }
                ok = ok && g.non_increasing;
            }
            std::fprintf(stderr, "%zu steps, max spread %.6g, %zu projections\n", r.num_steps, r.max_spread,
                         r.projections);
            return ok ? 0 : 1;
        }
        if (kernels_cmd->parsed()) {
            const mdq::LevyKernel k = mdq::make_kernel(model, parse_params(params));
            mdq::NonlocalConfig nl;
            nl.trunc_tol = tol;
            const mdq::Grid grid(dx, {-dx}, {dx});
            const mdq::NonlocalOperator nop(k, grid, nl);
            if (const auto* t = nop.tails_1d()) {
                emit(out, mdq::table_csv(minus ? t->minus_table() : t->plus_table()));
            } else if (const auto* z = nop.finite()) {
                std::ostringstream os;
                os << "n,z_n,weight\n";
                for (std::size_t i = 0; i < z->nodes.size(); ++i) {
                    os << i << ',' << z->nodes[i][0] << ',' << z->weights[i] << '\n';
                }
                emit(out, os.str());
            } else {
                emit(out, "n,z_n,weight\n");
            }
            std::fprintf(stderr, "regime %s\n", mdq::to_string(nop.regime()));
            return 0;
        }
        if (stencil_cmd->parsed()) {
            const mdq::RunConfig rc = mdq::load_config(config, sets);
            if (node >= rc.grid.size()) throw mdq::ConfigError("node index out of range");
            if (control >= rc.problem.num_controls()) throw mdq::ConfigError("control index out of range");
            mdq::Stencil s;
            if (op == "L") {
                s = mdq::build_L(rc.problem, control, 0.0, rc.grid, node);
            } else {
                const mdq::NonlocalOperator nop(rc.kernel, rc.grid, rc.nonlocal);
                s = nop.build(rc.problem, control, 0.0, node);
            }
            emit(out, mdq::stencil_csv(rc.grid, s));
            return 0;
        }
        if (conv_cmd->parsed()) {
            const mdq::RunConfig rc = mdq::load_config(config, sets);
            const mdq::RateReport rep = mdq::rate_report(rc.manufactured());
            emit(out, rep.csv());
            const bool ok = rep.strictly_decreasing && rep.fit.slope >= rep.guaranteed_order;
            std::fprintf(stderr, "fitted order %.4f, guarantee %.2f\n", rep.fit.slope, rep.guaranteed_order);
            return ok ? 0 : 1;
        }
        if (verify_cmd->parsed()) {
            bool ok = true;
            std::vector<int> ids = criteria;
            if (ids.empty()) {
                for (int i = 1; i <= 9; ++i) ids.push_back(i);
            }
            for (int id : ids) {
                for (const auto& r : mdq::run_acceptance({id})) {
                    std::printf("%s\n", mdq::format(r).c_str());
                    std::fflush(stdout);
                    ok = ok && r.passed;
                }
            }
            return ok ? 0 : 1;
        }
    } catch (const mdq::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
