#include "mdq/io.hpp"

#include "mdq/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mdq {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void coord_header(std::ostringstream& os, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) os << 'x' << i << ',';
}

void coords(std::ostringstream& os, const Point& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) os << num(x[i]) << ',';
}

}  // namespace

std::string grid_csv(const Grid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) throw DataError("value count does not match the grid");
    std::ostringstream os;
    coord_header(os, grid.dim());
    os << "value\n";
    for (std::size_t b = 0; b < grid.size(); ++b) {
        coords(os, grid.node(b));
        os << num(values[b]) << '\n';
    }
    return os.str();
}

std::string components_csv(const Grid& grid, const SwitchingResult& r) {
    std::ostringstream os;
    coord_header(os, grid.dim());
    for (std::size_t i = 0; i < r.values.size(); ++i) os << 'v' << i << (i + 1 < r.values.size() ? "," : "\n");
    for (std::size_t b = 0; b < grid.size(); ++b) {
        coords(os, grid.node(b));
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            os << num(r.values[i][b]) << (i + 1 < r.values.size() ? "," : "\n");
        }
    }
    return os.str();
}

std::string table_csv(const WeightTable& table) {
    std::ostringstream os;
    const bool nodal = !table.nodal.empty();
    os << "n,z_n,weight" << (nodal ? ",nodal" : "") << '\n';
    for (std::size_t n = 0; n < table.weights.size(); ++n) {
        os << n << ',' << num(static_cast<double>(n) * table.step) << ',' << num(table.weights[n]);
        if (nodal) os << ',' << num(n < table.nodal.size() ? table.nodal[n] : 0.0);
        os << '\n';
    }
    return os.str();
}

std::string stencil_csv(const Grid& grid, const Stencil& s) {
    std::ostringstream os;
    os << "target,";
    coord_header(os, grid.dim());
    os << "weight\n";
    for (const auto& nw : s.nodes) {
        os << nw.node << ',';
        coords(os, grid.node(nw.node));
        os << num(nw.weight) << '\n';
    }
    for (const auto& f : s.far) {
        os << "far,";
        coords(os, f.x);
        os << num(f.weight) << '\n';
    }
    os << "diag_mass,";
    coords(os, grid.node(s.center));
    os << num(s.diag_mass) << '\n';
    return os.str();
}

std::string diagnostics_csv(const SolveResult& r) {
    std::ostringstream os;
    os << "step,t,sup_norm,cfl_margin,iterations,residual,stability_bound,stable\n";
    for (const auto& d : r.steps) {
        os << d.step << ',' << num(d.t) << ',' << num(d.sup_norm) << ',' << num(d.cfl_margin) << ',' << d.iterations
           << ',' << num(d.residual) << ',' << num(d.stability_bound) << ',' << (d.stable ? 1 : 0) << '\n';
    }
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace mdq
