#pragma once

#include "mdq/harness.hpp"
#include "mdq/models.hpp"
#include "mdq/stepper.hpp"
#include "mdq/switching.hpp"

#include <string>
#include <vector>

namespace mdq {

/// Everything a CLI run needs, read from an INI file whose sections are named
/// after the modules:
///
///   [problem]   dim, horizon, initial, strike, width, value, shift,
///               controls, sigma, drift, discount, source, jump_scale, jump_quad
///               (per-control lists separated by ',', drift components by spaces)
///   [kernels]   model, kappa, lambda, gamma, radius
///   [lattice]   dx, lo, hi (one value or one per axis), periodic, nodes, farfield
///   [nonlocal]  dz, trunc_tol, sphere_nodes
///   [stepper]   theta, vartheta, dt, cfl (enforce|auto|off), tol, max_iter, relax, exec
///   [switching] partition (components separated by '|'), cost, gap_costs
///   [harness]   levels, dt_per_dx
struct RunConfig {
    std::vector<ConstantControl> controls;
    ControlProblem problem;
    LevyKernel kernel;
    Grid grid;
    SchemeConfig scheme;
    NonlocalConfig nonlocal;
    std::vector<std::vector<std::size_t>> partition;
    double switch_cost = 1.0;
    std::vector<double> gap_costs;
    std::vector<std::size_t> levels;
    double dt_per_dx = 0.0;

    SwitchingProblem switching() const;
    ManufacturedConfig manufactured() const;
};

/// Parses INI text; `overrides` are "section.key=value" strings applied on top.
/// Unknown sections or keys and malformed values throw ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace mdq
