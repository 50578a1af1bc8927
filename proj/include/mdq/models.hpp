#pragma once

#include "mdq/problem.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace mdq {

/// k(z) = kappa exp(-lambda |z|), a finite measure.
LevyKernel finite_exp(double kappa, double lambda, std::size_t dim = 1);

/// k(z) = kappa exp(-lambda |z|) / |z|^(M + gamma); kind follows gamma.
LevyKernel tempered_stable(double kappa, double lambda, double gamma, std::size_t dim = 1);

/// k(z) = |z|^(-M - gamma) on |z| <= radius, zero outside.
LevyKernel frac_laplace_trunc(double gamma, double radius, std::size_t dim = 1);

/// The zero measure.
LevyKernel zero_kernel(std::size_t dim = 1);

/// Built-in kernel by registry id with named parameters. Unknown ids or
/// parameters throw ConfigError.
LevyKernel make_kernel(const std::string& id, const std::map<std::string, double>& params,
                       std::size_t dim = 1);

std::vector<std::string> kernel_ids();

/// Constant data of one control. The jump is eta(z) = jump_scale * z +
/// jump_quad * |z|^2 * e_1 (the quadratic part only acts on the first axis).
struct ConstantControl {
    std::string label = "a0";
    double sigma = 0.0;  // sigma * I
    Point drift;         // empty means zero
    double discount = 0.0;
    double source = 0.0;
    double jump_scale = 1.0;
    double jump_quad = 0.0;
};

/// Initial data g by name: cos, sin, zero, const, bump, put, call, square.
/// Parameters: "value" (const), "width" (bump), "strike" (put/call), "shift".
std::function<double(const Point&)> make_initial(const std::string& name,
                                                 const std::map<std::string, double>& params = {});

ControlProblem constant_problem(const std::vector<ConstantControl>& controls, std::size_t dim_x,
                                std::size_t dim_z, double horizon,
                                std::function<double(const Point&)> initial);

}  // namespace mdq
