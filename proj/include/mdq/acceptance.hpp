#pragma once

#include "mdq/models.hpp"
#include "mdq/stepper.hpp"
#include "mdq/switching.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mdq {

struct NamedKernel {
    std::string name;
    LevyKernel kernel;
};

/// Built-in kernel family used by the property checks: one representative per
/// registry id and regime.
std::vector<NamedKernel> builtin_kernels(std::size_t dim = 1);

/// A complete, named solver configuration.
struct BuiltinRun {
    std::string name;
    ControlProblem problem;
    LevyKernel kernel;
    Grid grid;
    SchemeConfig scheme;
    NonlocalConfig nonlocal;
};

std::vector<BuiltinRun> builtin_runs();
std::vector<std::string> builtin_run_names();
BuiltinRun builtin_run(const std::string& name);

/// Two controls with opposite sources, one per component.
struct SwitchingSetup {
    SwitchingProblem system;
    LevyKernel kernel;
    Grid grid;
    SchemeConfig scheme;
};

SwitchingSetup builtin_switching();

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double limit_seconds = 0.0;
};

CriterionResult check_weight_positivity();
CriterionResult check_mass_bounds();
CriterionResult check_consistency();
CriterionResult check_comparison(std::uint64_t seed = 20240601);
CriterionResult check_stability();
CriterionResult check_contraction(std::uint64_t seed = 20240602);
CriterionResult check_convergence();
CriterionResult check_switching();
CriterionResult check_crank_nicolson();

/// Runs the listed criteria (all when empty), in order.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

/// "[PASS] 3 name (1.2 s): detail"
std::string format(const CriterionResult& r);

}  // namespace mdq
