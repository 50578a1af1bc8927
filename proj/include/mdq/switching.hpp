#pragma once

#include "mdq/stepper.hpp"

#include <cstddef>
#include <vector>

namespace mdq {

/// m-component system v_i coupled through v_i <= min_{j != i} v_j + k, where
/// component i only uses the controls in partition[i].
struct SwitchingProblem {
    ControlProblem base;
    std::vector<std::vector<std::size_t>> partition;
    double switch_cost = 1.0;

    std::size_t components() const { return partition.size(); }
    /// Throws ConfigError unless the partition covers every control and k > 0.
    void validate() const;
};

/// The base problem restricted to a subset of its controls.
ControlProblem restrict_controls(const ControlProblem& p, const std::vector<std::size_t>& subset);

struct SwitchingResult {
    std::vector<std::vector<double>> values;  // [component][node] at T
    /// [level][component][node], including the initial level when kept.
    std::vector<std::vector<std::vector<double>>> trajectory;
    double dt = 0.0;
    std::size_t num_steps = 0;
    /// Largest max_i v_i - min_j v_j over all nodes and time levels.
    double max_spread = 0.0;
    /// Node-steps where the obstacle was active.
    std::size_t projections = 0;
};

/// Per step: every component advances with the scalar scheme over its own
/// controls, then v_i <- min(v_i, min_{j != i} v_j + k) using the pre-projection values.
SwitchingResult solve_switching(const SwitchingProblem& sp, const LevyKernel& kern, const Grid& grid,
                                const SchemeConfig& cfg, NonlocalConfig nl = {}, FarfieldFn far = {});

struct GapRow {
    double k = 0.0;
    double gap = 0.0;       // max_i sup |v_i - U|
    double min_diff = 0.0;  // min_i inf (v_i - U)
    double max_spread = 0.0;
};

struct GapStudy {
    std::vector<GapRow> rows;
    /// Least-squares slope of log gap against log k; NaN when a gap is zero.
    double exponent = 0.0;
    bool non_increasing = true;
};

/// Runs the system for each switching cost and compares every component with U.
GapStudy switching_gap_study(const SwitchingProblem& sp, const std::vector<double>& costs,
                             const std::vector<double>& scalar, const LevyKernel& kern, const Grid& grid,
                             const SchemeConfig& cfg, NonlocalConfig nl = {}, FarfieldFn far = {});

}  // namespace mdq
