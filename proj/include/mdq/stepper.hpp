#pragma once

#include "mdq/lattice.hpp"
#include "mdq/nonlocal.hpp"
#include "mdq/parallel.hpp"
#include "mdq/problem.hpp"
#include "mdq/stencil.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mdq {

enum class CflMode { enforce, auto_dt, off };

struct SchemeConfig {
    double theta = 0.0;     // implicitness of L
    double vartheta = 0.0;  // implicitness of J
    /// Time step; with CflMode::auto_dt a non-positive value means "as large as allowed".
    double dt = 0.0;
    /// Fixed-point relaxation; 0 selects 0.9 / (1 + dt max(theta lbar + vartheta jbar)).
    double relax = 0.0;
    double tol = 1e-12;
    std::size_t max_iter = 100000;
    CflMode cfl = CflMode::enforce;
    bool keep_trajectory = false;
    Execution exec = Execution::parallel;
};

/// L_h, J_h stencils and the zeroth-order data of every control at one time level.
struct Operators {
    double t = 0.0;
    std::vector<std::vector<Stencil>> L;  // [alpha][node]
    std::vector<std::vector<Stencil>> J;
    std::vector<std::vector<double>> c;   // discount
    std::vector<std::vector<double>> f;   // source
    std::vector<std::vector<double>> far_L;  // farfield part of each stencil
    std::vector<std::vector<double>> far_J;
    /// Largest |farfield value| seen by any stencil.
    double far_sup = 0.0;

    std::size_t controls() const { return L.size(); }
    std::size_t nodes() const { return L.empty() ? 0 : L.front().size(); }
};

/// Assembles and caches Operators for a problem on a grid.
class Discretization {
public:
    Discretization(const ControlProblem& p, const LevyKernel& kern, const Grid& grid, NonlocalConfig nl = {},
                   FarfieldFn far = {}, Execution exec = Execution::parallel);

    const ControlProblem& problem() const { return *p_; }
    const Grid& grid() const { return *grid_; }
    const NonlocalOperator& nonlocal() const { return nonlocal_; }
    const FarfieldFn& farfield() const { return far_; }
    Execution execution() const { return exec_; }

    /// Operators at time t; time-independent problems assemble once.
    std::shared_ptr<const Operators> at(double t);

private:
    std::shared_ptr<const Operators> assemble(double t) const;
    void refresh_far(Operators& ops) const;

    const ControlProblem* p_;
    const Grid* grid_;
    NonlocalOperator nonlocal_;
    FarfieldFn far_;
    Execution exec_;
    std::vector<std::shared_ptr<const Operators>> cache_;
};

/// Largest dt with dt [(1-theta) lbar + (1-vartheta) jbar + c] <= 1 for all
/// nodes and controls; +inf when the bracket is never positive.
double cfl_max_dt(const Operators& ops, double theta, double vartheta);
double cfl_max_dt(std::span<const double> lbar, std::span<const double> jbar, std::span<const double> c,
                  double theta, double vartheta);

/// Default relaxation 0.9 / (1 + dt max(theta lbar + vartheta jbar)).
double default_relaxation(const Operators& ops, double theta, double vartheta, double dt);

/// Explicit parts E_alpha = -(1-theta) L U - (1-vartheta) J U + c U - f at t_{n-1}, [alpha][node].
std::vector<std::vector<double>> explicit_terms(const Operators& ops, std::span<const double> u_prev, double theta,
                                                double vartheta, Execution exec = Execution::parallel);

/// Fully explicit step U_prev - dt max_alpha E_alpha. Throws StepError under
/// CflMode::enforce when dt exceeds the CFL bound.
std::vector<double> explicit_step(const Operators& ops, std::span<const double> u_prev, const SchemeConfig& cfg,
                                  std::vector<std::size_t>* active = nullptr);

/// The implicit half of one step: U - U_prev + dt max_alpha{-theta L U - vartheta J U + E_alpha} = 0.
class ImplicitProblem {
public:
    ImplicitProblem(const Operators& ops_now, std::span<const double> u_prev,
                    std::vector<std::vector<double>> explicit_part, double theta, double vartheta, double dt,
                    Execution exec = Execution::parallel);

    /// R(U); also records the maximizing control per node when `active` is given.
    void residual(std::span<const double> u, std::span<double> r, std::vector<std::size_t>* active = nullptr) const;
    /// Smallest residual double precision can certify near u.
    double rounding_floor(std::span<const double> u) const;
    /// T U = U - eps R(U).
    void apply_T(std::span<const double> u, std::span<double> out, double eps) const;

private:
    const Operators* ops_;
    std::span<const double> u_prev_;
    std::vector<std::vector<double>> explicit_;
    double theta_, vartheta_, dt_;
    Execution exec_;
};

struct ImplicitResult {
    std::vector<double> values;
    std::size_t iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
};

/// Relaxed fixed-point iteration U <- U - eps R(U) from the start value,
/// stopping when sup|R| <= max(tol, rounding floor), which bounds the distance to the solution by tol.
ImplicitResult implicit_solve(const ImplicitProblem& prob, std::vector<double> start, double eps, double tol,
                              std::size_t max_iter);

struct StepDiagnostics {
    std::size_t step = 0;
    double t = 0.0;
    double sup_norm = 0.0;
    double cfl_margin = 0.0;  // 1 - dt * max bracket
    std::size_t iterations = 0;
    double residual = 0.0;
    double stability_bound = 0.0;
    bool stable = true;
};

struct SolveResult {
    std::vector<double> values;
    std::vector<std::vector<double>> trajectory;  // includes U^0 when kept
    std::vector<std::size_t> active;              // maximizing control at the last step
    std::vector<StepDiagnostics> steps;
    double dt = 0.0;
    std::size_t num_steps = 0;
    double relax = 0.0;
    double g_sup = 0.0;
    double f_sup = 0.0;
    double c_sup = 0.0;
    /// Smallest explicit diagonal coefficient 1 - dt[(1-theta) lbar + (1-vartheta) jbar + c].
    double min_coefficient = 1.0;
    bool stable = true;
};

/// One step from t_prev to t_prev + dt (cfg.dt is ignored). Fills the
/// iteration, residual and CFL fields of `diag`, and `relax_used` when implicit.
std::vector<double> advance(Discretization& disc, const SchemeConfig& cfg, std::span<const double> u_prev,
                            double t_prev, double dt, StepDiagnostics& diag,
                            std::vector<std::size_t>* active = nullptr, double* relax_used = nullptr);

/// Marches U^0 = g to T.
SolveResult solve(Discretization& disc, const SchemeConfig& cfg);
SolveResult solve(const ControlProblem& p, const LevyKernel& kern, const Grid& grid, const SchemeConfig& cfg,
                  NonlocalConfig nl = {}, FarfieldFn far = {});

/// Step count and dt actually used for a config and a CFL bound.
std::pair<std::size_t, double> plan_steps(double horizon, const SchemeConfig& cfg, double dt_max);

struct ComparisonReport {
    bool ordered = true;
    double max_violation = 0.0;
};

/// Checks U1 <= U2 + tol at every stored time level (final values when no trajectory was kept).
ComparisonReport discrete_comparison_check(const SolveResult& lower, const SolveResult& upper, double tol = 1e-10);

}  // namespace mdq
