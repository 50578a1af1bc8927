// Serial reference against the OpenMP path for the per-node loops.

#include "mdq/models.hpp"
#include "mdq/stepper.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

namespace {

using namespace mdq;

struct Setup {
    ControlProblem problem;
    LevyKernel kernel;
    Grid grid;

    explicit Setup(std::size_t nodes)
        : problem([] {
              ConstantControl a, b;
              a.sigma = 0.3;
              a.drift = scalar_point(0.4);
              b.sigma = 0.3;
              b.drift = scalar_point(-0.4);
              b.jump_quad = 0.25;
              return constant_problem({a, b}, 1, 1, 0.5, make_initial("cos"));
          }()),
          kernel(tempered_stable(1.0, 1.0, 0.5)),
          grid(Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, nodes)) {}
};

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::parallel : Execution::serial; }

void BM_Assemble(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        Discretization disc(s.problem, s.kernel, s.grid, {}, {}, mode(state));
        benchmark::DoNotOptimize(disc.at(0.0));
    }
}

void BM_Residual(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    Discretization disc(s.problem, s.kernel, s.grid, {}, {}, mode(state));
    const auto ops = disc.at(0.0);
    const std::vector<double> u = sample(s.grid, s.problem.initial);
    const ImplicitProblem prob(*ops, u, explicit_terms(*ops, u, 0.5, 0.5, mode(state)), 0.5, 0.5, 0.01,
                               mode(state));
    std::vector<double> r(u.size());
    for (auto _ : state) {
        prob.residual(u, r);
        benchmark::DoNotOptimize(r.data());
    }
}

void BM_ExplicitStep(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    Discretization disc(s.problem, s.kernel, s.grid, {}, {}, mode(state));
    const auto ops = disc.at(0.0);
    const std::vector<double> u = sample(s.grid, s.problem.initial);
    SchemeConfig cfg;
    cfg.dt = 0.5 * cfl_max_dt(*ops, 0.0, 0.0);
    cfg.exec = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(explicit_step(*ops, u, cfg));
}

void args(benchmark::internal::Benchmark* b) {
    for (long n : {256, 1024}) {
        for (long par : {0, 1}) b->Args({n, par});
    }
    b->ArgNames({"nodes", "parallel"})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_Assemble)->Apply(args);
BENCHMARK(BM_Residual)->Apply(args);
BENCHMARK(BM_ExplicitStep)->Apply(args);

}  // namespace

BENCHMARK_MAIN();
