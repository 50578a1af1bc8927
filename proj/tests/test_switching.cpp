#include "mdq/acceptance.hpp"
#include "mdq/error.hpp"
#include "mdq/switching.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mdq;

namespace {

SwitchingSetup small_setup() {
    SwitchingSetup s = builtin_switching();
    s.grid = Grid::periodic(1, 0.0, 2.0 * std::numbers::pi, 32);
    s.system.base.horizon = 0.5;
    return s;
}

}  // namespace

TEST_CASE("switching: validation") {
    SwitchingProblem sp = small_setup().system;
    CHECK_NOTHROW(sp.validate());
    sp.switch_cost = 0.0;
    CHECK_THROWS_AS(sp.validate(), ConfigError);
    sp.switch_cost = 0.1;
    sp.partition = {{0}};
    CHECK_THROWS_AS(sp.validate(), ConfigError);
    sp.partition = {{0}, {5}};
    CHECK_THROWS_AS(sp.validate(), ConfigError);
}

TEST_CASE("switching: restricted problems keep the chosen controls") {
    const ControlProblem& p = small_setup().system.base;
    const ControlProblem q = restrict_controls(p, {1});
    REQUIRE(q.num_controls() == 1);
    const Point x = scalar_point(0.3);
    CHECK(q.source(0, 0.0, x) == doctest::Approx(p.source(1, 0.0, x)));
    CHECK(q.drift(0, 0.0, x)[0] == doctest::Approx(p.drift(1, 0.0, x)[0]));
}

TEST_CASE("switching: spread is bounded by the switching cost at every level") {
    const SwitchingSetup s = small_setup();
    SchemeConfig cfg = s.scheme;
    cfg.keep_trajectory = true;
    for (double k : {0.3, 0.1}) {
        SwitchingProblem sp = s.system;
        sp.switch_cost = k;
        const SwitchingResult r = solve_switching(sp, s.kernel, s.grid, cfg);
        CHECK(r.max_spread <= k + 1e-12);
        for (const auto& level : r.trajectory) {
            for (std::size_t b = 0; b < s.grid.size(); ++b) {
                for (std::size_t i = 0; i < level.size(); ++i) {
                    for (std::size_t j = 0; j < level.size(); ++j) CHECK(level[i][b] <= level[j][b] + k + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("switching: components lie above the scalar solution and approach it") {
    const SwitchingSetup s = small_setup();
    const SolveResult u = solve(s.system.base, s.kernel, s.grid, s.scheme);
    const GapStudy g = switching_gap_study(s.system, {0.4, 0.2, 0.1}, u.values, s.kernel, s.grid, s.scheme);
    REQUIRE(g.rows.size() == 3);
    CHECK(g.non_increasing);
    for (const auto& row : g.rows) CHECK(row.min_diff >= -1e-10);
    CHECK(g.rows.back().gap < g.rows.front().gap);
    CHECK(g.exponent > 0.0);
}

TEST_CASE("switching: a shared control set reproduces the scalar scheme") {
    const SwitchingSetup s = small_setup();
    SwitchingProblem sp = s.system;
    sp.partition = {{0, 1}, {0, 1}};
    const SolveResult u = solve(sp.base, s.kernel, s.grid, s.scheme);
    const SwitchingResult r = solve_switching(sp, s.kernel, s.grid, s.scheme);
    for (const auto& v : r.values) {
        for (std::size_t b = 0; b < v.size(); ++b) CHECK(v[b] == doctest::Approx(u.values[b]).epsilon(1e-12));
    }
    CHECK(r.projections == 0);
}
