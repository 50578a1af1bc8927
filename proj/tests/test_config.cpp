#include "mdq/acceptance.hpp"
#include "mdq/config.hpp"
#include "mdq/error.hpp"
#include "mdq/io.hpp"

#include <doctest.h>

using namespace mdq;

namespace {

const char* kText = R"(
[problem]
horizon = 0.4
initial = put
strike = 1.0
controls = 2
sigma = 0.3, 0.1
drift = 0.2, -0.1
jump_quad = 0, 0.25

[kernels]
model = tempered_stable
gamma = 1.5

[lattice]
dx = 0.125
lo = -2
hi = 2

[stepper]
theta = 0.5
vartheta = 1
dt = 0.05

[switching]
partition = 0 | 1
cost = 0.3
)";

}  // namespace

TEST_CASE("config: parses every section") {
    const RunConfig rc = parse_config(kText);
    CHECK(rc.problem.num_controls() == 2);
    CHECK(rc.problem.horizon == doctest::Approx(0.4));
    CHECK(rc.controls[1].drift[0] == doctest::Approx(-0.1));
    CHECK(rc.controls[1].jump_quad == doctest::Approx(0.25));
    CHECK(rc.kernel.kind == KernelKind::singular_gamma_ge_1);
    CHECK(rc.grid.size() == 33);
    CHECK(rc.scheme.theta == doctest::Approx(0.5));
    CHECK(rc.scheme.cfl == CflMode::enforce);
    CHECK(rc.switching().partition.size() == 2);
    CHECK(rc.switching().switch_cost == doctest::Approx(0.3));
}

TEST_CASE("config: overrides and errors") {
    const RunConfig rc = parse_config(kText, {"stepper.theta=1", "lattice.dx = 0.25"});
    CHECK(rc.scheme.theta == doctest::Approx(1.0));
    CHECK(rc.grid.size() == 17);
    CHECK_THROWS_AS(parse_config(kText, {"stepper.thta=1"}), ConfigError);
    CHECK_THROWS_AS(parse_config(kText, {"theta=1"}), ConfigError);
    CHECK_THROWS_AS(parse_config(kText, {"problem.sigma=1,2,3"}), ConfigError);
    CHECK_THROWS_AS(parse_config(kText, {"stepper.cfl=sometimes"}), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(kText, {"kernels.model=levy"}), ConfigError);
}

TEST_CASE("io: CSV writers") {
    const RunConfig rc = parse_config(kText);
    std::vector<double> v(rc.grid.size(), 1.5);
    const std::string g = grid_csv(rc.grid, v);
    CHECK(g.rfind("x0,value\n-2,1.5\n", 0) == 0);
    CHECK_THROWS_AS(grid_csv(rc.grid, std::vector<double>(3)), DataError);
    WeightTable t;
    t.step = 0.5;
    t.weights = {0.4, 0.2};
    CHECK(table_csv(t) == "n,z_n,weight\n0,0,0.4\n1,0.5,0.2\n");
}

TEST_CASE("acceptance: result formatting") {
    CriterionResult r;
    r.id = 3;
    r.name = "consistency";
    r.passed = true;
    r.seconds = 1.23;
    r.detail = "ok";
    CHECK(format(r) == "[PASS] 3 consistency (1.2 s): ok");
    CHECK(builtin_run_names().size() == builtin_runs().size());
    CHECK_THROWS_AS(builtin_run("missing"), ConfigError);
}
