#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sstream>

#include "liouville/fd_oracle.hpp"
#include "liouville/io.hpp"
#include "liouville/solution_map.hpp"

using liouville::GridField;
using liouville::InitialData;
using liouville::SmoothExpr;
using liouville::SolutionField;
using liouville::fd_run_error;
using liouville::fd_solve;
using liouville::parse_expression;
using liouville::solve_cauchy;

namespace {

InitialData constant_data() {
    return InitialData{SmoothExpr::constant(0.0), SmoothExpr::constant(0.0), 2.0};
}

struct ClosedForm {  // F = -2 log cosh t (m = 2, constant data)
    double partial(double t, double, int bt, int bx) const {
        if (bx != 0) return 0.0;
        if (bt == 0) return -2.0 * std::log(std::cosh(t));
        if (bt == 1) return -2.0 * std::tanh(t);
        return -2.0 / (std::cosh(t) * std::cosh(t));
    }
};

// exact lookup on the run's own grid: identical fields have zero discrepancy
struct GridLookup {
    const GridField* g;
    double partial(double t, double x, int, int) const {
        const int n = static_cast<int>(std::llround(std::fabs(t) / g->k));
        const auto& layer = g->layers[static_cast<std::size_t>(n)];
        const std::size_t j =
            static_cast<std::size_t>(std::llround((x - g->x_left0) / g->h)) - static_cast<std::size_t>(n);
        return layer[j];
    }
};

}  // namespace

TEST_CASE("layer zero samples the data exactly") {
    const InitialData d{parse_expression("sin(x)"), SmoothExpr::constant(0.0), 1.0};
    const GridField g = fd_solve(d, 1.0, 0.5, 0.05, 0.5);
    const auto& layer0 = g.layers[0];
    for (std::size_t j = 0; j < layer0.size(); ++j)
        CHECK(layer0[j] == std::sin(g.x_of(0, j)));
}

TEST_CASE("identical fields have zero discrepancy") {
    const GridField g = fd_solve(constant_data(), 1.0, 0.5, 0.1, 0.5);
    const auto err = fd_run_error(GridLookup{&g}, g);
    CHECK(err.sup == 0.0);
    CHECK(err.l2 == 0.0);
    CHECK(err.points > 0);
}

TEST_CASE("scheme is second order against the closed form") {
    std::vector<double> sups;
    for (double h : {0.04, 0.02, 0.01}) {
        const GridField g = fd_solve(constant_data(), 1.0, 1.0, h, 0.5);
        sups.push_back(fd_run_error(ClosedForm{}, g).sup);
    }
    const double o1 = std::log2(sups[0] / sups[1]);
    const double o2 = std::log2(sups[1] / sups[2]);
    CHECK(o1 >= 1.7);
    CHECK(o1 <= 2.3);
    CHECK(o2 >= 1.7);
    CHECK(o2 <= 2.3);
}

TEST_CASE("compare_and_order reports halving and orders") {
    const SolutionField exact = solve_cauchy(constant_data(), 1.0, 1.0, 1e-10);
    std::vector<GridField> runs;
    for (double h : {0.04, 0.02, 0.01}) runs.push_back(fd_solve(constant_data(), 1.0, 1.0, h, 0.5));
    const auto cmp = liouville::compare_and_order(exact, runs);
    REQUIRE(cmp.runs.size() == 3);
    REQUIRE(cmp.observed_order_sup.size() == 2);
    for (double o : cmp.observed_order_sup) {
        CHECK(o >= 1.7);
        CHECK(o <= 2.3);
    }
    CHECK(cmp.runs[2].sup < cmp.runs[0].sup);

    std::vector<GridField> bad{runs[0], runs[2]};
    CHECK_THROWS_AS(liouville::compare_and_order(exact, bad), std::invalid_argument);
}

TEST_CASE("backward runs cover negative times") {
    const InitialData d{parse_expression("0.2*sin(x)"), parse_expression("0.1*cos(x)"), 2.0};
    const GridField fwd = fd_solve(d, 1.0, 0.5, 0.02, 0.5, false);
    const GridField bwd = fd_solve(d, 1.0, 0.5, 0.02, 0.5, true);
    CHECK(fwd.time_of(fwd.steps()) > 0.0);
    CHECK(bwd.time_of(bwd.steps()) < 0.0);

    const SolutionField exact = solve_cauchy(d, 1.0, 1.0, 1e-10);
    CHECK(fd_run_error(exact, fwd).sup <= 5e-3);
    CHECK(fd_run_error(exact, bwd).sup <= 5e-3);
}

TEST_CASE("first layer reproduces the time derivative to first order") {
    const InitialData d{parse_expression("sin(x)"), parse_expression("cos(2*x)"), 1.0};
    for (double h : {0.02, 0.01}) {
        const GridField g = fd_solve(d, 1.0, 0.5, h, 0.5);
        double worst = 0.0;
        const auto& l0 = g.layers[0];
        const auto& l1 = g.layers[1];
        for (std::size_t j = 0; j < l1.size(); ++j) {
            const double x = g.x_of(1, j);
            if (std::fabs(x) > 1.0) continue;
            const double slope = (l1[j] - l0[j + 1]) / g.k;
            worst = std::max(worst, std::fabs(slope - std::cos(2.0 * x)));
        }
        CHECK(worst <= 5.0 * g.k);
    }
}

TEST_CASE("determinism: identical inputs give identical grids") {
    const InitialData d{parse_expression("0.3*sin(x)"), parse_expression("0.2*cos(x)"), 2.0};
    const GridField a = fd_solve(d, 1.0, 1.0, 0.02, 0.5);
    const GridField b = fd_solve(d, 1.0, 1.0, 0.02, 0.5);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t n = 0; n < a.layers.size(); ++n) {
        REQUIRE(a.layers[n].size() == b.layers[n].size());
        for (std::size_t j = 0; j < a.layers[n].size(); ++j)
            CHECK(a.layers[n][j] == b.layers[n][j]);
    }
}

TEST_CASE("guards: CFL, extents, blow-up, dependence domain") {
    CHECK_THROWS_AS(fd_solve(constant_data(), 1.0, 1.0, 0.02, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(fd_solve(constant_data(), -1.0, 1.0, 0.02, 0.5), std::invalid_argument);
    const InitialData hot{SmoothExpr::constant(700.0), SmoothExpr::constant(0.0), 2.0};
    CHECK_THROWS_AS(fd_solve(hot, 0.5, 0.5, 0.05, 0.5), liouville::integration_error);

    // data undefined on the full dependence domain (width 1 + T/lambda = 3)
    const InitialData narrow{parse_expression("log(x+2.2)"), SmoothExpr::constant(0.0), 2.0};
    CHECK_THROWS_AS(fd_solve(narrow, 1.0, 1.0, 0.02, 0.5), liouville::eval_error);
}

TEST_CASE("grid dump format matches the field dump layout") {
    const GridField g = fd_solve(constant_data(), 0.5, 0.25, 0.25, 0.5);
    std::ostringstream ss;
    liouville::write_grid_field_csv(ss, g);
    std::istringstream in(ss.str());
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "t,x,F");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    int expected = 0;
    for (const auto& layer : g.layers) expected += static_cast<int>(layer.size());
    CHECK(rows == expected);
}
