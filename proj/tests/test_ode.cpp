#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "liouville/ode.hpp"

using liouville::FundamentalSolution;
using liouville::Jet;
using liouville::ScaledReal;
using liouville::SmoothExpr;
using liouville::integrate_fundamental;
using liouville::parse_expression;
using liouville::wronskian_defect;

namespace {

// independent power-series oracle for g'' = x g, g(0)=1, g'(0)=0:
// (k+2)(k+1) a_{k+2} = a_{k-1}
double airy_like_series(double x) {
    std::vector<double> a(64, 0.0);
    a[0] = 1.0;
    for (std::size_t k = 1; k + 2 < a.size(); ++k) a[k + 2] = a[k - 1] / ((k + 2.0) * (k + 1.0));
    double sum = 0.0, p = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += a[k] * p;
        p *= x;
    }
    return sum;
}

}  // namespace

TEST_CASE("free potential integrates the straight line") {
    const FundamentalSolution s =
        integrate_fundamental(SmoothExpr::constant(0.0), 0.0, 1.0, 2.0, 1e-10);
    auto [g, gp] = s.eval_scaled(2.0);
    CHECK(g.to_double() == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(gp.to_double() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(s.trajectory().front().x == -2.0);
    CHECK(s.trajectory().back().x == 2.0);
}

TEST_CASE("constant potential matches the closed form") {
    const SmoothExpr u = parse_expression("0.25");
    const FundamentalSolution s = integrate_fundamental(u, 0.0, 1.0, 1.0, 1e-10);
    auto [g, gp] = s.eval_scaled(1.0);
    CHECK(g.to_double() == Catch::Approx(2.0 * std::sinh(0.5)).epsilon(1e-10));
    CHECK(g.to_double() == Catch::Approx(1.04219061).margin(5e-8));

    // dense output between nodes
    for (double x = -1.0; x <= 1.0; x += 0.037) {
        auto [gv, gd] = s.eval_scaled(x);
        CHECK(gv.to_double() == Catch::Approx(2.0 * std::sinh(0.5 * x)).margin(1e-10));
        CHECK(gd.to_double() == Catch::Approx(std::cosh(0.5 * x)).margin(1e-10));
    }
}

TEST_CASE("initial data is reproduced exactly at the anchor") {
    const FundamentalSolution s =
        integrate_fundamental(parse_expression("sin(x)"), 0.75, -0.25, 1.5, 1e-8);
    auto [g, gp] = s.eval_scaled(0.0);
    CHECK(g.to_double() == 0.75);
    CHECK(gp.to_double() == -0.25);
}

TEST_CASE("linear potential agrees with the power-series oracle") {
    const FundamentalSolution s =
        integrate_fundamental(parse_expression("x"), 1.0, 0.0, 1.0, 1e-10);
    auto [g, gp] = s.eval_scaled(1.0);
    CHECK(g.to_double() == Catch::Approx(airy_like_series(1.0)).margin(1e-9));
    CHECK(g.to_double() == Catch::Approx(1.1723000).margin(1e-7));
}

TEST_CASE("derivative jets follow the recurrence and closed forms") {
    const FundamentalSolution line =
        integrate_fundamental(SmoothExpr::constant(0.0), 0.0, 1.0, 2.0, 1e-10);
    const Jet j0 = line.derivative_jet(1.5, 3);
    CHECK(j0.values[0] == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(j0.values[1] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(j0.values[2] == Catch::Approx(0.0).margin(1e-12));
    CHECK(j0.values[3] == Catch::Approx(0.0).margin(1e-12));

    const FundamentalSolution cosh_like =
        integrate_fundamental(parse_expression("0.25"), 1.0, 0.0, 1.0, 1e-10);
    const Jet j1 = cosh_like.derivative_jet(1.0, 2);
    CHECK(j1.values[0] == Catch::Approx(std::cosh(0.5)).margin(1e-10));
    CHECK(j1.values[1] == Catch::Approx(0.5 * std::sinh(0.5)).margin(1e-10));
    CHECK(j1.values[2] == Catch::Approx(0.25 * std::cosh(0.5)).margin(1e-10));
    CHECK(j1.values[0] == Catch::Approx(1.12762597).margin(5e-8));
    CHECK(j1.values[1] == Catch::Approx(0.26054765).margin(5e-8));
    CHECK(j1.values[2] == Catch::Approx(0.28190649).margin(5e-8));

    const FundamentalSolution airy =
        integrate_fundamental(parse_expression("x"), 1.0, 0.0, 1.0, 1e-10);
    const Jet j2 = airy.derivative_jet(0.0, 3);
    CHECK(j2.values[0] == 1.0);
    CHECK(j2.values[1] == 0.0);
    CHECK(j2.values[2] == Catch::Approx(0.0).margin(1e-12));
    CHECK(j2.values[3] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Wronskian is invariant") {
    const SmoothExpr zero = SmoothExpr::constant(0.0);
    const FundamentalSolution sx = integrate_fundamental(zero, 0.0, 1.0, 6.0, 1e-10);
    const FundamentalSolution s1 = integrate_fundamental(zero, 1.0, 0.0, 6.0, 1e-10);
    CHECK(std::fabs(wronskian_defect(sx, s1, 5.0)) <= 1e-12);
    CHECK(wronskian_defect(sx, s1, 0.0) == 0.0);

    const SmoothExpr quarter = parse_expression("0.25");
    const FundamentalSolution a = integrate_fundamental(quarter, 0.0, 1.0, 3.5, 1e-10);
    const FundamentalSolution b = integrate_fundamental(quarter, 1.0, 0.0, 3.5, 1e-10);
    CHECK(std::fabs(wronskian_defect(a, b, 3.0)) <= 1e-9);

    // oscillatory potential, many sample points
    const SmoothExpr osc = parse_expression("sin(x)+0.5");
    const FundamentalSolution c = integrate_fundamental(osc, 0.3, 1.0, 5.0, 1e-10);
    const FundamentalSolution d = integrate_fundamental(osc, 1.0, -0.2, 5.0, 1e-10);
    for (double x = -5.0; x <= 5.0; x += 0.25)
        CHECK(std::fabs(wronskian_defect(c, d, x)) <= 10.0 * 1e-10);

    const FundamentalSolution other = integrate_fundamental(zero, 0.0, 1.0, 3.5, 1e-10);
    CHECK_THROWS_AS(wronskian_defect(a, other, 1.0), std::invalid_argument);
}

TEST_CASE("solutions are linear in the initial data") {
    const SmoothExpr u = parse_expression("cos(x)");
    const double tol = 1e-10;
    const FundamentalSolution s1 = integrate_fundamental(u, 0.4, -1.1, 4.0, tol);
    const FundamentalSolution s2 = integrate_fundamental(u, -0.7, 2.3, 4.0, tol);
    const FundamentalSolution sum = integrate_fundamental(u, -0.3, 1.2, 4.0, tol);
    for (double x = -4.0; x <= 4.0; x += 0.5) {
        auto [g1, g1p] = s1.eval_scaled(x);
        auto [g2, g2p] = s2.eval_scaled(x);
        auto [gs, gsp] = sum.eval_scaled(x);
        const double scale = std::max({1.0, std::fabs(gs.to_double()), std::fabs(gsp.to_double())});
        CHECK(std::fabs(g1.to_double() + g2.to_double() - gs.to_double()) <= 10 * tol * scale);
        CHECK(std::fabs(g1p.to_double() + g2p.to_double() - gsp.to_double()) <= 10 * tol * scale);
    }
}

TEST_CASE("scaled storage survives far beyond the double range") {
    // g = cosh(2x): at x = 400 the value is ~ e^800, unrepresentable in double
    const FundamentalSolution s =
        integrate_fundamental(SmoothExpr::constant(4.0), 1.0, 0.0, 400.0, 1e-10);
    auto [g, gp] = s.eval_scaled(400.0);
    const double expected_log = 800.0 - std::log(2.0);
    CHECK(g.log_abs() == Catch::Approx(expected_log).margin(1e-5));
    CHECK_THROWS_AS(g.to_double(), std::overflow_error);
    CHECK_THROWS_AS(s.derivative_jet(400.0, 2), std::overflow_error);

    const FundamentalSolution partner =
        integrate_fundamental(SmoothExpr::constant(4.0), 0.0, 1.0, 400.0, 1e-10);
    CHECK(std::fabs(wronskian_defect(partner, s, 400.0)) <= 1e-6);
}

TEST_CASE("argument and option validation") {
    const SmoothExpr zero = SmoothExpr::constant(0.0);
    CHECK_THROWS_AS(integrate_fundamental(zero, 0, 1, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_fundamental(zero, 0, 1, -1.0, 1e-10), std::invalid_argument);
    CHECK_THROWS_AS(integrate_fundamental(parse_expression("log(x)"), 0, 1, 1.0, 1e-10),
                    liouville::eval_error);

    const FundamentalSolution s = integrate_fundamental(zero, 0.0, 1.0, 1.0, 1e-10);
    CHECK_THROWS_AS(s.eval_scaled(1.5), std::out_of_range);
    CHECK_THROWS_AS(s.derivative_jet(0.0, 17), liouville::order_cap_error);
}

TEST_CASE("fixed-step fallback is deterministic") {
    liouville::OdeOptions opts;
    opts.fixed_step = true;
    opts.fixed_step_size = 1e-3;
    const SmoothExpr u = parse_expression("0.25");
    const FundamentalSolution a = integrate_fundamental(u, 0.0, 1.0, 1.0, 1e-8, opts);
    const FundamentalSolution b = integrate_fundamental(u, 0.0, 1.0, 1.0, 1e-8, opts);
    REQUIRE(a.trajectory().size() == b.trajectory().size());
    for (std::size_t i = 0; i < a.trajectory().size(); ++i) {
        CHECK(a.trajectory()[i].x == b.trajectory()[i].x);
        CHECK(a.trajectory()[i].g.mantissa() == b.trajectory()[i].g.mantissa());
        CHECK(a.trajectory()[i].g.exponent() == b.trajectory()[i].g.exponent());
    }
    auto [g, gp] = a.eval_scaled(1.0);
    CHECK(g.to_double() == Catch::Approx(2.0 * std::sinh(0.5)).margin(1e-9));
}
