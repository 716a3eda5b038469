#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "liouville/seminorm.hpp"

using liouville::GridSpec;
using liouville::InitialData;
using liouville::SeminormIndex;
using liouville::SmoothExpr;
using liouville::parse_expression;
using liouville::seminorm_1d;
using liouville::seminorm_2d;
using liouville::seminorm_r;

namespace {

struct PolyField {  // F(t,x) = t^2
    double partial(double t, double, int bt, int bx) const {
        if (bx != 0) return 0.0;
        if (bt == 0) return t * t;
        if (bt == 1) return 2.0 * t;
        if (bt == 2) return 2.0;
        return 0.0;
    }
};

struct MixedField {  // F(t,x) = t*x
    double partial(double t, double x, int bt, int bx) const {
        if (bt == 0 && bx == 0) return t * x;
        if (bt == 1 && bx == 0) return x;
        if (bt == 0 && bx == 1) return t;
        if (bt == 1 && bx == 1) return 1.0;
        return 0.0;
    }
};

}  // namespace

TEST_CASE("1-d seminorms match the worked examples") {
    CHECK(seminorm_1d(parse_expression("x^2"), {1, {1}}) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(seminorm_1d(parse_expression("sin(x)"), {2, {0}}) == Catch::Approx(1.0).margin(1e-4));
    CHECK(seminorm_1d(parse_expression("exp(x)"), {1, {3}}) ==
          Catch::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("2-d seminorms match the worked examples") {
    CHECK(seminorm_2d(PolyField{}, {1, {1, 0}}) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(seminorm_2d(MixedField{}, {1, {1, 1}}) == Catch::Approx(1.0).epsilon(1e-15));

    const InitialData constant{SmoothExpr::constant(0.0), SmoothExpr::constant(0.0), 2.0};
    const auto field = liouville::solve_cauchy(constant, 1.0, 1.0, 1e-10);
    CHECK(seminorm_2d(field, {1, {0, 0}}, GridSpec{32}) ==
          Catch::Approx(2.0 * std::log(std::cosh(1.0))).margin(1e-8));
    CHECK(seminorm_2d(field, {1, {0, 0}}, GridSpec{32}) == Catch::Approx(0.86756167).margin(5e-8));
}

TEST_CASE("vector seminorm combines components euclideanly") {
    const auto s =
        liouville::integrate_fundamental(SmoothExpr::constant(0.0), 0.0, 1.0, 2.0, 1e-10);
    // (g, g') = (x, 1): sup ||(x,1)|| over [-1,1] = sqrt(2)
    CHECK(seminorm_r(s, {1, {0}}) == Catch::Approx(std::sqrt(2.0)).margin(1e-10));
    // derivative (1, 0): norm 1 everywhere
    CHECK(seminorm_r(s, {1, {1}}) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("seminorm axioms hold exactly on grid evaluation") {
    const SmoothExpr f = parse_expression("sin(3*x)+x^2");
    const SmoothExpr g = parse_expression("cos(x)-0.5*x");
    const GridSpec grid{16};
    for (int beta = 0; beta <= 3; ++beta) {
        const SeminormIndex idx{2, {beta}};
        const double pf = seminorm_1d(f, idx, grid);
        const double pg = seminorm_1d(g, idx, grid);

        // absolute homogeneity, exact
        const double c = -2.5;
        CHECK(seminorm_1d(SmoothExpr::constant(c) * f, idx, grid) == std::fabs(c) * pf);

        // triangle inequality, exact on the same grid
        CHECK(seminorm_1d(f + g, idx, grid) <= pf + pg);
    }
}

TEST_CASE("seminorms grow with alpha and refine monotonically") {
    const SmoothExpr f = parse_expression("exp(x)*sin(2*x)");
    for (int beta = 0; beta <= 2; ++beta) {
        const double p1 = seminorm_1d(f, {1, {beta}}, GridSpec{32});
        const double p2 = seminorm_1d(f, {2, {beta}}, GridSpec{32});
        CHECK(p1 <= p2);

        const double coarse = seminorm_1d(f, {2, {beta}}, GridSpec{16});
        const double fine = seminorm_1d(f, {2, {beta}}, GridSpec{32});
        CHECK(coarse <= fine);
    }
}

TEST_CASE("convergence study: identical family collapses to zero") {
    const InitialData target{parse_expression("0.25*sin(x)"), SmoothExpr::constant(0.0), 2.0};
    std::vector<InitialData> family{target, target, target};
    std::vector<SeminormIndex> indices{{1, {0, 0}}, {1, {1, 0}}, {1, {0, 1}}};
    const auto table =
        liouville::convergence_study(family, target, indices, GridSpec{4}, 1e-8);
    REQUIRE(table.rows.size() == family.size() * indices.size());
    for (const auto& row : table.rows) {
        CHECK(row.output_dist == 0.0);
        CHECK(row.input_dist == 0.0);
    }
    for (const auto& col : table.columns) CHECK(col.monotone_decreasing);
}

TEST_CASE("convergence study: halving family decays monotonically") {
    std::vector<InitialData> family;
    for (int n = 0; n <= 3; ++n)
        family.push_back(InitialData{
            SmoothExpr::constant(std::ldexp(1.0, -n)) * parse_expression("sin(x)"),
            SmoothExpr::constant(0.0), 2.0});
    const InitialData target{SmoothExpr::constant(0.0), SmoothExpr::constant(0.0), 2.0};
    std::vector<SeminormIndex> indices{{1, {0, 0}}, {1, {1, 0}}, {1, {0, 1}}, {1, {1, 1}}};
    const auto table = liouville::convergence_study(family, target, indices, GridSpec{8}, 1e-9);

    for (const auto& col : table.columns) {
        CHECK(col.monotone_decreasing);
        CHECK(col.last < col.first);
    }
    // the input column scales exactly by powers of two
    for (std::size_t i = indices.size(); i < table.rows.size(); ++i) {
        const auto& prev = table.rows[i - indices.size()];
        const auto& cur = table.rows[i];
        CHECK(cur.input_dist == Catch::Approx(0.5 * prev.input_dist).epsilon(1e-14));
    }
}

TEST_CASE("index validation and domain errors") {
    CHECK_THROWS_AS(seminorm_1d(parse_expression("x"), {0, {1}}), std::invalid_argument);
    CHECK_THROWS_AS(seminorm_1d(parse_expression("x"), {1, {0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(seminorm_2d(PolyField{}, {1, {1}}), std::invalid_argument);
    // evaluation failure inside K_alpha propagates
    CHECK_THROWS_AS(seminorm_1d(parse_expression("log(x)"), {1, {0}}), liouville::eval_error);
}
