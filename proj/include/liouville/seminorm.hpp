#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "liouville/detail/parallel.hpp"
#include "liouville/expr.hpp"
#include "liouville/ode.hpp"
#include "liouville/solution_map.hpp"

namespace liouville {

/// Index (alpha, beta) of a seminorm: sup over the compact K_alpha = [-a, a]
/// (or its square) of the beta-th derivative.  beta has one component for
/// functions of one variable, two for fields.
struct SeminormIndex {
    int alpha = 1;
    std::vector<int> beta;
};

struct GridSpec {
    int points_per_unit = 64;
};

template <class F>
concept DerivableFn = requires(const F& f, double x, int k) {
    { f.derivative_value(x, k) } -> std::convertible_to<double>;
};

namespace detail {

inline std::vector<double> grid_1d(int alpha, const GridSpec& g) {
    if (alpha < 1) throw std::invalid_argument("seminorm index alpha must be >= 1");
    if (g.points_per_unit < 1) throw std::invalid_argument("grid density must be positive");
    const int n = 2 * alpha * g.points_per_unit;  // n+1 points, endpoints included
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        xs[static_cast<std::size_t>(i)] = -alpha + 2.0 * alpha * i / static_cast<double>(n);
    return xs;
}

}  // namespace detail

/// Grid maximum of |f^(beta)| over K_alpha; a lower bound of the true sup
/// that converges under grid refinement.
template <DerivableFn F>
double seminorm_1d(const F& f, const SeminormIndex& idx, const GridSpec& g = {}) {
    if (idx.beta.size() != 1) throw std::invalid_argument("seminorm_1d expects a 1-component beta");
    const std::vector<double> xs = detail::grid_1d(idx.alpha, g);
    double best = 0.0;
    for (double x : xs) best = std::max(best, std::fabs(f.derivative_value(x, idx.beta[0])));
    return best;
}

/// Vector-valued variant for the pair (g, g') of a fundamental solution:
/// grid maximum of the Euclidean norm of the beta-th derivative of (g, g').
inline double seminorm_r(const FundamentalSolution& s, const SeminormIndex& idx,
                         const GridSpec& g = {}) {
    if (idx.beta.size() != 1) throw std::invalid_argument("seminorm_r expects a 1-component beta");
    const std::vector<double> xs = detail::grid_1d(idx.alpha, g);
    const int b = idx.beta[0];
    double best = 0.0;
    for (double x : xs) {
        const Jet j = s.derivative_jet(x, b + 1);
        best = std::max(best, std::hypot(j.values[static_cast<std::size_t>(b)],
                                         j.values[static_cast<std::size_t>(b) + 1]));
    }
    return best;
}

/// Grid maximum of |d_t^b1 d_x^b2 F| over K_alpha^2.
template <PartialJetField F>
double seminorm_2d(const F& field, const SeminormIndex& idx, const GridSpec& g = {}) {
    if (idx.beta.size() != 2) throw std::invalid_argument("seminorm_2d expects a 2-component beta");
    const std::vector<double> xs = detail::grid_1d(idx.alpha, g);
    const std::size_t n = xs.size();
    std::vector<double> row_max(n, 0.0);
    detail::parallel_for(n, [&](std::size_t it) {
        double best = 0.0;
        for (double x : xs)
            best = std::max(best, std::fabs(field.partial(xs[it], x, idx.beta[0], idx.beta[1])));
        row_max[it] = best;
    });
    double best = 0.0;
    for (double v : row_max) best = std::max(best, v);
    return best;
}

// ---------------------------------------------------------------------------
// Continuity experiment: distances between the solutions of a family of data
// and the solution of a target datum, per seminorm index.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    int n = 0;
    SeminormIndex idx;
    double input_dist = 0.0;   // p_{alpha,|beta|} distance of the data
    double output_dist = 0.0;  // q_{alpha,beta} distance of the solutions
};

struct ConvergenceColumn {
    SeminormIndex idx;
    bool monotone_decreasing = true;  // non-increasing across the family
    double first = 0.0, last = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::vector<ConvergenceColumn> columns;
};

/// For each family member n and each index (alpha, beta), evaluates
/// q_{alpha,beta}(I(f_n) - I(f_target)) together with the input distance
/// p_{alpha,|beta|}(f_n - f_target) (maximum over the two data components).
inline ConvergenceTable convergence_study(std::span<const InitialData> family,
                                          const InitialData& target,
                                          std::span<const SeminormIndex> indices,
                                          const GridSpec& grid, double tol = 1e-10) {
    for (const auto& d : family)
        if (d.m != target.m)
            throw std::invalid_argument("convergence_study: family must share the mass parameter");
    int alpha_max = 1, order_max = 0;
    for (const auto& idx : indices) {
        if (idx.beta.size() != 2)
            throw std::invalid_argument("convergence_study expects 2-component indices");
        alpha_max = std::max(alpha_max, idx.alpha);
        order_max = std::max(order_max, idx.beta[0] + idx.beta[1]);
    }

    const double a = static_cast<double>(alpha_max);
    const SolutionField target_field = solve_cauchy(target, a, a, tol);

    // cache the target jet tables per alpha grid
    struct PointTable {
        double t, x;
        std::vector<std::vector<double>> jets;
    };
    std::vector<std::vector<PointTable>> target_tables(static_cast<std::size_t>(alpha_max) + 1);
    for (int al = 1; al <= alpha_max; ++al) {
        bool used = false;
        for (const auto& idx : indices) used |= idx.alpha == al;
        if (!used) continue;
        const std::vector<double> xs = detail::grid_1d(al, grid);
        auto& tab = target_tables[static_cast<std::size_t>(al)];
        tab.resize(xs.size() * xs.size());
        detail::parallel_for(tab.size(), [&](std::size_t i) {
            const double t = xs[i / xs.size()];
            const double x = xs[i % xs.size()];
            tab[i] = {t, x, target_field.partial_table(t, x, order_max)};
        });
    }

    ConvergenceTable out;
    std::vector<std::vector<double>> per_column(indices.size());

    for (std::size_t n = 0; n < family.size(); ++n) {
        const SolutionField fn = solve_cauchy(family[n], a, a, tol);
        const SmoothExpr d1 = family[n].f1 - target.f1;
        const SmoothExpr d2 = family[n].f2 - target.f2;

        // output sups per index, sharing one jet sweep per alpha
        std::vector<double> sup(indices.size(), 0.0);
        for (int al = 1; al <= alpha_max; ++al) {
            const auto& tab = target_tables[static_cast<std::size_t>(al)];
            if (tab.empty()) continue;
            std::vector<std::vector<double>> point_sup(tab.size());
            detail::parallel_for(tab.size(), [&](std::size_t i) {
                const auto jets = fn.partial_table(tab[i].t, tab[i].x, order_max);
                std::vector<double> s(indices.size(), 0.0);
                for (std::size_t c = 0; c < indices.size(); ++c) {
                    if (indices[c].alpha != al) continue;
                    const int bt = indices[c].beta[0], bx = indices[c].beta[1];
                    s[c] = std::fabs(jets[static_cast<std::size_t>(bt)][static_cast<std::size_t>(bx)] -
                                     tab[i].jets[static_cast<std::size_t>(bt)]
                                                [static_cast<std::size_t>(bx)]);
                }
                point_sup[i] = std::move(s);
            });
            for (const auto& s : point_sup)
                for (std::size_t c = 0; c < indices.size(); ++c) sup[c] = std::max(sup[c], s[c]);
        }

        for (std::size_t c = 0; c < indices.size(); ++c) {
            const SeminormIndex& idx = indices[c];
            const SeminormIndex in_idx{idx.alpha, {idx.beta[0] + idx.beta[1]}};
            const double input =
                std::max(seminorm_1d(d1, in_idx, grid), seminorm_1d(d2, in_idx, grid));
            out.rows.push_back({static_cast<int>(n), idx, input, sup[c]});
            per_column[c].push_back(sup[c]);
        }
    }

    for (std::size_t c = 0; c < indices.size(); ++c) {
        ConvergenceColumn col;
        col.idx = indices[c];
        const auto& v = per_column[c];
        if (!v.empty()) {
            col.first = v.front();
            col.last = v.back();
            for (std::size_t i = 1; i < v.size(); ++i)
                if (v[i] > v[i - 1]) col.monotone_decreasing = false;
        }
        out.columns.push_back(col);
    }
    return out;
}

}  // namespace liouville
