#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "liouville/solution_map.hpp"

namespace liouville {

/// Explicit central-difference solution of the field equation on a shrinking
/// light-cone grid (one cell per step on each side, no boundary conditions).
/// Layer n holds F at time time_sign * n * k.
class GridField {
public:
    double h = 0.0;           // spatial step
    double k = 0.0;           // time step
    double lambda = 0.0;      // Courant ratio k/h
    double x_extent = 0.0;    // comparisons are meaningful on [-x_extent, x_extent]
    double t_extent = 0.0;
    int time_sign = +1;       // +1: layers at t >= 0, -1: layers at t <= 0
    double x_left0 = 0.0;     // x of index 0 in layer 0
    std::vector<std::vector<double>> layers;  // layer n: indices n .. M-1-n of layer 0

    int steps() const { return static_cast<int>(layers.size()) - 1; }
    double time_of(int n) const { return time_sign * n * k; }
    double x_of(int n, std::size_t j) const {
        return x_left0 + (static_cast<double>(n) + static_cast<double>(j)) * h;
    }
    double value(int n, std::size_t j) const { return layers[static_cast<std::size_t>(n)][j]; }
};

/// March the explicit scheme
///   F^{n+1}_j = 2F^n_j - F^{n-1}_j + lambda^2 (F^n_{j+1} - 2F^n_j + F^n_{j-1})
///               - k^2 (m^2/2) exp(F^n_j)
/// from layer 0 = f1 and the Taylor first layer
///   F^1_j = f1 + k f2 + (k^2/2)(f1'' - (m^2/2) exp f1).
/// With backward = true the scheme runs toward negative times (equivalent to
/// flipping the sign of f2).
inline GridField fd_solve(const InitialData& d, double x_extent, double t_extent, double h,
                          double lambda, bool backward = false) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_solve: spatial step must be positive");
    if (!(lambda > 0.0) || lambda > 1.0)
        throw std::invalid_argument("fd_solve: CFL violation, lambda must lie in (0, 1]");
    if (!(x_extent > 0.0) || !(t_extent > 0.0))
        throw std::invalid_argument("fd_solve: extents must be positive");

    GridField f;
    f.h = h;
    f.k = lambda * h;
    f.lambda = lambda;
    f.x_extent = x_extent;
    f.t_extent = t_extent;
    f.time_sign = backward ? -1 : +1;

    const int steps = static_cast<int>(std::ceil(t_extent / f.k - 1e-9));
    const int jx = static_cast<int>(std::ceil(x_extent / h - 1e-9));
    const int m0 = 2 * (jx + steps) + 1;  // layer-0 width
    f.x_left0 = -(jx + steps) * h;

    const double mass2 = d.m * d.m;
    const double tdir = backward ? -1.0 : 1.0;

    f.layers.reserve(static_cast<std::size_t>(steps) + 1);

    std::vector<double> prev(static_cast<std::size_t>(m0));
    for (int j = 0; j < m0; ++j) prev[static_cast<std::size_t>(j)] = d.f1(f.x_left0 + j * h);
    f.layers.push_back(prev);

    if (steps == 0) return f;

    std::vector<double> cur(static_cast<std::size_t>(m0) - 2);
    for (int j = 1; j + 1 < m0; ++j) {
        const double x = f.x_left0 + j * h;
        const Jet f1j = d.f1.jet(x, 2);
        const double f2v = d.f2(x);
        const double ftt = f1j.values[2] - 0.5 * mass2 * std::exp(f1j.values[0]);
        cur[static_cast<std::size_t>(j) - 1] =
            f1j.values[0] + tdir * f.k * f2v + 0.5 * f.k * f.k * ftt;
    }
    f.layers.push_back(cur);

    const double l2 = lambda * lambda;
    for (int n = 2; n <= steps; ++n) {
        const std::vector<double>& fm = f.layers[static_cast<std::size_t>(n) - 2];
        const std::vector<double>& fc = f.layers[static_cast<std::size_t>(n) - 1];
        std::vector<double> fn(fc.size() - 2);
        for (std::size_t j = 1; j + 1 < fc.size(); ++j) {
            const double center = fc[j];
            if (std::fabs(center) > 700.0)
                throw integration_error("fd_solve: blow-up guard tripped (|F| > 700)");
            fn[j - 1] = 2.0 * center - fm[j + 1] +
                        l2 * (fc[j + 1] - 2.0 * center + fc[j - 1]) -
                        f.k * f.k * 0.5 * mass2 * std::exp(center);
        }
        f.layers.push_back(std::move(fn));
    }
    return f;
}

/// Per-run discrepancy against a reference field on the run's own grid points
/// restricted to [-x_extent, x_extent].
struct FdRunError {
    double h = 0.0;
    double sup = 0.0;
    double l2 = 0.0;
    std::size_t points = 0;
};

struct FdComparison {
    std::vector<FdRunError> runs;
    std::vector<double> observed_order_sup;  // log2(e_i / e_{i+1})
    std::vector<double> observed_order_l2;
};

template <PartialJetField F>
FdRunError fd_run_error(const F& exact, const GridField& run) {
    FdRunError e;
    e.h = run.h;
    double sum2 = 0.0;
    for (int n = 0; n <= run.steps(); ++n) {
        const auto& layer = run.layers[static_cast<std::size_t>(n)];
        const double t = run.time_of(n);
        for (std::size_t j = 0; j < layer.size(); ++j) {
            const double x = run.x_of(n, j);
            if (std::fabs(x) > run.x_extent + 1e-12) continue;
            const double diff = layer[j] - exact.partial(t, x, 0, 0);
            e.sup = std::max(e.sup, std::fabs(diff));
            sum2 += diff * diff;
            ++e.points;
        }
    }
    e.l2 = e.points > 0 ? std::sqrt(sum2 / static_cast<double>(e.points)) : 0.0;
    return e;
}

/// Discrepancies for a refinement sequence plus the observed convergence
/// orders between consecutive runs.
template <PartialJetField F>
FdComparison compare_and_order(const F& exact, std::span<const GridField> runs) {
    FdComparison c;
    for (const GridField& run : runs) c.runs.push_back(fd_run_error(exact, run));
    for (std::size_t i = 0; i + 1 < c.runs.size(); ++i) {
        if (std::fabs(c.runs[i].h - 2.0 * c.runs[i + 1].h) > 1e-12 * c.runs[i].h)
            throw std::invalid_argument("compare_and_order: runs must halve the step");
        c.observed_order_sup.push_back(std::log2(c.runs[i].sup / c.runs[i + 1].sup));
        c.observed_order_l2.push_back(std::log2(c.runs[i].l2 / c.runs[i + 1].l2));
    }
    return c;
}

}  // namespace liouville
