#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "liouville/detail/parallel.hpp"
#include "liouville/faa_di_bruno.hpp"
#include "liouville/fd_oracle.hpp"
#include "liouville/ode.hpp"
#include "liouville/seminorm.hpp"
#include "liouville/solution_map.hpp"

namespace liouville {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    if (n == 1) {
        xs[0] = a;
        return xs;
    }
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = a + (b - a) * i / static_cast<double>(n - 1);
    return xs;
}

inline std::string partial_column_name(int bt, int bx) {
    const int o = bt + bx;
    std::string s = "d";
    if (o > 1) s += std::to_string(o);
    s += "F_";
    if (bt > 0) {
        s += "dt";
        if (bt > 1) s += std::to_string(bt);
    }
    if (bx > 0) {
        s += "dx";
        if (bx > 1) s += std::to_string(bx);
    }
    return s;
}

// independent partition counter (no enumeration): p(n) by the part-capped
// recursion
inline long long partition_count(int n) {
    std::vector<std::vector<long long>> dp(static_cast<std::size_t>(n) + 1,
                                           std::vector<long long>(static_cast<std::size_t>(n) + 1, 0));
    for (int cap = 0; cap <= n; ++cap) dp[0][static_cast<std::size_t>(cap)] = 1;
    for (int rem = 1; rem <= n; ++rem)
        for (int cap = 1; cap <= n; ++cap) {
            long long v = dp[static_cast<std::size_t>(rem)][static_cast<std::size_t>(cap) - 1];
            if (rem >= cap) v += dp[static_cast<std::size_t>(rem - cap)][static_cast<std::size_t>(cap)];
            dp[static_cast<std::size_t>(rem)][static_cast<std::size_t>(cap)] = v;
        }
    return dp[static_cast<std::size_t>(n)][static_cast<std::size_t>(n)];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

/// Trajectory dump: x, g_mantissa, g_exp, gp_mantissa, gp_exp.
inline void write_ode_csv(std::ostream& os, const FundamentalSolution& s) {
    os << "x,g_mantissa,g_exp,gp_mantissa,gp_exp\n";
    for (const auto& n : s.trajectory())
        os << detail::fmt(n.x) << ',' << detail::fmt(n.g.mantissa()) << ',' << n.g.exponent() << ','
           << detail::fmt(n.gp.mantissa()) << ',' << n.gp.exponent() << '\n';
}

/// Field dump over a (t, x) grid, row-major in t then x:
/// t,x,F[,dF_dt,dF_dx,...higher orders...].
inline void write_field_csv(std::ostream& os, const SolutionField& field, int nt, int nx,
                            int jet_order = 0) {
    const std::vector<double> ts = detail::linspace(-field.time_extent(), field.time_extent(), nt);
    const std::vector<double> xs =
        detail::linspace(-field.spatial_radius(), field.spatial_radius(), nx);

    os << "t,x,F";
    for (int o = 1; o <= jet_order; ++o)
        for (int bt = o; bt >= 0; --bt) {
            const int bx = o - bt;
            if (bt + bx == o) os << ',' << detail::partial_column_name(bt, bx);
        }
    os << '\n';

    std::vector<std::string> rows(ts.size() * xs.size());
    detail::parallel_for(rows.size(), [&](std::size_t i) {
        const double t = ts[i / xs.size()];
        const double x = xs[i % xs.size()];
        std::string line = detail::fmt(t) + ',' + detail::fmt(x);
        if (jet_order == 0) {
            line += ',' + detail::fmt(field.value(t, x));
        } else {
            const auto table = field.partial_table(t, x, jet_order);
            line += ',' + detail::fmt(table[0][0]);
            for (int o = 1; o <= jet_order; ++o)
                for (int bt = o; bt >= 0; --bt) {
                    const int bx = o - bt;
                    line += ',' + detail::fmt(table[static_cast<std::size_t>(bt)]
                                                   [static_cast<std::size_t>(bx)]);
                }
        }
        rows[i] = std::move(line);
    });
    for (const auto& r : rows) os << r << '\n';
}

/// Finite-difference grid dump in the same t,x,F layout as the field dump.
inline void write_grid_field_csv(std::ostream& os, const GridField& g) {
    os << "t,x,F\n";
    for (int n = 0; n <= g.steps(); ++n) {
        const auto& layer = g.layers[static_cast<std::size_t>(n)];
        for (std::size_t j = 0; j < layer.size(); ++j)
            os << detail::fmt(g.time_of(n)) << ',' << detail::fmt(g.x_of(n, j)) << ','
               << detail::fmt(layer[j]) << '\n';
    }
}

/// Convergence table: n, alpha, beta1, beta2, input_dist, output_dist.
inline void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
    os << "n,alpha,beta1,beta2,input_dist,output_dist\n";
    for (const auto& r : table.rows)
        os << r.n << ',' << r.idx.alpha << ',' << r.idx.beta[0] << ',' << r.idx.beta[1] << ','
           << detail::fmt(r.input_dist) << ',' << detail::fmt(r.output_dist) << '\n';
}

inline nlohmann::json diagnostics_json(const DiagnosticsReport& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ident : rep.identities)
        arr.push_back({{"name", ident.name},
                       {"max_defect", ident.max_defect},
                       {"argmax_point", ident.argmax}});
    return arr;
}

// ---------------------------------------------------------------------------
// Command runners shared by the CLI and the integration tests.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string command;
    std::string f1 = "0";
    std::string f2 = "0";
    double m = 2.0;
    int alpha = 2;
    double tmax = -1.0;  // < 0: defaults to alpha
    int grid = 64;       // points per unit length
    double tol = 1e-10;
    int jet_order = 0;
    std::string out;     // empty: stdout
    std::string format;  // "csv" or "json"; empty: command default
    std::string dump_ode;
    int fdb_max_order = 6;
    double oracle_h = 0.02;
    double oracle_lambda = 0.5;
    int levels = 10;

    double time_extent() const { return tmax < 0.0 ? static_cast<double>(alpha) : tmax; }

    nlohmann::json echo() const {
        return {{"f1", f1},     {"f2", f2},   {"m", m},
                {"alpha", alpha}, {"tmax", time_extent()}, {"grid", grid},
                {"tol", tol},   {"jet_order", jet_order}};
    }
};

struct CommandResult {
    bool pass = true;
    nlohmann::json report;
    std::string table_csv;  // payload for csv-producing commands
};

namespace detail {

inline InitialData parse_data(const RunConfig& cfg) {
    return InitialData{parse_expression(cfg.f1), parse_expression(cfg.f2), cfg.m};
}

}  // namespace detail

/// Tolerances the `verify` suite holds its metrics to.
struct VerifyTolerances {
    double residual = 1e-6;
    double wronskian = 1e-8;
    double aleph = 1e-8;
    double diagnostics = 1e-8;
};

inline CommandResult run_verify(const RunConfig& cfg, const VerifyTolerances& tols = {}) {
    const InitialData d = detail::parse_data(cfg);
    const double alpha = cfg.alpha, tmax = cfg.time_extent();
    const SolutionField field = solve_cauchy(d, alpha, tmax, cfg.tol);
    const Quartet& q = field.quartet();

    // residual + positivity sweep
    const int nx = 2 * cfg.alpha * cfg.grid + 1;
    const int nt = std::max(3, static_cast<int>(2 * tmax * cfg.grid) + 1);
    const std::vector<double> xs = detail::linspace(-alpha, alpha, nx);
    const std::vector<double> ts = detail::linspace(-tmax, tmax, nt);
    std::vector<double> res(xs.size() * ts.size()), pos(xs.size() * ts.size());
    detail::parallel_for(res.size(), [&](std::size_t i) {
        const double t = ts[i / xs.size()], x = xs[i % xs.size()];
        res[i] = std::fabs(field.residual(t, x));
        pos[i] = field.positivity(t, x);
    });
    double residual_sup = 0.0, positivity_min = pos.empty() ? 0.0 : pos[0];
    for (std::size_t i = 0; i < res.size(); ++i) {
        residual_sup = std::max(residual_sup, res[i]);
        positivity_min = std::min(positivity_min, pos[i]);
    }

    // Wronskian defects over the full quartet domain
    const std::vector<double> ws = detail::linspace(-q.radius(), q.radius(), 241);
    double wron24 = 0.0, wron13 = 0.0;
    for (double x : ws) {
        wron24 = std::max(wron24, std::fabs(q.wronskian24_defect(x)));
        wron13 = std::max(wron13, std::fabs(q.wronskian13_defect(x)));
    }

    // aleph identity
    double aleph_rel = 0.0;
    for (double x : detail::linspace(-alpha, alpha, 201)) {
        const double expected = (4.0 / d.m) * std::exp(-0.5 * d.f1(x));
        aleph_rel = std::max(aleph_rel, std::fabs(q.aleph(x).to_double() / expected - 1.0));
    }

    const DiagnosticsReport diag = diagnostics(d, q, detail::linspace(-alpha, alpha, 100));

    CommandResult out;
    out.pass = residual_sup <= tols.residual && wron24 <= tols.wronskian &&
               wron13 <= tols.wronskian && positivity_min > 0.0 && aleph_rel <= tols.aleph &&
               diag.max_defect() <= tols.diagnostics;
    out.report = {{"command", "verify"},
                  {"config_echo", cfg.echo()},
                  {"metrics",
                   {{"residual_sup", residual_sup},
                    {"wronskian_g2g4", wron24},
                    {"wronskian_g1g3", wron13},
                    {"positivity_min", positivity_min},
                    {"aleph_rel_defect", aleph_rel},
                    {"diagnostics", diagnostics_json(diag)}}},
                  {"pass", out.pass}};
    return out;
}

inline CommandResult run_roundtrip(const RunConfig& cfg, double tolerance = 1e-7) {
    const InitialData d = detail::parse_data(cfg);
    const SolutionField field = solve_cauchy(d, cfg.alpha, cfg.time_extent(), cfg.tol);
    const std::vector<double> xs = detail::linspace(-cfg.alpha, cfg.alpha, 121);
    const auto traces = restrict_initial(field, xs);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        e1 = std::max(e1, std::fabs(traces[i].first - d.f1(xs[i])));
        e2 = std::max(e2, std::fabs(traces[i].second - d.f2(xs[i])));
    }
    CommandResult out;
    out.pass = e1 <= tolerance && e2 <= tolerance;
    out.report = {{"command", "roundtrip"},
                  {"config_echo", cfg.echo()},
                  {"metrics", {{"sup_err_f1", e1}, {"sup_err_f2", e2}, {"tolerance", tolerance}}},
                  {"pass", out.pass}};
    return out;
}

inline CommandResult run_converge(const RunConfig& cfg) {
    const InitialData base = detail::parse_data(cfg);
    const InitialData target{SmoothExpr::constant(0.0), SmoothExpr::constant(0.0), cfg.m};

    std::vector<InitialData> family;
    for (int n = 0; n <= cfg.levels; ++n) {
        const SmoothExpr scale = SmoothExpr::constant(std::ldexp(1.0, -n));
        family.push_back(InitialData{scale * base.f1, scale * base.f2, cfg.m});
    }

    std::vector<SeminormIndex> indices;
    for (int al = 1; al <= std::min(cfg.alpha, 2); ++al)
        for (int o = 0; o <= 3; ++o)
            for (int bt = 0; bt <= o; ++bt) indices.push_back({al, {bt, o - bt}});

    const GridSpec grid{cfg.grid};
    const ConvergenceTable table = convergence_study(family, target, indices, grid, cfg.tol);

    bool monotone = true;
    bool decayed = true;
    for (const auto& col : table.columns) {
        monotone = monotone && col.monotone_decreasing;
        if (cfg.levels >= 10) decayed = decayed && col.last <= 1e-3 * col.first;
    }

    std::string csv;
    {
        std::ostringstream ss;
        write_convergence_csv(ss, table);
        csv = ss.str();
    }

    nlohmann::json cols = nlohmann::json::array();
    for (const auto& col : table.columns)
        cols.push_back({{"alpha", col.idx.alpha},
                        {"beta", col.idx.beta},
                        {"monotone_decreasing", col.monotone_decreasing},
                        {"first", col.first},
                        {"last", col.last}});

    CommandResult out;
    out.pass = monotone && decayed;
    out.table_csv = std::move(csv);
    out.report = {{"command", "converge"},
                  {"config_echo", cfg.echo()},
                  {"metrics", {{"columns", cols}, {"monotone", monotone}, {"decayed", decayed}}},
                  {"pass", out.pass}};
    return out;
}

inline CommandResult run_fdb(const RunConfig& cfg) {
    const int maxo = std::min(cfg.fdb_max_order, kMax1dFormulaOrder);
    nlohmann::json rows = nlohmann::json::array();
    bool pass = true;
    std::ostringstream table;
    table << "order  |R(b)|=p(b)  exp_formula  log_formula  mixed_full  mixed_endpoint_only\n";

    const SmoothExpr h = parse_expression("x^3-x+0.5");
    const SmoothExpr j1 = parse_expression("x+x^3");
    const SmoothExpr exp_h = SmoothExpr::exp(h);
    const SmoothExpr log_jp = SmoothExpr::log(SmoothExpr::constant(1.0) + j1);
    const double x0 = 0.3;

    // bivariate sample for the mixed formula: J(t,x) = t*x + t^2*x/2 + x^2/4
    const auto mixed_table = [](double t, double x, int gamma, int beta) {
        std::vector<std::vector<double>> jt(static_cast<std::size_t>(gamma) + 1,
                                            std::vector<double>(static_cast<std::size_t>(beta) + 1,
                                                                0.0));
        // monomials c * t^p x^q
        const double coef[3] = {1.0, 0.5, 0.25};
        const int pw[3][2] = {{1, 1}, {2, 1}, {0, 2}};
        for (int mterm = 0; mterm < 3; ++mterm)
            for (int a = 0; a <= gamma; ++a)
                for (int b = 0; b <= beta; ++b) {
                    const int p = pw[mterm][0], q = pw[mterm][1];
                    if (a > p || b > q) continue;
                    double c = coef[mterm];
                    for (int i = 0; i < a; ++i) c *= (p - i);
                    for (int i = 0; i < b; ++i) c *= (q - i);
                    jt[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                        c * std::pow(t, p - a) * std::pow(x, q - b);
                }
        return jt;
    };

    for (int beta = 1; beta <= maxo; ++beta) {
        const CompositionSet r = enumerate_compositions(CompositionKind::partition, beta);
        const bool count_ok =
            static_cast<long long>(r.size()) == detail::partition_count(beta);

        const Jet hj = h.jet(x0, beta);
        const double exp_formula = exp_derivative(hj, beta);
        const double exp_oracle = exp_h.derivative(beta)(x0);
        const bool exp_ok = std::fabs(exp_formula - exp_oracle) <=
                            1e-9 * std::max(1.0, std::fabs(exp_oracle));

        const Jet jj = j1.jet(x0, beta);
        const double log_formula = log_derivative_1d(jj, beta);
        const double log_oracle = log_jp.derivative(beta)(x0);
        const bool log_ok = std::fabs(log_formula - log_oracle) <=
                            1e-9 * std::max(1.0, std::fabs(log_oracle));

        // mixed orders with gamma + beta_x = beta + 1 (so order 1 row covers
        // gamma = beta_x = 1, higher rows sweep the splits)
        bool mixed_ok = true;
        bool endpoint_matches = true;
        for (int gamma = 1; gamma + 1 <= beta + 1; ++gamma) {
            const int bx = beta + 1 - gamma;
            if (bx < 1 || gamma + bx > kMaxMixedFormulaOrder) continue;
            const auto jt = mixed_table(0.5, 0.4, gamma, bx);
            const double full = log_derivative_mixed(jt, gamma, bx);
            const double byjets = log_derivative_mixed_by_jets(jt, gamma, bx);
            const double endpoint = log_derivative_mixed_endpoint_only(jt, gamma, bx);
            if (std::fabs(full - byjets) > 1e-9 * std::max(1.0, std::fabs(byjets)))
                mixed_ok = false;
            if (std::fabs(endpoint - byjets) > 1e-9 * std::max(1.0, std::fabs(byjets)))
                endpoint_matches = false;
        }

        pass = pass && count_ok && exp_ok && log_ok && mixed_ok;
        table << beta << "      " << (count_ok ? "pass" : "FAIL") << "         "
              << (exp_ok ? "pass" : "FAIL") << "         " << (log_ok ? "pass" : "FAIL")
              << "         " << (mixed_ok ? "pass" : "FAIL") << "        "
              << (endpoint_matches ? "match" : "deviates") << '\n';
        rows.push_back({{"order", beta},
                        {"partition_count_ok", count_ok},
                        {"exp_formula_ok", exp_ok},
                        {"log_formula_ok", log_ok},
                        {"mixed_full_ok", mixed_ok},
                        {"mixed_endpoint_only_matches", endpoint_matches}});
    }

    CommandResult out;
    out.pass = pass;
    out.table_csv = table.str();
    out.report = {{"command", "fdb"},
                  {"config_echo", cfg.echo()},
                  {"metrics", {{"rows", rows}, {"max_order", maxo}}},
                  {"pass", pass}};
    return out;
}

inline CommandResult run_oracle(const RunConfig& cfg) {
    const InitialData d = detail::parse_data(cfg);
    const double extent = 1.0;
    const SolutionField field = solve_cauchy(d, extent, extent, cfg.tol);

    std::vector<double> hs{cfg.oracle_h, cfg.oracle_h / 2.0, cfg.oracle_h / 4.0};
    std::vector<FdRunError> errors;
    for (double h : hs) {
        const GridField fwd = fd_solve(d, extent, extent, h, cfg.oracle_lambda, false);
        const GridField bwd = fd_solve(d, extent, extent, h, cfg.oracle_lambda, true);
        FdRunError ef = fd_run_error(field, fwd);
        FdRunError eb = fd_run_error(field, bwd);
        FdRunError merged;
        merged.h = h;
        merged.sup = std::max(ef.sup, eb.sup);
        merged.points = ef.points + eb.points;
        merged.l2 = std::sqrt((ef.l2 * ef.l2 * static_cast<double>(ef.points) +
                               eb.l2 * eb.l2 * static_cast<double>(eb.points)) /
                              static_cast<double>(merged.points));
        errors.push_back(merged);
    }

    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        orders.push_back(std::log2(errors[i].sup / errors[i + 1].sup));

    bool orders_ok = true;
    for (double o : orders) orders_ok = orders_ok && o >= 1.7 && o <= 2.2;
    const bool close = errors.back().sup <= 5e-3;

    nlohmann::json runs = nlohmann::json::array();
    for (const auto& e : errors)
        runs.push_back({{"h", e.h}, {"sup", e.sup}, {"l2", e.l2}, {"points", e.points}});

    CommandResult out;
    out.pass = orders_ok && close;
    out.report = {{"command", "oracle"},
                  {"config_echo", cfg.echo()},
                  {"metrics",
                   {{"runs", runs},
                    {"observed_orders_sup", orders},
                    {"orders_in_window", orders_ok},
                    {"final_sup_le_5e-3", close}}},
                  {"pass", out.pass}};
    return out;
}

}  // namespace liouville
