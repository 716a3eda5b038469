// Command-line front end: constructs solutions of the 2-d Liouville equation
// from Cauchy data and runs the verification suites.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "liouville/liouville.hpp"

namespace {

using liouville::CommandResult;
using liouville::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--f1", cfg.f1, "F(0,x) as an expression in x (default 0)");
    cmd->add_option("--f2", cfg.f2, "dF/dt(0,x) as an expression in x (default 0)");
    cmd->add_option("-m,--mass", cfg.m, "mass parameter, > 0")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", cfg.alpha, "spatial compact radius")->check(CLI::PositiveNumber);
    cmd->add_option("--tmax", cfg.tmax, "time extent (default: alpha)");
    cmd->add_option("--grid", cfg.grid, "grid points per unit length")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", cfg.tol, "ODE tolerance, in (0, 1e-4]")->check(CLI::PositiveNumber);
    cmd->add_option("--jet-order", cfg.jet_order, "derivative columns in field dumps (0..8)")
        ->check(CLI::Range(0, 8));
    cmd->add_option("--out", cfg.out, "output path (default: stdout)");
    cmd->add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

int emit(const RunConfig& cfg, const std::string& payload) {
    if (cfg.out.empty()) {
        std::cout << payload;
        return 0;
    }
    std::ofstream os(cfg.out);
    if (!os) {
        std::cerr << "error: cannot open output path '" << cfg.out << "'\n";
        return 2;
    }
    os << payload;
    return 0;
}

std::string metrics_csv(const nlohmann::json& report) {
    std::ostringstream ss;
    ss << "key,value\n";
    for (const auto& [k, v] : report.at("metrics").items())
        if (v.is_number() || v.is_boolean()) ss << k << ',' << v.dump() << '\n';
    ss << "pass," << report.at("pass").dump() << '\n';
    return ss.str();
}

int finish(const RunConfig& cfg, const CommandResult& result, bool csv_default) {
    const bool want_csv = cfg.format.empty() ? csv_default : cfg.format == "csv";
    std::string payload;
    if (want_csv)
        payload = result.table_csv.empty() ? metrics_csv(result.report) : result.table_csv;
    else
        payload = result.report.dump(2) + "\n";
    const int io_status = emit(cfg, payload);
    if (io_status != 0) return io_status;
    return result.pass ? 0 : 1;
}

int run_solve(const RunConfig& cfg) {
    const liouville::InitialData d{liouville::parse_expression(cfg.f1),
                                   liouville::parse_expression(cfg.f2), cfg.m};
    const liouville::SolutionField field =
        liouville::solve_cauchy(d, cfg.alpha, cfg.time_extent(), cfg.tol);

    if (!cfg.dump_ode.empty()) {
        for (const auto& [name, solution] :
             {std::pair{".g2.csv", &field.quartet().g2()}, std::pair{".g4.csv", &field.quartet().g4()}}) {
            std::ofstream os(cfg.dump_ode + name);
            if (!os) {
                std::cerr << "error: cannot open '" << cfg.dump_ode + name << "'\n";
                return 2;
            }
            liouville::write_ode_csv(os, *solution);
        }
    }

    const int nt = 2 * static_cast<int>(cfg.time_extent() * cfg.grid) + 1;
    const int nx = 2 * cfg.alpha * cfg.grid + 1;
    std::ostringstream ss;
    liouville::write_field_csv(ss, field, nt, nx, cfg.jet_order);

    CommandResult result;
    result.pass = true;
    result.table_csv = ss.str();
    result.report = {{"command", "solve"},
                     {"config_echo", cfg.echo()},
                     {"metrics", {{"rows", nt * nx}, {"nt", nt}, {"nx", nx}}},
                     {"pass", true},
                     {"table", result.table_csv}};
    return finish(cfg, result, /*csv_default=*/true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact smooth solutions of the 2-d Liouville equation from Cauchy data"};
    app.require_subcommand(1);

    RunConfig cfg;

    CLI::App* solve = app.add_subcommand("solve", "construct a solution and dump the field grid");
    add_common_options(solve, cfg);
    solve->add_option("--dump-ode", cfg.dump_ode,
                      "also dump the fundamental-solution trajectories to STEM.g2.csv/.g4.csv");

    CLI::App* verify = app.add_subcommand(
        "verify", "residual, Wronskian, positivity and trace-identity checks");
    add_common_options(verify, cfg);

    CLI::App* roundtrip =
        app.add_subcommand("roundtrip", "reconstruct the Cauchy data from the solution");
    add_common_options(roundtrip, cfg);

    CLI::App* converge = app.add_subcommand(
        "converge", "seminorm convergence table for the family 2^-n * (f1, f2)");
    add_common_options(converge, cfg);
    converge->add_option("--levels", cfg.levels, "largest n in the family (default 10)")
        ->check(CLI::PositiveNumber);

    CLI::App* fdb =
        app.add_subcommand("fdb", "validate the combinatorial derivative formulas");
    CLI::App* fdb_verify = fdb->add_subcommand("verify", "pass/fail table per formula and order");
    fdb_verify->add_option("--max-order", cfg.fdb_max_order, "largest order checked (default 6)")
        ->check(CLI::Range(1, 12));
    fdb->add_option("--max-order", cfg.fdb_max_order, "largest order checked (default 6)")
        ->check(CLI::Range(1, 12));
    fdb->add_option("--out", cfg.out, "output path (default: stdout)");
    fdb->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* oracle = app.add_subcommand(
        "oracle", "finite-difference cross-check with step-halving convergence orders");
    add_common_options(oracle, cfg);
    oracle->add_option("--step", cfg.oracle_h, "coarsest spatial step (default 0.02)")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--courant", cfg.oracle_lambda, "Courant ratio k/h in (0,1]")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) {
            cfg.command = "solve";
            return run_solve(cfg);
        }
        if (verify->parsed()) {
            cfg.command = "verify";
            return finish(cfg, liouville::run_verify(cfg), false);
        }
        if (roundtrip->parsed()) {
            cfg.command = "roundtrip";
            return finish(cfg, liouville::run_roundtrip(cfg), false);
        }
        if (converge->parsed()) {
            cfg.command = "converge";
            return finish(cfg, liouville::run_converge(cfg), true);
        }
        if (fdb->parsed()) {
            cfg.command = "fdb";
            return finish(cfg, liouville::run_fdb(cfg), true);
        }
        if (oracle->parsed()) {
            cfg.command = "oracle";
            return finish(cfg, liouville::run_oracle(cfg), false);
        }
    } catch (const liouville::parse_error& e) {
        std::cerr << "expression error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
