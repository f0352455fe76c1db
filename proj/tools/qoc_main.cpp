// qoc — optimal-control experiments for a dissipative qubit.
//
//   qoc optimize --functional heating --tau 1 --grid-n 1000 --epsilon 0.1 \
//                --delta 1e-5 --init constant --out runs/heating
//   qoc simulate --protocol runs/heating/protocol.csv --out runs/replay
//   qoc analytic --case heating-optimum --tau 1 --out runs/reference
//
// Exit codes: 0 success/converged, 1 input error, 2 finished without
// convergence. QOC_OUT_DIR, when set, is the default for --out.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qoc/qoc.hpp"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("QOC_OUT_DIR");
    return env && *env ? env : ".";
}

qoc::CostKind parse_kind(const std::string& name) {
    if (name == "heating") return qoc::CostKind::Heating;
    if (name == "dispersion") return qoc::CostKind::Dispersion;
    if (name == "qsl") return qoc::CostKind::Qsl;
    throw CLI::ValidationError("--functional", "expected heating, dispersion, or qsl");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal decay-rate protocols for a dissipative qubit"};
    app.require_subcommand(1);

    qoc::OptimizeConfig opt;
    opt.out_dir = default_out_dir();
    std::string functional = "heating";
    auto* cmd_opt = app.add_subcommand("optimize", "Run the projected steepest-descent optimizer");
    cmd_opt->add_option("--functional", functional, "Cost functional: heating|dispersion|qsl")
        ->check(CLI::IsMember({"heating", "dispersion", "qsl"}));
    cmd_opt->add_option("--tau", opt.tau, "Protocol duration")->check(CLI::PositiveNumber);
    cmd_opt->add_option("--grid-n", opt.grid_n, "Number of grid intervals")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    cmd_opt->add_option("--epsilon", opt.epsilon, "Gradient step size")->check(CLI::PositiveNumber);
    cmd_opt->add_option("--delta", opt.delta, "Termination threshold on |dJ|")
        ->check(CLI::PositiveNumber);
    cmd_opt->add_option("--max-iter", opt.max_iter, "Iteration cap");
    cmd_opt->add_option("--init", opt.init, "'constant' or a protocol CSV file");
    cmd_opt->add_option("--out", opt.out_dir, "Output directory");

    qoc::SimulateConfig sim;
    sim.out_dir = default_out_dir();
    auto* cmd_sim = app.add_subcommand("simulate", "Propagate a protocol file");
    cmd_sim->add_option("--protocol", sim.protocol_path, "Protocol CSV (t,gamma[,lambda])")
        ->required();
    cmd_sim->add_flag("--bloch", sim.bloch, "Integrate the full Bloch equations");
    cmd_sim->add_option("--x0", sim.x0, "Initial Bloch x (with --bloch)");
    cmd_sim->add_option("--y0", sim.y0, "Initial Bloch y (with --bloch)");
    cmd_sim->add_option("--z0", sim.z0, "Initial Bloch z");
    cmd_sim->add_option("--omega0", sim.omega0, "Qubit frequency (with --bloch)")
        ->check(CLI::PositiveNumber);
    cmd_sim->add_option("--out", sim.out_dir, "Output directory");

    qoc::AnalyticConfig ana;
    ana.out_dir = default_out_dir();
    auto* cmd_ana = app.add_subcommand("analytic", "Write closed-form reference results");
    cmd_ana->add_option("--case", ana.case_name,
                        "heating-optimum|dispersion-optimum|minimal-time|costate-oracle")
        ->required();
    cmd_ana->add_option("--tau", ana.tau, "Protocol duration")->check(CLI::PositiveNumber);
    cmd_ana->add_option("--grid-n", ana.grid_n, "Number of grid intervals")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    cmd_ana->add_option("--out", ana.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? qoc::kExitInputError : qoc::kExitOk;
    }

    try {
        if (cmd_opt->parsed()) {
            opt.kind = parse_kind(functional);
            return qoc::run_optimize(opt, std::cout);
        }
        if (cmd_sim->parsed()) return qoc::run_simulate(sim, std::cout);
        return qoc::run_analytic(ana, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qoc::kExitInputError;
    }
}
