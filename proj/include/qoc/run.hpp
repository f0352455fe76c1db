#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qoc/descent.hpp"
#include "qoc/model.hpp"
#include "qoc/pontryagin.hpp"
#include "qoc/protocol.hpp"
#include "qoc/protocol_io.hpp"
#include "qoc/qsl.hpp"

// In-process command implementations behind the CLI: each run_* validates its
// config, computes, writes artifacts under out_dir, and returns the process
// exit code. Keeping them here (not in main) makes the full pipeline testable
// without spawning processes.

namespace qoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct OptimizeConfig {
    CostKind kind = CostKind::Heating;
    double tau = 1.0;
    std::size_t grid_n = 1000;
    double epsilon = 0.1;
    double delta = 1e-5;
    std::size_t max_iter = 1000;
    std::string init = "constant";  // "constant" or a protocol CSV path
    std::string out_dir = ".";
};

struct SimulateConfig {
    std::string protocol_path;
    bool bloch = false;
    double x0 = 0.0;
    double y0 = 0.0;
    double z0 = 1.0;
    double omega0 = 1.0;
    std::string out_dir = ".";
};

struct AnalyticConfig {
    std::string case_name;  // heating-optimum | dispersion-optimum | minimal-time | costate-oracle
    double tau = 1.0;
    std::size_t grid_n = 1000;
    std::string out_dir = ".";
};

namespace detail {

inline std::string out_path(const std::string& dir, const char* file) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

inline void write_z_trajectory_csv(const std::string& path, const ControlProtocol& protocol,
                                   const Trajectory& traj) {
    const auto heat = heating_rate(traj, protocol);
    std::vector<double> entropy(traj.size()), angle(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        entropy[k] = von_neumann_entropy(traj.states[k]);
        angle[k] = bures_angle(traj.z(k));
    }
    write_csv(path, {"t", "z", "heat_rate", "entropy", "bures_angle"},
              {traj.grid, traj.z_series(), heat, entropy, angle});
}

inline void write_history_csv(const std::string& path, const DescentReport& report) {
    std::vector<double> iter(report.history.size());
    for (std::size_t k = 0; k < iter.size(); ++k) iter[k] = static_cast<double>(k);
    write_csv(path, {"iter", "J", "residual", "epsilon_used"},
              {iter, report.history, report.admissibility_residuals, report.epsilon_used});
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace detail

inline int run_optimize(const OptimizeConfig& config, std::ostream& log) {
    const AdmissibilityTarget target;
    ControlProtocol initial;
    try {
        if (config.init == "constant") {
            initial = constant_guess(target, config.tau, config.grid_n);
        } else {
            initial = read_protocol_csv(config.init);
            const auto check = is_admissible(initial, target);
            if (!check.admissible) {
                log << "error: initial protocol violates the integral constraint, residual = "
                    << format_double(check.residual) << "\n";
                return kExitInputError;
            }
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    DescentConfig descent;
    descent.epsilon = config.epsilon;
    descent.delta = config.delta;
    descent.max_iter = config.max_iter;

    DescentReport report;
    try {
        report = optimize(config.kind, initial, target, descent);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    const Trajectory traj = propagate_z(report.final_protocol, target.z_initial);
    write_protocol_csv(detail::out_path(config.out_dir, "protocol.csv"), report.final_protocol);
    detail::write_z_trajectory_csv(detail::out_path(config.out_dir, "trajectory.csv"),
                                   report.final_protocol, traj);
    detail::write_history_csv(detail::out_path(config.out_dir, "history.csv"), report);

    nlohmann::json summary = {
        {"command", "optimize"},
        {"config",
         {{"functional", to_string(config.kind)},
          {"tau", config.tau},
          {"grid_n", config.grid_n},
          {"epsilon", config.epsilon},
          {"delta", config.delta},
          {"max_iter", config.max_iter},
          {"init", config.init},
          {"out", config.out_dir}}},
        {"initial_J", report.history.front()},
        {"final_J", report.history.back()},
        {"iterations", report.iterations},
        {"converged", report.converged},
        {"stalled", report.stalled},
        {"final_residual", report.admissibility_residuals.back()},
    };
    detail::write_json(detail::out_path(config.out_dir, "summary.json"), summary);

    log << "J: " << format_double(report.history.front()) << " -> "
        << format_double(report.history.back()) << " in " << report.iterations
        << " iterations, converged = " << (report.converged ? "true" : "false") << "\n";
    return report.converged ? kExitOk : kExitNotConverged;
}

inline int run_simulate(const SimulateConfig& config, std::ostream& log) {
    ControlProtocol protocol;
    try {
        protocol = read_protocol_csv(config.protocol_path);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    const AdmissibilityTarget target;
    const auto check = is_admissible(protocol, target);
    log << "admissibility residual = " << format_double(check.residual)
        << (check.admissible ? " (admissible)" : " (NOT admissible)") << "\n";

    try {
        if (config.bloch) {
            const PhysicsParams params{config.omega0, 1.0};
            const Trajectory traj =
                propagate_bloch(protocol, {config.x0, config.y0, config.z0}, params);
            const auto heat = heating_rate(traj, protocol, params);
            std::vector<double> x(traj.size()), y(traj.size()), entropy(traj.size());
            for (std::size_t k = 0; k < traj.size(); ++k) {
                x[k] = traj.states[k].x;
                y[k] = traj.states[k].y;
                entropy[k] = von_neumann_entropy(traj.states[k]);
            }
            write_csv(detail::out_path(config.out_dir, "trajectory.csv"),
                      {"t", "x", "y", "z", "heat_rate", "entropy"},
                      {traj.grid, x, y, traj.z_series(), heat, entropy});
        } else {
            const Trajectory traj = propagate_z(protocol, config.z0);
            detail::write_z_trajectory_csv(detail::out_path(config.out_dir, "trajectory.csv"),
                                           protocol, traj);
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

inline int run_analytic(const AnalyticConfig& config, std::ostream& log) {
    const AdmissibilityTarget target;
    const double tau = config.tau;
    const std::size_t n = config.grid_n;
    try {
        if (config.case_name == "heating-optimum") {
            ControlProtocol opt = sample_protocol(
                tau, n, [tau](double t) { return 1.0 / (2.0 * tau - t); });
            std::vector<double> z_star(opt.nodes());
            for (std::size_t k = 0; k < z_star.size(); ++k)
                z_star[k] = 1.0 - opt.time(k) / tau;
            write_csv(detail::out_path(config.out_dir, "analytic.csv"),
                      {"t", "gamma_star", "z_star"}, {opt.grid(), opt.gamma, z_star});
            detail::write_json(detail::out_path(config.out_dir, "summary.json"),
                               {{"command", "analytic"},
                                {"case", config.case_name},
                                {"tau", tau},
                                {"grid_n", n},
                                {"J_star", 1.0 / tau}});
        } else if (config.case_name == "dispersion-optimum") {
            std::vector<double> t(n + 1), z_star(n + 1), gamma_star(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                t[k] = tau * (static_cast<double>(k) / static_cast<double>(n));
                z_star[k] = std::sqrt(std::max(0.0, 1.0 - t[k] / tau));
                gamma_star[k] = k < n ? 1.0 / (2.0 * tau * z_star[k] * (1.0 + z_star[k])) : 0.0;
            }
            gamma_star[n] = gamma_star[n - 1];  // γ* -> ∞ at t = τ; clamp the last node
            write_csv(detail::out_path(config.out_dir, "analytic.csv"),
                      {"t", "gamma_star", "z_star"}, {t, gamma_star, z_star});
            detail::write_json(detail::out_path(config.out_dir, "summary.json"),
                               {{"command", "analytic"},
                                {"case", config.case_name},
                                {"tau", tau},
                                {"grid_n", n},
                                {"J_star", 1.0 / (4.0 * tau)},
                                {"last_node_clamped", true}});
        } else if (config.case_name == "minimal-time") {
            const MinimalTimeCertificate cert = minimal_time_certificate(target, tau, n);
            std::vector<double> widths, costs;
            for (const auto& sample : cert.width_study) {
                widths.push_back(sample.width);
                costs.push_back(sample.heating_cost);
            }
            write_csv(detail::out_path(config.out_dir, "width_study.csv"),
                      {"width", "heating_cost"}, {widths, costs});
            detail::write_json(detail::out_path(config.out_dir, "summary.json"),
                               {{"command", "analytic"},
                                {"case", config.case_name},
                                {"tau", tau},
                                {"grid_n", n},
                                {"tau_star", cert.tau_star},
                                {"impulse_weight", cert.impulse_weight},
                                {"heating_weight_left", cert.heating_weight_left},
                                {"heating_weight_right", cert.heating_weight_right},
                                {"costate_vanishes", cert.costate_vanishes}});
        } else if (config.case_name == "costate-oracle") {
            const ControlProtocol protocol = constant_guess(target, tau, n);
            const Trajectory traj = propagate_z(protocol, target.z_initial);
            const CostateTrajectory numeric = solve_costate(CostKind::Heating, protocol, traj);
            const CostateTrajectory closed = costate_closed_form_heating(protocol);
            double max_diff = 0.0;
            for (std::size_t k = 0; k < numeric.size(); ++k)
                max_diff = std::max(max_diff, std::abs(numeric.p[k] - closed.p[k]));
            write_csv(detail::out_path(config.out_dir, "costate.csv"),
                      {"t", "p_backward_ode", "p_closed_form"},
                      {numeric.grid, numeric.p, closed.p});
            detail::write_json(detail::out_path(config.out_dir, "summary.json"),
                               {{"command", "analytic"},
                                {"case", config.case_name},
                                {"tau", tau},
                                {"grid_n", n},
                                {"max_abs_difference", max_diff},
                                {"p0_closed_form", closed.p.front()}});
        } else {
            log << "error: unknown case '" << config.case_name << "'\n";
            return kExitInputError;
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}

}  // namespace qoc
