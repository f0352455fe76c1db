#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qoc/model.hpp"
#include "qoc/numeric.hpp"
#include "qoc/pontryagin.hpp"
#include "qoc/protocol.hpp"

namespace qoc {

enum class Projection { MeanSubtract };

struct DescentConfig {
    double epsilon = 0.1;    // step size on ∂H/∂γ
    double delta = 1e-5;     // termination threshold on |ΔJ| between accepted steps
    std::size_t max_iter = 1000;
    Projection projection = Projection::MeanSubtract;
};

inline void validate_config(const DescentConfig& config) {
    if (!(config.epsilon > 0.0)) throw std::invalid_argument("descent: epsilon must be positive");
    if (!(config.delta > 0.0)) throw std::invalid_argument("descent: delta must be positive");
    if (config.max_iter < 1) throw std::invalid_argument("descent: max_iter must be at least 1");
}

struct DescentReport {
    std::vector<double> history;                  // J per accepted iterate, history[0] = initial
    ControlProtocol final_protocol;
    bool converged = false;
    bool stalled = false;                         // step fallback exhausted without improvement
    std::size_t iterations = 0;                   // accepted steps (== history.size() - 1)
    std::vector<double> admissibility_residuals;  // |Γ_τ − budget| per iterate
    std::vector<double> epsilon_used;             // step size per iterate (0 for the initial row)
};

/// One ascent step on H projected onto the admissible set:
///   γ ← γ + ε (g − ḡ),  ḡ = (1/τ) ∫ g dt  (trapezoid).
/// Subtracting the trapezoid mean keeps ∫γ dt unchanged exactly, because the
/// update's own trapezoid integral telescopes to ε(∫g − τ·ḡ) = 0.
inline ControlProtocol projected_update(const ControlProtocol& protocol,
                                        std::span<const double> gradient, double epsilon) {
    validate_protocol(protocol);
    if (gradient.size() != protocol.nodes())
        throw std::invalid_argument("projected_update: gradient grid differs");
    const double mean = trapezoid(gradient, protocol.dt()) / protocol.tau;
    ControlProtocol next = protocol;
    for (std::size_t k = 0; k < next.gamma.size(); ++k)
        next.gamma[k] += epsilon * (gradient[k] - mean);
    return next;
}

struct StepResult {
    ControlProtocol protocol;
    Trajectory z_traj;
    double cost = 0.0;
    double epsilon_used = 0.0;
    bool improved = false;
    std::size_t halvings = 0;
};

/// Try the projected step at epsilon, halving up to max_halvings times while
/// the trial cost is non-finite or exceeds the current cost. improved = false
/// after exhausting the budget means the caller should stop (stall).
inline StepResult adaptive_step_fallback(CostKind kind, const ControlProtocol& current,
                                         std::span<const double> gradient, double cost_current,
                                         double epsilon, double z0,
                                         std::size_t max_halvings = 20) {
    StepResult result;
    double eps = epsilon;
    for (std::size_t attempt = 0; attempt <= max_halvings; ++attempt, eps *= 0.5) {
        ControlProtocol trial = projected_update(current, gradient, eps);
        Trajectory traj = propagate_z(trial, z0);
        const double cost = evaluate_cost(kind, trial, traj);
        if (std::isfinite(cost) && cost <= cost_current) {
            result.protocol = std::move(trial);
            result.z_traj = std::move(traj);
            result.cost = cost;
            result.epsilon_used = eps;
            result.improved = true;
            result.halvings = attempt;
            return result;
        }
    }
    result.protocol = current;
    result.cost = cost_current;
    result.epsilon_used = epsilon;
    result.halvings = max_halvings;
    return result;
}

/// Modified steepest descent: propagate → costate → gradient → projected
/// update, accepting steps only when J does not increase. The working step
/// size is sticky: once halved it stays small for later iterations.
/// Termination: |ΔJ| ≤ delta across consecutive accepted steps, an exactly
/// zero projected gradient, or max_iter. A stalled fallback ends the run
/// with converged = false.
inline DescentReport optimize(CostKind kind, const ControlProtocol& initial,
                              const AdmissibilityTarget& target, const DescentConfig& config) {
    validate_config(config);
    validate_protocol(initial);
    const AdmissibilityCheck init_check = is_admissible(initial, target);
    if (!init_check.admissible)
        throw std::invalid_argument("optimize: initial protocol violates the integral constraint");

    DescentReport report;
    report.final_protocol = initial;
    Trajectory z_traj = propagate_z(initial, target.z_initial);
    double cost = evaluate_cost(kind, initial, z_traj);
    if (!std::isfinite(cost))
        throw std::runtime_error("optimize: non-finite cost at the initial protocol");
    report.history.push_back(cost);
    report.admissibility_residuals.push_back(init_check.residual);
    report.epsilon_used.push_back(0.0);

    double epsilon = config.epsilon;
    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        const CostateTrajectory costate = solve_costate(kind, report.final_protocol, z_traj);
        const auto gradient = control_gradient_series(kind, report.final_protocol, z_traj, costate);

        double deviation = 0.0;
        const double mean = trapezoid(gradient, report.final_protocol.dt()) /
                            report.final_protocol.tau;
        for (double g : gradient) deviation = std::max(deviation, std::abs(g - mean));
        if (deviation == 0.0) {
            report.converged = true;
            break;
        }

        StepResult step = adaptive_step_fallback(kind, report.final_protocol, gradient, cost,
                                                 epsilon, target.z_initial);
        if (!step.improved) {
            report.stalled = true;
            break;
        }
        epsilon = step.epsilon_used;
        const double previous = cost;
        cost = step.cost;
        report.final_protocol = std::move(step.protocol);
        z_traj = std::move(step.z_traj);
        report.iterations += 1;
        report.history.push_back(cost);
        report.admissibility_residuals.push_back(
            is_admissible(report.final_protocol, target).residual);
        report.epsilon_used.push_back(step.epsilon_used);
        if (std::abs(cost - previous) <= config.delta) {
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace qoc
