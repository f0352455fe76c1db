#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qoc/model.hpp"
#include "qoc/numeric.hpp"
#include "qoc/protocol.hpp"

namespace qoc {

/// Cost functionals over the population channel. Each kind fixes one
/// consistent set: Lagrangian, control Hamiltonian H = p·f − L, costate
/// right-hand side −∂H/∂z, and control gradient ∂H/∂γ. Qsl is the negated
/// heating functional (ascent on heating == descent on Qsl).
enum class CostKind { Heating, Dispersion, MinimalTime, Qsl };

inline const char* to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Heating: return "heating";
        case CostKind::Dispersion: return "dispersion";
        case CostKind::MinimalTime: return "minimal-time";
        case CostKind::Qsl: return "qsl";
    }
    throw std::invalid_argument("unknown cost kind");
}

/// Running cost density. For MinimalTime the density is 1 (J = tau).
inline double lagrangian(CostKind kind, double z, double gamma) {
    const double zp = z + 1.0;
    switch (kind) {
        case CostKind::Heating: return gamma * gamma * zp * zp;
        case CostKind::Dispersion: return gamma * gamma * zp * zp * z * z;
        case CostKind::MinimalTime: return 1.0;
        case CostKind::Qsl: return -(gamma * gamma * zp * zp);
    }
    throw std::invalid_argument("unknown cost kind");
}

/// H = p·(-γ(z+1)) − L. The minimal-time Hamiltonian carries the horizon
/// itself as its constant part, so tau participates only for that kind.
inline double control_hamiltonian(CostKind kind, double z, double p, double gamma,
                                  double tau = 0.0) {
    const double zp = z + 1.0;
    const double coupling = -gamma * p * zp;
    switch (kind) {
        case CostKind::Heating: return -gamma * gamma * zp * zp + coupling;
        case CostKind::Dispersion: return -gamma * gamma * zp * zp * z * z + coupling;
        case CostKind::MinimalTime: return -tau + coupling;
        case CostKind::Qsl: return gamma * gamma * zp * zp + coupling;
    }
    throw std::invalid_argument("unknown cost kind");
}

/// Costate dynamics ṗ = −∂H/∂z, integrated backward from p(tau) = 0.
inline double costate_rhs(CostKind kind, double z, double p, double gamma) {
    const double zp = z + 1.0;
    switch (kind) {
        case CostKind::Heating: return gamma * p + 2.0 * gamma * gamma * zp;
        case CostKind::Dispersion:
            return gamma * p + 2.0 * gamma * gamma * (zp * zp * z + zp * z * z);
        case CostKind::MinimalTime: return gamma * p;
        case CostKind::Qsl: return gamma * p - 2.0 * gamma * gamma * zp;
    }
    throw std::invalid_argument("unknown cost kind");
}

/// ∂H/∂γ, the ascent direction of the control Hamiltonian.
inline double control_gradient(CostKind kind, double z, double p, double gamma) {
    const double zp = z + 1.0;
    switch (kind) {
        case CostKind::Heating: return -2.0 * gamma * zp * zp - p * zp;
        case CostKind::Dispersion: return -2.0 * gamma * zp * zp * z * z - p * zp;
        case CostKind::MinimalTime: return -p * zp;
        case CostKind::Qsl: return 2.0 * gamma * zp * zp - p * zp;
    }
    throw std::invalid_argument("unknown cost kind");
}

struct CostateTrajectory {
    std::vector<double> grid;
    std::vector<double> p;  // p.back() == 0 (transversality)

    std::size_t size() const { return grid.size(); }
};

namespace detail {

inline void require_same_grid(const ControlProtocol& protocol, const Trajectory& z_traj,
                              const char* where) {
    if (z_traj.size() != protocol.nodes() || z_traj.grid.empty() ||
        std::abs(z_traj.grid.back() - protocol.tau) > 1e-12 * std::max(1.0, protocol.tau))
        throw std::invalid_argument(std::string(where) + ": trajectory and protocol grids differ");
}

}  // namespace detail

/// Backward RK4 for the costate. Between nodes the control is the
/// piecewise-linear interpolant and z comes from the exact exponential
/// formula for that interpolant, so the only error is the integrator's.
inline CostateTrajectory solve_costate(CostKind kind, const ControlProtocol& protocol,
                                       const Trajectory& z_traj) {
    validate_protocol(protocol);
    detail::require_same_grid(protocol, z_traj, "solve_costate");

    const ControlSampler ctrl(protocol);
    const double z0 = z_traj.states.front().z;
    const auto z_at = [&](double t) {
        return (1.0 + z0) * std::exp(-ctrl.gamma_integral(t)) - 1.0;
    };
    const auto rhs = [&](double t, double p) {
        return costate_rhs(kind, z_at(t), p, ctrl.gamma(t));
    };

    CostateTrajectory out;
    out.grid = protocol.grid();
    out.p.assign(protocol.nodes(), 0.0);
    const double h = -protocol.dt();
    for (std::size_t k = protocol.n; k-- > 0;) {
        const double t = protocol.time(k + 1);
        const double p = out.p[k + 1];
        const double k1 = rhs(t, p);
        const double k2 = rhs(t + 0.5 * h, p + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, p + 0.5 * h * k2);
        const double k4 = rhs(t + h, p + h * k3);
        out.p[k] = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

/// Heating costate in closed form,
///   p_t = −2 (1 + z0) e^{G_t} ∫_t^tau γ_s² e^{−2 G_s} ds,
/// with the tail integral evaluated by the trapezoid rule on the grid.
/// (For z0 = 1 the prefactor is −4.) Oracle for solve_costate(Heating).
inline CostateTrajectory costate_closed_form_heating(const ControlProtocol& protocol,
                                                     double z0 = 1.0) {
    validate_protocol(protocol);
    const double dt = protocol.dt();
    const auto cum = cumulative_trapezoid(protocol.gamma, dt);
    std::vector<double> f(protocol.nodes());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = protocol.gamma[k] * protocol.gamma[k] * std::exp(-2.0 * cum[k]);
    const auto tail = reverse_cumulative_trapezoid(f, dt);

    CostateTrajectory out;
    out.grid = protocol.grid();
    out.p.resize(protocol.nodes());
    for (std::size_t k = 0; k < out.p.size(); ++k)
        out.p[k] = -2.0 * (1.0 + z0) * std::exp(cum[k]) * tail[k];
    return out;
}

/// Trapezoidal quadrature of the Lagrangian along the trajectory.
/// Qsl negates the identical heating sum, so J_qsl == −J_heating bitwise.
inline double evaluate_cost(CostKind kind, const ControlProtocol& protocol,
                            const Trajectory& z_traj) {
    validate_protocol(protocol);
    detail::require_same_grid(protocol, z_traj, "evaluate_cost");
    if (kind == CostKind::Qsl)
        return -evaluate_cost(CostKind::Heating, protocol, z_traj);
    std::vector<double> density(protocol.nodes());
    for (std::size_t k = 0; k < density.size(); ++k)
        density[k] = lagrangian(kind, z_traj.z(k), protocol.gamma[k]);
    return trapezoid(density, protocol.dt());
}

/// Nodal ∂H/∂γ along a (protocol, state, costate) triple.
inline std::vector<double> control_gradient_series(CostKind kind, const ControlProtocol& protocol,
                                                   const Trajectory& z_traj,
                                                   const CostateTrajectory& costate) {
    detail::require_same_grid(protocol, z_traj, "control_gradient_series");
    if (costate.size() != protocol.nodes())
        throw std::invalid_argument("control_gradient_series: costate grid differs");
    std::vector<double> g(protocol.nodes());
    for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = control_gradient(kind, z_traj.z(k), costate.p[k], protocol.gamma[k]);
    return g;
}

}  // namespace qoc
