#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoc/protocol.hpp"

namespace qoc {

inline constexpr double kBlochNormTol = 1e-9;

struct PhysicsParams {
    double omega0 = 1.0;  // qubit level splitting (angular frequency)
    double hbar = 1.0;
};

inline void validate_params(const PhysicsParams& p) {
    if (!(p.omega0 > 0.0)) throw std::invalid_argument("params: omega0 must be positive");
    if (!(p.hbar > 0.0)) throw std::invalid_argument("params: hbar must be positive");
}

/// Qubit state as Bloch coordinates; |(x,y,z)| <= 1, equality for pure states.
struct BlochState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double transverse() const { return std::sqrt(x * x + y * y); }
};

struct Trajectory {
    std::vector<double> grid;
    std::vector<BlochState> states;

    std::size_t size() const { return grid.size(); }
    double z(std::size_t k) const { return states[k].z; }
    std::vector<double> z_series() const {
        std::vector<double> out(states.size());
        for (std::size_t k = 0; k < states.size(); ++k) out[k] = states[k].z;
        return out;
    }
};

/// Population dynamics z' = -gamma (z + 1) solved in closed form through the
/// running integral G(t) of gamma: z_t = (1 + z0) exp(-G) - 1. This avoids
/// stiffness for large decay rates; the RK4 route below is the cross-check.
inline Trajectory propagate_z(const ControlProtocol& protocol, double z0) {
    validate_protocol(protocol);
    if (std::abs(z0) > 1.0 + kBlochNormTol)
        throw std::domain_error("propagate_z: |z0| must not exceed 1");
    const auto cum = cumulative_trapezoid(protocol.gamma, protocol.dt());
    Trajectory traj;
    traj.grid = protocol.grid();
    traj.states.resize(protocol.nodes());
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        traj.states[k] = {0.0, 0.0, (1.0 + z0) * std::exp(-cum[k]) - 1.0};
    return traj;
}

namespace detail {

struct BlochRhs {
    const ControlSampler& ctrl;
    double omega0;

    BlochState operator()(double t, const BlochState& s) const {
        const double g = ctrl.gamma(t);
        const double rot = 0.5 * ctrl.lambda(t) + omega0;
        return {-0.5 * g * s.x - rot * s.y,
                rot * s.x - 0.5 * g * s.y,
                -g * (s.z + 1.0)};
    }
};

inline BlochState axpy(const BlochState& s, double a, const BlochState& d) {
    return {s.x + a * d.x, s.y + a * d.y, s.z + a * d.z};
}

}  // namespace detail

/// Full Bloch dynamics (transverse precession/decay plus population decay)
/// by fixed-step RK4, one step per grid interval, controls interpolated
/// piecewise-linearly. The transverse magnitude obeys
/// sqrt(x^2+y^2) = exp(-G/2) * sqrt(x0^2+y0^2) up to integrator error.
inline Trajectory propagate_bloch(const ControlProtocol& protocol, const BlochState& s0,
                                  const PhysicsParams& params = {}) {
    validate_protocol(protocol);
    validate_params(params);
    const ControlSampler ctrl(protocol);
    const detail::BlochRhs rhs{ctrl, params.omega0};

    Trajectory traj;
    traj.grid = protocol.grid();
    traj.states.resize(protocol.nodes());
    traj.states[0] = s0;
    const double h = protocol.dt();
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const double t = protocol.time(k);
        const BlochState& s = traj.states[k];
        const BlochState k1 = rhs(t, s);
        const BlochState k2 = rhs(t + 0.5 * h, detail::axpy(s, 0.5 * h, k1));
        const BlochState k3 = rhs(t + 0.5 * h, detail::axpy(s, 0.5 * h, k2));
        const BlochState k4 = rhs(t + h, detail::axpy(s, h, k3));
        traj.states[k + 1] = {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                              s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
                              s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
    }
    return traj;
}

/// Instantaneous power exchanged with the cavity, (hbar*omega0/2) z'.
/// z' is taken from the state equation, z' = -gamma (z + 1), not from
/// finite differences of the sampled trajectory.
inline std::vector<double> heating_rate(const Trajectory& traj, const ControlProtocol& protocol,
                                        const PhysicsParams& params = {}) {
    validate_protocol(protocol);
    validate_params(params);
    if (traj.size() < 2) throw std::invalid_argument("heating_rate: need at least 2 samples");
    if (traj.size() != protocol.nodes())
        throw std::invalid_argument("heating_rate: trajectory and protocol grids differ");
    std::vector<double> q(traj.size());
    const double scale = 0.5 * params.hbar * params.omega0;
    for (std::size_t k = 0; k < q.size(); ++k)
        q[k] = scale * (-protocol.gamma[k] * (traj.z(k) + 1.0));
    return q;
}

/// Energy variance <H0^2> - <H0>^2 = (hbar^2 omega0^2 / 4)(1 - z^2).
inline double energy_variance(double z, const PhysicsParams& params = {}) {
    validate_params(params);
    if (std::abs(z) > 1.0 + kBlochNormTol)
        throw std::domain_error("energy_variance: |z| must not exceed 1");
    const double hw = params.hbar * params.omega0;
    return 0.25 * hw * hw * std::max(0.0, 1.0 - z * z);
}

/// Von Neumann entropy in nats from the Bloch-vector length r; the density
/// matrix eigenvalues are (1 +- r)/2, so S ranges over [0, ln 2].
inline double von_neumann_entropy(const BlochState& state) {
    const double r = state.norm();
    if (r > 1.0 + kBlochNormTol)
        throw std::domain_error("von_neumann_entropy: Bloch vector leaves the unit ball");
    const double rc = std::min(r, 1.0);
    const auto xlnx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
    return -xlnx(0.5 * (1.0 + rc)) - xlnx(0.5 * (1.0 - rc));
}

/// Complex cavity amplitude sampled on a uniform time grid.
struct CavityAmplitudeSeries {
    std::vector<double> grid;
    std::vector<std::complex<double>> values;
};

/// Recover the decay and Lamb-shift rates from a cavity amplitude series:
/// gamma = -2 Re(c'/c), lambda = -2 Im(c'/c). c' uses central differences
/// (first-order one-sided at the endpoints).
inline ControlProtocol rates_from_amplitude(const CavityAmplitudeSeries& series) {
    const std::size_t m = series.grid.size();
    if (m < 3) throw std::invalid_argument("rates_from_amplitude: need at least 3 samples");
    if (series.values.size() != m)
        throw std::invalid_argument("rates_from_amplitude: grid/value size mismatch");
    const double h = series.grid[1] - series.grid[0];
    if (!(h > 0.0))
        throw std::invalid_argument("rates_from_amplitude: grid must be increasing");
    for (std::size_t k = 1; k < m; ++k) {
        const double step = series.grid[k] - series.grid[k - 1];
        if (std::abs(step - h) > 1e-9 * h)
            throw std::invalid_argument("rates_from_amplitude: grid must be uniform");
    }
    for (std::size_t k = 0; k < m; ++k)
        if (series.values[k] == std::complex<double>(0.0, 0.0))
            throw std::runtime_error("rates_from_amplitude: zero amplitude at sample " +
                                     std::to_string(k));

    std::vector<double> gamma(m), lambda(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> dc;
        if (k == 0)
            dc = (series.values[1] - series.values[0]) / h;
        else if (k == m - 1)
            dc = (series.values[m - 1] - series.values[m - 2]) / h;
        else
            dc = (series.values[k + 1] - series.values[k - 1]) / (2.0 * h);
        const std::complex<double> ratio = dc / series.values[k];
        gamma[k] = -2.0 * ratio.real();
        lambda[k] = -2.0 * ratio.imag();
    }
    const double tau = series.grid.back() - series.grid.front();
    return ControlProtocol(tau, std::move(gamma), std::move(lambda));
}

}  // namespace qoc
