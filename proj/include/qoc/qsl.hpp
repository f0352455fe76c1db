#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qoc/model.hpp"
#include "qoc/pontryagin.hpp"
#include "qoc/protocol.hpp"

namespace qoc {

/// Bures angle between the excited state and the mixed state at height z
/// on the x = y = 0 axis: arccos sqrt((1+z)/2), in [0, pi/2].
inline double bures_angle(double z) {
    if (std::abs(z) > 1.0 + kBlochNormTol)
        throw std::domain_error("bures_angle: |z| must not exceed 1");
    const double arg = std::clamp(0.5 * (1.0 + z), 0.0, 1.0);
    return std::acos(std::sqrt(arg));
}

/// One sample of the geometric speed bound 2 cos(l) sin(l) l' <= |rho'|_op.
/// On the z axis both sides reduce to expressions in z' = -gamma (z+1):
/// lhs = -z'/2 and rhs = |z'|/2, equal wherever z is nonincreasing.
struct SpeedBoundSample {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool tight = false;
};

inline std::vector<SpeedBoundSample> speed_bound_series(const ControlProtocol& protocol,
                                                        const Trajectory& z_traj) {
    validate_protocol(protocol);
    if (z_traj.size() != protocol.nodes())
        throw std::invalid_argument("speed_bound_series: trajectory and protocol grids differ");
    std::vector<SpeedBoundSample> out(protocol.nodes());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double zdot = -protocol.gamma[k] * (z_traj.z(k) + 1.0);
        out[k].t = protocol.time(k);
        out[k].lhs = -0.5 * zdot;
        out[k].rhs = 0.5 * std::abs(zdot);
        out[k].tight = std::abs(out[k].rhs - out[k].lhs) < 1e-12;
    }
    return out;
}

/// Analytic minimal-time record for driving z: z0 -> z_final under the
/// integral constraint: the optimum is an instantaneous impulse (tau* = 0)
/// carrying the whole budget, with identically zero costate and a heating
/// impulse whose symbolic weight drops from 2 just before the kick to 1
/// just after. width_study holds the finite-width heating costs whose
/// growth as width -> 0 certifies the impulse divergence.
struct MinimalTimeCertificate {
    double tau_star = 0.0;
    double impulse_weight = 0.0;        // total decay-rate mass of the impulse
    double heating_weight_left = 2.0;   // coefficient at t = 0^-
    double heating_weight_right = 1.0;  // coefficient at t = 0^+
    bool costate_vanishes = false;

    struct WidthSample {
        double width = 0.0;
        double heating_cost = 0.0;
    };
    std::vector<WidthSample> width_study;
};

inline MinimalTimeCertificate minimal_time_certificate(const AdmissibilityTarget& target,
                                                       double tau = 1.0, std::size_t n = 1000) {
    MinimalTimeCertificate cert;
    cert.impulse_weight = target.budget;

    const ControlProtocol probe = constant_guess(target, tau, n);
    const CostateTrajectory costate =
        solve_costate(CostKind::MinimalTime, probe, propagate_z(probe, target.z_initial));
    double max_p = 0.0;
    for (double p : costate.p) max_p = std::max(max_p, std::abs(p));
    cert.costate_vanishes = (max_p == 0.0);

    for (double frac : {0.4, 0.2, 0.1, 0.05}) {
        const double width = frac * tau;
        const ControlProtocol pulse = impulse_protocol(target, tau, n, width);
        const Trajectory traj = propagate_z(pulse, target.z_initial);
        cert.width_study.push_back(
            {width, evaluate_cost(CostKind::Heating, pulse, traj)});
    }
    return cert;
}

}  // namespace qoc
