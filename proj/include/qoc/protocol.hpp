#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qoc/numeric.hpp"

namespace qoc {

/// Sampled control pair (gamma_t, lambda_t) on a uniform grid over [0, tau].
/// gamma is the time-dependent decay rate, lambda the Lamb-shift rate; both
/// are nodal values at n+1 points, interpreted piecewise-linearly between
/// nodes. All quadrature on protocols is trapezoidal so that the discrete
/// admissibility integral can be conserved exactly by the optimizer.
struct ControlProtocol {
    double tau = 1.0;             // total duration
    std::size_t n = 2;            // grid intervals (n+1 nodes)
    std::vector<double> gamma;    // decay-rate samples, size n+1
    std::vector<double> lambda;   // Lamb-shift samples, size n+1

    ControlProtocol() = default;
    ControlProtocol(double tau_, std::vector<double> gamma_, std::vector<double> lambda_ = {})
        : tau(tau_), n(gamma_.empty() ? 0 : gamma_.size() - 1), gamma(std::move(gamma_)),
          lambda(std::move(lambda_)) {
        if (lambda.empty()) lambda.assign(gamma.size(), 0.0);
    }

    std::size_t nodes() const { return n + 1; }
    double dt() const { return tau / static_cast<double>(n); }
    double time(std::size_t k) const {
        return tau * (static_cast<double>(k) / static_cast<double>(n));
    }
    std::vector<double> grid() const {
        std::vector<double> t(nodes());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
        return t;
    }
    bool has_lambda() const {
        return std::any_of(lambda.begin(), lambda.end(), [](double v) { return v != 0.0; });
    }
};

inline void validate_protocol(const ControlProtocol& p) {
    if (!(p.tau > 0.0)) throw std::invalid_argument("protocol: tau must be positive");
    if (p.n < 2) throw std::invalid_argument("protocol: need at least 2 grid intervals");
    if (p.gamma.size() != p.nodes())
        throw std::invalid_argument("protocol: gamma must have n+1 samples");
    if (p.lambda.size() != p.nodes())
        throw std::invalid_argument("protocol: lambda must have n+1 samples");
    if (!all_finite(p.gamma) || !all_finite(p.lambda))
        throw std::invalid_argument("protocol: control samples must be finite");
}

/// Build a protocol by sampling gamma(t) at the grid nodes.
template <typename F>
ControlProtocol sample_protocol(double tau, std::size_t n, F&& gamma_of_t) {
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        g[k] = gamma_of_t(tau * (static_cast<double>(k) / static_cast<double>(n)));
    return ControlProtocol(tau, std::move(g));
}

/// Fixed endpoints z(0) = z_initial, z(tau) = z_final of the decoupled
/// population equation. The process constraint on the decay rate is
/// integral(gamma) = budget = ln((1+z_initial)/(1+z_final)).
struct AdmissibilityTarget {
    double z_initial = 1.0;
    double z_final = 0.0;
    double budget = 0.6931471805599453094;  // ln 2 for the default endpoints

    static AdmissibilityTarget endpoints(double z_initial, double z_final) {
        if (!(z_final > -1.0) || !(z_final <= z_initial) || !(z_initial <= 1.0))
            throw std::invalid_argument("target: require -1 < z_final <= z_initial <= 1");
        AdmissibilityTarget t;
        t.z_initial = z_initial;
        t.z_final = z_final;
        t.budget = std::log((1.0 + z_initial) / (1.0 + z_final));
        return t;
    }
};

struct CumulativeIntegrals {
    std::vector<double> gamma;   // integral of gamma up to each node
    std::vector<double> lambda;  // integral of lambda up to each node
};

/// Running integrals of both controls (trapezoid rule, value 0 at t = 0).
inline CumulativeIntegrals cumulative_integral(const ControlProtocol& p) {
    validate_protocol(p);
    return {cumulative_trapezoid(p.gamma, p.dt()), cumulative_trapezoid(p.lambda, p.dt())};
}

struct AdmissibilityCheck {
    double residual = 0.0;  // |integral(gamma) - budget|
    bool admissible = false;
    double min_gamma = 0.0;  // diagnostic: most negative sample (rates may dip below zero)
};

/// Discrete admissibility: the trapezoid integral of gamma over [0, tau]
/// must match the target budget within tol. No sign constraint is imposed.
inline AdmissibilityCheck is_admissible(const ControlProtocol& p, const AdmissibilityTarget& target,
                                        double tol = 1e-9) {
    validate_protocol(p);
    const double integral = trapezoid(p.gamma, p.dt());
    AdmissibilityCheck c;
    c.residual = std::abs(integral - target.budget);
    c.admissible = c.residual < tol;
    c.min_gamma = *std::min_element(p.gamma.begin(), p.gamma.end());
    return c;
}

/// Constant protocol gamma = budget/tau, the usual initial guess. Exactly
/// admissible under the trapezoid rule.
inline ControlProtocol constant_guess(const AdmissibilityTarget& target, double tau,
                                      std::size_t n) {
    if (!(tau > 0.0)) throw std::invalid_argument("constant_guess: tau must be positive");
    if (n < 2) throw std::invalid_argument("constant_guess: need at least 2 grid intervals");
    return ControlProtocol(tau, std::vector<double>(n + 1, target.budget / tau));
}

/// Rectangular pulse of the given width at t = 0 carrying the full budget,
/// a finite-width stand-in for the impulsive control. The amplitude is
/// rescaled so the discrete trapezoid integral hits the budget exactly.
inline ControlProtocol impulse_protocol(const AdmissibilityTarget& target, double tau,
                                        std::size_t n, double width) {
    if (!(tau > 0.0)) throw std::invalid_argument("impulse_protocol: tau must be positive");
    if (n < 2) throw std::invalid_argument("impulse_protocol: need at least 2 grid intervals");
    if (!(width > 0.0) || width > tau)
        throw std::invalid_argument("impulse_protocol: require 0 < width <= tau");
    const double dt = tau / static_cast<double>(n);
    if (width < 2.0 * dt)
        throw std::invalid_argument(
            "impulse_protocol: width spans fewer than 2 grid steps; refine the grid");
    const auto support = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::llround(width / dt)));
    std::vector<double> g(n + 1, 0.0);
    for (std::size_t k = 0; k <= support; ++k) g[k] = 1.0;
    const double raw = trapezoid(g, dt);
    for (std::size_t k = 0; k <= support; ++k) g[k] = target.budget / raw;
    return ControlProtocol(tau, std::move(g));
}

/// Piecewise-linear view of a protocol plus the exact running integral of
/// that interpolant. Agrees with the nodal trapezoid sums at grid points,
/// which keeps state, costate and cost evaluations mutually consistent.
class ControlSampler {
public:
    explicit ControlSampler(const ControlProtocol& p)
        : proto_(&p), gamma_cum_(cumulative_trapezoid(p.gamma, p.dt())) {}

    double gamma(double t) const { return interp(proto_->gamma, t); }
    double lambda(double t) const { return interp(proto_->lambda, t); }

    /// Integral of the interpolated gamma from 0 to t.
    double gamma_integral(double t) const {
        const auto [k, s] = locate(t);
        const double g0 = proto_->gamma[k];
        const double g1 = proto_->gamma[k + 1];
        const double dt = proto_->dt();
        const double gt = g0 + (g1 - g0) * (s / dt);
        return gamma_cum_[k] + 0.5 * s * (g0 + gt);
    }

private:
    std::pair<std::size_t, double> locate(double t) const {
        const double dt = proto_->dt();
        double clamped = std::clamp(t, 0.0, proto_->tau);
        auto k = static_cast<std::size_t>(clamped / dt);
        if (k >= proto_->n) k = proto_->n - 1;
        return {k, clamped - proto_->time(k)};
    }
    double interp(const std::vector<double>& v, double t) const {
        const auto [k, s] = locate(t);
        const double dt = proto_->dt();
        return v[k] + (v[k + 1] - v[k]) * (s / dt);
    }

    const ControlProtocol* proto_;
    std::vector<double> gamma_cum_;
};

}  // namespace qoc
