// linear_oracle.hpp: closed-form evolution of the decoupled (alpha = 0)
// system and normal-mode analysis of the quadratic boson Hamiltonian.

#pragma once

#include <cmath>
#include <complex>
#include <string_view>
#include <utility>

#include "semiq/errors.hpp"
#include "semiq/model.hpp"

namespace semiq {

enum class RegimeKind {
    StablePositiveDefinite,  // |delta| < sqrt(eps^2 - gamma^2): lambda+- > 0
    StableSemidefinite,      // |delta| == sqrt(eps^2 - gamma^2): lambda- == 0
    StableNonPositive,       // sqrt(eps^2 - gamma^2) < |delta| < eps: lambda- < 0
    Critical,                // |delta| == eps: non-diagonalizable
    Unstable,                // |delta| > eps: complex frequencies
};

inline std::string_view to_string(RegimeKind k) {
    switch (k) {
    case RegimeKind::StablePositiveDefinite: return "StablePositiveDefinite";
    case RegimeKind::StableSemidefinite: return "StableSemidefinite";
    case RegimeKind::StableNonPositive: return "StableNonPositive";
    case RegimeKind::Critical: return "Critical";
    case RegimeKind::Unstable: return "Unstable";
    }
    return "?";
}

struct QuantumRegime {
    RegimeKind label{};
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    std::complex<double> eta;
};

struct QuantumTriple {
    double n1{1.0};
    double om{0.0};
    double op{0.0};

    double invariant() const { return n1 * n1 - om * om - op * op; }
    bool operator==(const QuantumTriple&) const = default;
};

inline QuantumTriple quantum_part(const SystemState& s) { return {s.n1, s.om, s.op}; }

inline constexpr double kDefaultClassifyTol = 1e-12;

/// Regime of the alpha = 0 boson Hamiltonian. Boundaries are detected with
/// relative tolerance `tol` (scaled by eps); the boundary label wins ties.
inline QuantumRegime classify(const ModelParams& p, double tol = kDefaultClassifyTol) {
    check_params(p);
    if (!(tol >= 0.0)) throw DomainError("classify: tol must be >= 0");

    const double ad = std::abs(p.delta);
    const double band = tol * p.eps;
    const double eta_sq = (p.eps - ad) * (p.eps + ad);

    QuantumRegime r;
    if (std::abs(ad - p.eps) <= band) {
        r.label = RegimeKind::Critical;
        r.eta = 0.0;
    } else if (ad > p.eps) {
        r.label = RegimeKind::Unstable;
        r.eta = {0.0, std::sqrt(-eta_sq)};
    } else {
        const double threshold = std::sqrt((p.eps - p.gamma) * (p.eps + p.gamma));
        if (std::abs(ad - threshold) <= band)
            r.label = RegimeKind::StableSemidefinite;
        else if (ad < threshold)
            r.label = RegimeKind::StablePositiveDefinite;
        else
            r.label = RegimeKind::StableNonPositive;
        r.eta = std::sqrt(eta_sq);
    }
    r.lambda_plus = r.eta + p.gamma;
    r.lambda_minus = r.eta - p.gamma;
    return r;
}

/// Bogoliubov coefficients u = sqrt((eps+eta)/2eta), v = sqrt((eps-eta)/2eta),
/// principal branch. Complex in the unstable regime.
inline std::pair<std::complex<double>, std::complex<double>>
bogoliubov_uv(const ModelParams& p, double tol = kDefaultClassifyTol) {
    const QuantumRegime r = classify(p, tol);
    if (r.label == RegimeKind::Critical)
        throw CriticalityError("bogoliubov_uv: |delta| == eps, evolution matrix is not diagonalizable");
    const std::complex<double> eps{p.eps, 0.0};
    const std::complex<double> u = std::sqrt((eps + r.eta) / (2.0 * r.eta));
    const std::complex<double> v = std::sqrt((eps - r.eta) / (2.0 * r.eta));
    return {u, v};
}

namespace detail {

// S = sin(2 eta t)/eta and C = (1 - cos 2 eta t)/eta^2, continued to
// eta^2 < 0 through the hyperbolic functions. Series near 2|eta t| = 0.
struct LinearKernels {
    double s;
    double c;
};

inline LinearKernels linear_kernels(double eta_sq, double t) {
    const double z = 4.0 * eta_sq * t * t;  // (2 eta t)^2, signed
    if (std::abs(z) < 1e-8) {
        return {2.0 * t * (1.0 - z / 6.0 + z * z / 120.0),
                2.0 * t * t * (1.0 - z / 12.0 + z * z / 360.0)};
    }
    if (eta_sq > 0.0) {
        const double eta = std::sqrt(eta_sq);
        const double sh = std::sin(eta * t);
        return {std::sin(2.0 * eta * t) / eta, 2.0 * sh * sh / eta_sq};
    }
    const double kappa = std::sqrt(-eta_sq);
    const double sh = std::sinh(kappa * t);
    return {std::sinh(2.0 * kappa * t) / kappa, -2.0 * sh * sh / eta_sq};
}

} // namespace detail

/// Exact alpha = 0 evolution of the quantum triple for |delta| != eps.
///
/// The closed form is evaluated as
///   n1 = n1_0 + delta B C + delta om_0 S
///   om = om_0 (1 - eta^2 C) + B S
///   op = op_0 - eps B C - eps om_0 S,      B = delta n1_0 + eps op_0,
/// which is algebraically identical to the textbook cos/sin expressions but
/// free of the 1/eta^2 cancellation near the critical line.
inline QuantumTriple evolve_linear(const QuantumTriple& q0, double eps, double delta, double t) {
    if (!std::isfinite(t)) throw DomainError("evolve_linear: non-finite time");
    if (!std::isfinite(eps) || !std::isfinite(delta) || !std::isfinite(q0.n1) ||
        !std::isfinite(q0.om) || !std::isfinite(q0.op))
        throw DomainError("evolve_linear: non-finite input");
    const double eta_sq = (eps - delta) * (eps + delta);
    if (eta_sq == 0.0)
        throw CriticalityError("evolve_linear: |delta| == eps, use evolve_critical");

    const auto [s, c] = detail::linear_kernels(eta_sq, t);
    const double b = delta * q0.n1 + eps * q0.op;
    return {q0.n1 + delta * b * c + delta * q0.om * s,
            q0.om * (1.0 - eta_sq * c) + b * s,
            q0.op - eps * b * c - eps * q0.om * s};
}

/// Exact alpha = 0 evolution at delta = +eps (polynomial growth). Pass
/// delta_sign = -1 for delta = -eps; that case goes through the parity map.
inline QuantumTriple evolve_critical(const QuantumTriple& q0, double eps, double t,
                                     int delta_sign = +1) {
    if (!std::isfinite(t) || !std::isfinite(eps) || !std::isfinite(q0.n1) ||
        !std::isfinite(q0.om) || !std::isfinite(q0.op))
        throw DomainError("evolve_critical: non-finite input");
    if (delta_sign < 0) {
        const QuantumTriple r = evolve_critical({q0.n1, -q0.om, -q0.op}, eps, t, +1);
        return {r.n1, -r.om, -r.op};
    }
    const double et = eps * t;
    const double g = 2.0 * (q0.n1 + q0.op) * et;
    return {q0.n1 + 2.0 * q0.om * et + g * et,
            q0.om + g,
            q0.op - 2.0 * q0.om * et - g * et};
}

/// Harmonic rotation of the decoupled field mode.
inline std::pair<double, double> evolve_classical(double x0, double p0, double omega, double t) {
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    return {x0 * c + p0 * s, p0 * c - x0 * s};
}

/// Full alpha = 0 state at time t; dispatches on the regime of (eps, delta).
inline SystemState evolve_decoupled(const SystemState& s0, const ModelParams& p, double t) {
    const QuantumTriple q0 = quantum_part(s0);
    QuantumTriple q;
    if (std::abs(p.delta) == p.eps)
        q = evolve_critical(q0, p.eps, t, p.delta < 0.0 ? -1 : +1);
    else
        q = evolve_linear(q0, p.eps, p.delta, t);
    const auto [x, mom] = evolve_classical(s0.x, s0.p, p.omega, t);
    return {q.n1, q.om, q.op, x, mom, s0.dn};
}

} // namespace semiq
