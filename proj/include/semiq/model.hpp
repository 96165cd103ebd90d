// model.hpp: semiquantum boson-pair / classical-mode system: state types,
// mean-value equations of motion, Jacobian and invariants of motion.
//
// The quantum sector is described by the closed triple
//   n1 = <N+1>,  om = <O->,  op = <O+>
// and the classical field mode by (x, p). <dN> never changes and is carried
// along as a constant.

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "semiq/errors.hpp"

namespace semiq {

inline constexpr std::size_t kDim = 5;

using Vec5 = std::array<double, kDim>;
using Mat5 = std::array<Vec5, kDim>;

struct ModelParams {
    double eps{1.05};   // mean single-boson energy
    double gamma{0.0};  // half level splitting
    double delta{1.0};  // boson pairing coupling
    double alpha{0.0};  // matter-field coupling
    double omega{1.0};  // classical oscillator frequency

    bool operator==(const ModelParams&) const = default;
};

struct SystemState {
    double n1{1.0};
    double om{0.0};
    double op{0.0};
    double x{0.0};
    double p{0.0};
    double dn{0.0};

    Vec5 dynamical() const { return {n1, om, op, x, p}; }

    static SystemState from_dynamical(const Vec5& v, double dn) {
        return {v[0], v[1], v[2], v[3], v[4], dn};
    }

    bool operator==(const SystemState&) const = default;
};

/// Time derivative of the five dynamical components, in SystemState order.
struct Derivative {
    double dn1{};
    double dom{};
    double dop{};
    double dx{};
    double dp{};

    Vec5 as_array() const { return {dn1, dom, dop, dx, dp}; }
    bool operator==(const Derivative&) const = default;
};

struct InvariantPair {
    double e_eff{};
    double i_inv{};
};

namespace detail {

inline bool all_finite(const ModelParams& p) {
    return std::isfinite(p.eps) && std::isfinite(p.gamma) && std::isfinite(p.delta) &&
           std::isfinite(p.alpha) && std::isfinite(p.omega);
}

inline bool all_finite(const SystemState& s) {
    return std::isfinite(s.n1) && std::isfinite(s.om) && std::isfinite(s.op) &&
           std::isfinite(s.x) && std::isfinite(s.p) && std::isfinite(s.dn);
}

inline void require_finite(const SystemState& s, const char* where) {
    if (!all_finite(s)) throw DomainError(std::string(where) + ": non-finite state");
}

inline void require_finite(const ModelParams& p, const char* where) {
    if (!all_finite(p)) throw DomainError(std::string(where) + ": non-finite parameters");
}

// Unchecked right-hand side; the integrator calls this on trial points.
inline Vec5 rhs(const Vec5& y, const ModelParams& p) {
    const double c = p.delta + p.alpha * y[3];
    return {2.0 * c * y[1],
            2.0 * c * y[0] + 2.0 * p.eps * y[2],
            -2.0 * p.eps * y[1],
            p.omega * y[4],
            -(p.omega * y[3] + p.alpha * y[2])};
}

inline Mat5 rhs_jacobian(const Vec5& y, const ModelParams& p) {
    const double c2 = 2.0 * (p.delta + p.alpha * y[3]);
    Mat5 j{};
    j[0] = {0.0, c2, 0.0, 2.0 * p.alpha * y[1], 0.0};
    j[1] = {c2, 0.0, 2.0 * p.eps, 2.0 * p.alpha * y[0], 0.0};
    j[2] = {0.0, -2.0 * p.eps, 0.0, 0.0, 0.0};
    j[3] = {0.0, 0.0, 0.0, 0.0, p.omega};
    j[4] = {0.0, 0.0, -p.alpha, -p.omega, 0.0};
    return j;
}

} // namespace detail

/// Throws DomainError unless eps > 0, |gamma| < eps, omega > 0 and all finite.
inline void check_params(const ModelParams& p) {
    detail::require_finite(p, "ModelParams");
    if (!(p.eps > 0.0)) throw DomainError("ModelParams: eps must be > 0");
    if (!(std::abs(p.gamma) < p.eps)) throw DomainError("ModelParams: |gamma| must be < eps");
    if (!(p.omega > 0.0)) throw DomainError("ModelParams: omega must be > 0");
}

inline Derivative vector_field(const SystemState& s, const ModelParams& p) {
    detail::require_finite(s, "vector_field");
    check_params(p);
    const Vec5 d = detail::rhs(s.dynamical(), p);
    return {d[0], d[1], d[2], d[3], d[4]};
}

/// Row/column order (n1, om, op, x, p).
inline Mat5 jacobian(const SystemState& s, const ModelParams& p) {
    detail::require_finite(s, "jacobian");
    check_params(p);
    return detail::rhs_jacobian(s.dynamical(), p);
}

/// Bloch-like invariant n1^2 - om^2 - op^2.
inline double invariant_I(const SystemState& s) {
    detail::require_finite(s, "invariant_I");
    return s.n1 * s.n1 - s.om * s.om - s.op * s.op;
}

/// <H> - gamma <dN> - eps, expressed in the state variables.
inline double effective_energy(const SystemState& s, const ModelParams& p) {
    detail::require_finite(s, "effective_energy");
    detail::require_finite(p, "effective_energy");
    return p.eps * (s.n1 - 1.0) + (p.delta + p.alpha * s.x) * s.op +
           0.5 * p.omega * (s.p * s.p + s.x * s.x);
}

inline InvariantPair invariants(const SystemState& s, const ModelParams& p) {
    return {effective_energy(s, p), invariant_I(s)};
}

struct Violation {
    std::string quantity;  // "n1" or "I"
    double value{};
    double margin{};       // signed distance to the bound; negative when violated
};

struct ValidityReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks n1 >= 1 (i.e. <N> >= 0) and I >= 0.
inline ValidityReport validate_state(const SystemState& s) {
    detail::require_finite(s, "validate_state");
    ValidityReport r;
    if (s.n1 < 1.0) r.violations.push_back({"n1", s.n1, s.n1 - 1.0});
    const double i = invariant_I(s);
    if (i < 0.0) r.violations.push_back({"I", i, i});
    return r;
}

/// Builds a state with prescribed effective energy and Bloch invariant.
///
/// (om0, op0, x0) are held as given; n1 is solved from I and then |p| from
/// E_eff. momentum_sign picks the branch of p (a value >= 0 selects +).
inline SystemState make_initial(double e_target, double i_target, double om0, double op0,
                                double x0, double dn0, const ModelParams& p,
                                double momentum_sign) {
    check_params(p);
    for (double v : {e_target, i_target, om0, op0, x0, dn0, momentum_sign})
        if (!std::isfinite(v)) throw DomainError("make_initial: non-finite input");

    const double n1_sq = i_target + om0 * om0 + op0 * op0;
    if (n1_sq < 1.0)
        throw InfeasibleConstraint("I", "make_initial: I + om0^2 + op0^2 < 1, n1 >= 1 unreachable");
    const double n1 = std::sqrt(n1_sq);

    const double kinetic =
        (2.0 / p.omega) * (e_target - p.eps * (n1 - 1.0) - (p.delta + p.alpha * x0) * op0) -
        x0 * x0;
    if (kinetic < 0.0)
        throw InfeasibleConstraint(
            "E_eff", "make_initial: target E_eff below the minimum attainable at x0");
    const double mom = std::copysign(std::sqrt(kinetic), momentum_sign >= 0.0 ? 1.0 : -1.0);
    return {n1, om0, op0, x0, mom, dn0};
}

/// Parity map (delta, alpha, om, op) -> negated; commutes with the flow.
inline ModelParams parity(ModelParams p) {
    p.delta = -p.delta;
    p.alpha = -p.alpha;
    return p;
}

inline SystemState parity(SystemState s) {
    s.om = -s.om;
    s.op = -s.op;
    return s;
}

} // namespace semiq
