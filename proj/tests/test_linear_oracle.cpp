#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "semiq/integrator.hpp"
#include "semiq/linear_oracle.hpp"

using namespace semiq;

namespace {

QuantumTriple random_triple(std::mt19937_64& rng) {
    const SystemState s = oracle::random_valid_state(rng);
    return {s.n1, s.om, s.op};
}

double rel_dev(const QuantumTriple& a, const std::array<double, 3>& b) {
    const double d = std::max({std::abs(a.n1 - b[0]), std::abs(a.om - b[1]), std::abs(a.op - b[2])});
    const double s = std::max({std::abs(b[0]), std::abs(b[1]), std::abs(b[2])});
    return d / s;
}

} // namespace

TEST(Classify, Critical) {
    const QuantumRegime r = classify({1.0, 0.0, 1.0, 0.0, 1.0});
    EXPECT_EQ(r.label, RegimeKind::Critical);
    EXPECT_EQ(r.lambda_plus, 0.0);
    EXPECT_EQ(r.lambda_minus, 0.0);
}

TEST(Classify, StablePositiveDefinite) {
    const QuantumRegime r = classify({1.05, 0.0, 1.0, 0.0, 1.0});
    EXPECT_EQ(r.label, RegimeKind::StablePositiveDefinite);
    EXPECT_NEAR(r.eta.real(), std::sqrt(0.1025), 1e-15);
    EXPECT_NEAR(r.eta.real(), 0.3201562, 1e-7);
    EXPECT_EQ(r.lambda_plus, r.lambda_minus);
}

TEST(Classify, StableNonPositive) {
    const QuantumRegime r = classify({1.0, 0.5, 0.9, 0.0, 1.0});
    EXPECT_EQ(r.label, RegimeKind::StableNonPositive);
    EXPECT_LT(r.lambda_minus.real(), 0.0);
    EXPECT_GT(r.lambda_plus.real(), 0.0);
}

TEST(Classify, SemidefiniteAndUnstable) {
    // sqrt(eps^2 - gamma^2) = 0.6 exactly at eps = 1, gamma = 0.8.
    EXPECT_EQ(classify({1.0, 0.8, 0.6, 0.0, 1.0}).label, RegimeKind::StableSemidefinite);
    const QuantumRegime u = classify({1.0, 0.0, 2.0, 0.0, 1.0});
    EXPECT_EQ(u.label, RegimeKind::Unstable);
    EXPECT_NEAR(u.eta.imag(), std::sqrt(3.0), 1e-15);
    EXPECT_EQ(u.eta.real(), 0.0);
}

TEST(Classify, NegativeDeltaUsesMagnitude) {
    EXPECT_EQ(classify({1.0, 0.0, -1.0, 0.0, 1.0}).label, RegimeKind::Critical);
    EXPECT_EQ(classify({1.0, 0.0, -2.0, 0.0, 1.0}).label, RegimeKind::Unstable);
}

TEST(Bogoliubov, IdentityAtZeroPairing) {
    const auto [u, v] = bogoliubov_uv({1.7, 0.0, 0.0, 0.0, 1.0});
    EXPECT_NEAR(u.real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(v), 0.0, 1e-15);
}

TEST(Bogoliubov, UnitEta) {
    const auto [u, v] = bogoliubov_uv({1.25, 0.0, 0.75, 0.0, 1.0});
    EXPECT_NEAR(u.real(), std::sqrt(2.25 / 2), 1e-15);
    EXPECT_NEAR(u.real(), 1.06066, 1e-5);
    EXPECT_NEAR(v.real(), std::sqrt(0.25 / 2), 1e-15);
    EXPECT_NEAR((u * u - v * v).real(), 1.0, 1e-14);
}

TEST(Bogoliubov, CriticalThrows) {
    EXPECT_THROW(bogoliubov_uv({1.0, 0.0, 1.0, 0.0, 1.0}), CriticalityError);
}

TEST(EvolveLinear, IdentityAtTimeZero) {
    const QuantumTriple q0{2.5, -0.3, 1.1};
    EXPECT_EQ(evolve_linear(q0, 1.05, 1.0, 0.0), q0);
    EXPECT_EQ(evolve_linear(q0, 1.0, 2.0, 0.0), q0);
}

TEST(EvolveLinear, PureRotationWithoutPairing) {
    const QuantumTriple q0{3.0, 0.4, -1.2};
    const double eps = 1.3;
    for (double t : {0.1, 1.0, 7.3}) {
        const QuantumTriple q = evolve_linear(q0, eps, 0.0, t);
        EXPECT_NEAR(q.n1, q0.n1, 1e-15);
        EXPECT_NEAR(q.om, q0.om * std::cos(2 * eps * t) + q0.op * std::sin(2 * eps * t), 1e-13);
        EXPECT_NEAR(q.op, q0.op * std::cos(2 * eps * t) - q0.om * std::sin(2 * eps * t), 1e-13);
    }
}

TEST(EvolveLinear, FromFig1QuantumData) {
    const double eps = 1.05, delta = 1.0, eta_sq = eps * eps - delta * delta;
    const ModelParams p{eps, 0.0, delta, 0.0, 1.0};
    for (double t : {0.5, 1.0, 5.0}) {
        const double ref = (2 * eps * eps - 2 * delta * delta * std::cos(2 * std::sqrt(eta_sq) * t)) / eta_sq;
        EXPECT_NEAR(evolve_linear({2, 0, 0}, eps, delta, t).n1, ref, 1e-12 * ref);
        const SystemState num = oracle::rk4({2, 0, 0, 0, 0, 0}, p, t, 1e-4L);
        EXPECT_NEAR(evolve_linear({2, 0, 0}, eps, delta, t).n1, num.n1, 1e-10);
    }
}

TEST(EvolveLinear, AgreesWithMatrixExponential) {
    std::mt19937_64 rng(23);
    for (auto [eps, delta] : {std::pair{1.05, 1.0}, {1.0, 2.0}, {0.7, -0.3}, {1.0, -1.5}}) {
        for (int i = 0; i < 20; ++i) {
            const QuantumTriple q0 = random_triple(rng);
            for (double t : {0.01, 0.7, 3.0}) {
                const auto ref = oracle::expm_triple({q0.n1, q0.om, q0.op}, eps, delta, t);
                EXPECT_LE(rel_dev(evolve_linear(q0, eps, delta, t), ref), 1e-12)
                    << "eps=" << eps << " delta=" << delta << " t=" << t;
            }
        }
    }
}

TEST(EvolveLinear, PreservesBlochInvariant) {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 50; ++i) {
        const QuantumTriple q0 = random_triple(rng);
        const QuantumTriple q = evolve_linear(q0, 1.05, 1.0, 37.0);
        EXPECT_NEAR(q.invariant(), q0.invariant(), 1e-10 * (q.n1 * q.n1));
    }
}

TEST(EvolveLinear, CriticalAndBadInputThrow) {
    EXPECT_THROW(evolve_linear({2, 0, 0}, 1.0, 1.0, 1.0), CriticalityError);
    EXPECT_THROW(evolve_linear({2, 0, 0}, 1.0, -1.0, 1.0), CriticalityError);
    EXPECT_THROW(evolve_linear({2, 0, 0}, 1.05, 1.0, NAN), DomainError);
}

TEST(EvolveCritical, HandEvaluated) {
    const QuantumTriple q = evolve_critical({2, 0, 0}, 1.0, 1.0);
    EXPECT_EQ(q.n1, 6.0);
    EXPECT_EQ(q.om, 4.0);
    EXPECT_EQ(q.op, -4.0);
    EXPECT_EQ(q.invariant(), 4.0);
    EXPECT_EQ(evolve_critical({2, 0.3, -0.1}, 1.0, 0.0), (QuantumTriple{2, 0.3, -0.1}));
}

TEST(EvolveCritical, FrozenDirection) {
    const QuantumTriple q0{3.0, 0.0, -3.0};
    for (double t : {0.5, 10.0, 1e3}) EXPECT_EQ(evolve_critical(q0, 1.3, t), q0);
}

TEST(EvolveCritical, AgreesWithMatrixExponential) {
    std::mt19937_64 rng(31);
    for (int sign : {+1, -1}) {
        for (int i = 0; i < 20; ++i) {
            const QuantumTriple q0 = random_triple(rng);
            for (double t : {0.3, 2.0, 10.0}) {
                const auto ref = oracle::expm_triple({q0.n1, q0.om, q0.op}, 1.2, sign * 1.2, t);
                EXPECT_LE(rel_dev(evolve_critical(q0, 1.2, t, sign), ref), 1e-12);
            }
        }
    }
}

TEST(EvolveCritical, NearCriticalContinuity) {
    const double eps = 1.0, delta = std::sqrt(1.0 - 1e-10);  // |eta| = 1e-5
    std::mt19937_64 rng(37);
    for (int i = 0; i < 20; ++i) {
        const QuantumTriple q0 = random_triple(rng);
        for (double t = 0.0; t <= 5.0; t += 0.25) {
            const QuantumTriple a = evolve_linear(q0, eps, delta, t);
            const QuantumTriple b = evolve_critical(q0, eps, t);
            EXPECT_LE(rel_dev(a, {b.n1, b.om, b.op}), 1e-6);
        }
    }
}

TEST(EvolveClassical, Examples) {
    auto [x0, p0] = evolve_classical(0.3, -1.1, 2.0, 0.0);
    EXPECT_EQ(x0, 0.3);
    EXPECT_EQ(p0, -1.1);
    auto [x1, p1] = evolve_classical(1.0, 0.0, 1.0, std::numbers::pi / 2);
    EXPECT_NEAR(x1, 0.0, 1e-15);
    EXPECT_NEAR(p1, -1.0, 1e-15);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng), p = u(rng);
        auto [xt, pt] = evolve_classical(x, p, std::abs(u(rng)), u(rng));
        EXPECT_NEAR(xt * xt + pt * pt, x * x + p * p, 1e-14 * (x * x + p * p) + 1e-14);
    }
}

TEST(EvolveDecoupled, MatchesIntegratorWithoutCoupling) {
    const ModelParams p{1.05, 0.0, 1.0, 0.0, 1.0};
    const SystemState s0{2.0, 0.0, 0.0, 1.0, -2.54950976, 0.0};
    const Trajectory tr = integrate(s0, p, 20.0, IntegratorSettings{}, 1.0);
    for (const Sample& s : tr.samples) {
        const SystemState ref = evolve_decoupled(s0, p, s.t);
        EXPECT_NEAR(s.s.n1, ref.n1, 1e-9);
        EXPECT_NEAR(s.s.x, ref.x, 1e-9);
    }
}
