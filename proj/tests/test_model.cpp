#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semiq/errors.hpp"
#include "semiq/model.hpp"

using namespace semiq;

namespace {

const ModelParams kFig1b{1.05, 0.0, 1.0, 0.015, 1.0};

} // namespace

TEST(VectorField, HandEvaluatedPoint) {
    const Derivative d = vector_field({2, 0, 0, 1, 0, 0}, kFig1b);
    EXPECT_DOUBLE_EQ(d.dn1, 0.0);
    EXPECT_NEAR(d.dom, 4.06, 1e-15);
    EXPECT_DOUBLE_EQ(d.dop, 0.0);
    EXPECT_DOUBLE_EQ(d.dx, 0.0);
    EXPECT_DOUBLE_EQ(d.dp, -1.0);
}

TEST(VectorField, OriginOnlyRotatesOminus) {
    for (double delta : {-1.5, 0.0, 0.7, 3.0}) {
        const Derivative d = vector_field({1, 0, 0, 0, 0, 0}, {1.2, 0.3, delta, 0.4, 2.0});
        EXPECT_EQ(d.dn1, 0.0);
        EXPECT_EQ(d.dom, 2.0 * delta);
        EXPECT_EQ(d.dop, 0.0);
        EXPECT_EQ(d.dx, 0.0);
        EXPECT_EQ(d.dp, 0.0);
    }
}

TEST(VectorField, OnlyOminusMovesOnTheN1Axis) {
    const Derivative d = vector_field({7.5, 0, 0, 0, 0, 0}, kFig1b);
    EXPECT_NE(d.dom, 0.0);
    EXPECT_EQ(d.dn1, 0.0);
    EXPECT_EQ(d.dop, 0.0);
    EXPECT_EQ(d.dx, 0.0);
    EXPECT_EQ(d.dp, 0.0);
}

TEST(VectorField, MatchesIndependentFieldOnRandomInputs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const SystemState s = oracle::random_valid_state(rng);
        const ModelParams p = oracle::random_params(rng);
        const Derivative d = vector_field(s, p);
        const auto r = oracle::field({s.n1, s.om, s.op, s.x, s.p}, p);
        EXPECT_NEAR(d.dn1, (double)r[0], 1e-12 * (1 + std::abs((double)r[0])));
        EXPECT_NEAR(d.dom, (double)r[1], 1e-12 * (1 + std::abs((double)r[1])));
        EXPECT_NEAR(d.dop, (double)r[2], 1e-12 * (1 + std::abs((double)r[2])));
        EXPECT_NEAR(d.dx, (double)r[3], 1e-12 * (1 + std::abs((double)r[3])));
        EXPECT_NEAR(d.dp, (double)r[4], 1e-12 * (1 + std::abs((double)r[4])));
    }
}

TEST(VectorField, RejectsBadInput) {
    EXPECT_THROW(vector_field({2, 0, 0, 1, 0, 0}, {0.0, 0, 1, 0, 1}), DomainError);
    EXPECT_THROW(vector_field({2, 0, 0, 1, 0, 0}, {1.0, 0, 1, 0, -1}), DomainError);
    EXPECT_THROW(vector_field({NAN, 0, 0, 1, 0, 0}, kFig1b), DomainError);
}

TEST(Jacobian, HandEvaluatedRow) {
    const Mat5 j = jacobian({2, 0, 0, 1, 0, 0}, kFig1b);
    EXPECT_NEAR(j[1][0], 2.03, 1e-15);
    EXPECT_EQ(j[1][1], 0.0);
    EXPECT_NEAR(j[1][2], 2.1, 1e-15);
    EXPECT_NEAR(j[1][3], 0.06, 1e-15);
    EXPECT_EQ(j[1][4], 0.0);
}

TEST(Jacobian, ConstantWhenAlphaIsZero) {
    const ModelParams p{1.05, 0.2, 1.0, 0.0, 1.3};
    std::mt19937_64 rng(3);
    const Mat5 j0 = jacobian(oracle::random_valid_state(rng), p);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(jacobian(oracle::random_valid_state(rng), p), j0);
}

TEST(Jacobian, AgreesWithCentralDifferences) {
    std::mt19937_64 rng(5);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const SystemState s = oracle::random_valid_state(rng);
        const ModelParams p = oracle::random_params(rng);
        const Mat5 j = jacobian(s, p);
        for (int c = 0; c < 5; ++c) {
            Vec5 yp = s.dynamical(), ym = s.dynamical();
            yp[c] += h;
            ym[c] -= h;
            const Derivative fp = vector_field(SystemState::from_dynamical(yp, s.dn), p);
            const Derivative fm = vector_field(SystemState::from_dynamical(ym, s.dn), p);
            const double diff[5] = {fp.dn1 - fm.dn1, fp.dom - fm.dom, fp.dop - fm.dop, fp.dx - fm.dx,
                                    fp.dp - fm.dp};
            for (int r = 0; r < 5; ++r) EXPECT_NEAR(j[r][c], diff[r] / (2 * h), 1e-6);
        }
    }
}

TEST(Invariants, BlochExamples) {
    EXPECT_EQ(invariant_I({2, 0, 0, 0, 0, 0}), 4.0);
    EXPECT_EQ(invariant_I({1, 0, 0, 0, 0, 0}), 1.0);
    EXPECT_EQ(invariant_I({5, 3, 4, 0, 0, 0}), 0.0);
}

TEST(Invariants, EffectiveEnergyExamples) {
    EXPECT_NEAR(effective_energy({2, 0, 0, 1, -2.54950976, 0}, kFig1b), 4.8, 1e-8);
    EXPECT_EQ(effective_energy({1, 0, 0, 0, 0, 0}, kFig1b), 0.0);
    EXPECT_NEAR(effective_energy({1, 0, 0, 0, std::sqrt(2.0), 0}, kFig1b), 1.0, 1e-15);
}

TEST(Invariants, DirectionalDerivativesVanish) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const SystemState s = oracle::random_valid_state(rng);
        const ModelParams p = oracle::random_params(rng);
        const Derivative f = vector_field(s, p);
        const double fv[5] = {f.dn1, f.dom, f.dop, f.dx, f.dp};
        const double gi[5] = {2 * s.n1, -2 * s.om, -2 * s.op, 0, 0};
        const double ge[5] = {p.eps, 0, p.delta + p.alpha * s.x, p.alpha * s.op + p.omega * s.x, p.omega * s.p};
        double di = 0, de = 0, si = 0, se = 0;
        for (int k = 0; k < 5; ++k) {
            di += gi[k] * fv[k];
            de += ge[k] * fv[k];
            si += std::abs(gi[k] * fv[k]);
            se += std::abs(ge[k] * fv[k]);
        }
        EXPECT_LE(std::abs(di), 1e-12 * (1 + si));
        EXPECT_LE(std::abs(de), 1e-12 * (1 + se));
    }
}

TEST(Validity, Examples) {
    EXPECT_TRUE(validate_state({2, 0, 0, 0, 0, 0}).ok());
    const ValidityReport low = validate_state({0.5, 0, 0, 0, 0, 0});
    ASSERT_FALSE(low.ok());
    EXPECT_EQ(low.violations.front().quantity, "n1");
    const ValidityReport cone = validate_state({1, 2, 0, 0, 0, 0});
    ASSERT_EQ(cone.violations.size(), 1u);
    EXPECT_EQ(cone.violations.front().quantity, "I");
    EXPECT_EQ(cone.violations.front().value, -3.0);
}

TEST(MakeInitial, RegeneratesFig1Momentum) {
    const SystemState s = make_initial(4.8, 4.0, 0, 0, 1, 0, kFig1b, -1);
    EXPECT_EQ(s.n1, 2.0);
    EXPECT_EQ(s.om, 0.0);
    EXPECT_EQ(s.op, 0.0);
    EXPECT_EQ(s.x, 1.0);
    EXPECT_NEAR(s.p, -2.54950976, 5e-9);
    EXPECT_NEAR(s.p, -std::sqrt(6.5), 1e-15);
}

TEST(MakeInitial, SolvesN1FromI) {
    const SystemState s = make_initial(9.0, 4.0, 3.0, 0, 1, 0, kFig1b, 1);
    EXPECT_NEAR(s.n1, std::sqrt(13.0), 1e-15);
    EXPECT_NEAR(invariant_I(s), 4.0, 1e-12);
    EXPECT_GT(s.p, 0.0);
}

TEST(MakeInitial, Infeasible) {
    try {
        make_initial(0.1, 4.0, 0, 0, 1, 0, kFig1b, -1);
        FAIL();
    } catch (const InfeasibleConstraint& e) {
        EXPECT_EQ(e.constraint(), "E_eff");
    }
    try {
        make_initial(4.8, 0.5, 0, 0, 1, 0, kFig1b, -1);
        FAIL();
    } catch (const InfeasibleConstraint& e) {
        EXPECT_EQ(e.constraint(), "I");
    }
}

TEST(MakeInitial, RoundTripsInvariants) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2, 2);
    int built = 0;
    for (int i = 0; i < 400; ++i) {
        const ModelParams p = oracle::random_params(rng);
        const double e = 5 + 10 * std::abs(u(rng)), inv = 1 + 3 * std::abs(u(rng));
        try {
            const SystemState s = make_initial(e, inv, u(rng), u(rng), u(rng), 0, p, u(rng));
            EXPECT_NEAR(effective_energy(s, p), e, 1e-12 * std::abs(e));
            EXPECT_NEAR(invariant_I(s), inv, 1e-12 * std::abs(inv));
            ++built;
        } catch (const InfeasibleConstraint&) {
        }
    }
    EXPECT_GT(built, 100);
}

TEST(Parity, FieldCommutesExactly) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const SystemState s = oracle::random_valid_state(rng);
        const ModelParams p = oracle::random_params(rng);
        const Derivative a = vector_field(parity(s), parity(p));
        const Derivative b = vector_field(s, p);
        EXPECT_EQ(a.dn1, b.dn1);
        EXPECT_EQ(a.dom, -b.dom);
        EXPECT_EQ(a.dop, -b.dop);
        EXPECT_EQ(a.dx, b.dx);
        EXPECT_EQ(a.dp, b.dp);
        EXPECT_EQ(effective_energy(parity(s), parity(p)), effective_energy(s, p));
        EXPECT_EQ(invariant_I(parity(s)), invariant_I(s));
    }
}
