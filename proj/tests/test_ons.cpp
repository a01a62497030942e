#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parity_cal/ons.hpp"
#include "parity_cal/synthetic.hpp"

using namespace parity_cal;

namespace {

// Closest point on the sphere ||x|| = r to target in the metric M, by a
// dense angular scan followed by golden-section refinement.
PlattParams sphere_argmin(const PlattParams& t, const Sym2& m, double r) {
    auto f = [&](double ang) {
        const double da = r * std::cos(ang) - t.a, db = r * std::sin(ang) - t.b;
        return m.aa * da * da + 2 * m.ab * da * db + m.bb * db * db;
    };
    const int n = 20000;
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (f(2 * std::numbers::pi * i / n) < f(2 * std::numbers::pi * best / n)) best = i;
    double lo = 2 * std::numbers::pi * (best - 1) / n, hi = 2 * std::numbers::pi * (best + 1) / n;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 200; ++it) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        if (f(x1) < f(x2)) hi = x2; else lo = x1;
    }
    const double ang = 0.5 * (lo + hi);
    return {r * std::cos(ang), r * std::sin(ang)};
}

}  // namespace

TEST(Ons, InitialState) {
    const OnsState s;
    EXPECT_EQ(s.theta(), kIdentityParams);
    EXPECT_EQ(s.A(), Sym2::scaled_identity(100.0));
    EXPECT_DOUBLE_EQ(s.A_inv().aa, 0.01);
    EXPECT_EQ(s.step_count(), 0);
    const OnsState c(0.001, 10.0);
    EXPECT_DOUBLE_EQ(c.A().aa, 1e4);
}

TEST(Ons, RejectsBadHyperparameters) {
    EXPECT_THROW(OnsState(0.0, 1.0), ValidationError);
    EXPECT_THROW(OnsState(0.1, -1.0), ValidationError);
    EXPECT_THROW(OnsState(0.1, 1.0, {200.0, 0.0}), ValidationError);
    OnsState s;
    EXPECT_THROW(s.update(1.2, 1), ValidationError);
    EXPECT_THROW(s.update(0.5, 3), ValidationError);
}

TEST(Ons, SingleStepAtHalf) {
    // p = 0.5 makes the logit feature 0, so only b moves:
    // g = (0, -1/2), A_bb = 100.25, b = 10 * 0.5 / 100.25.
    const auto s = ons_step(OnsState{}, 0.5, 1);
    EXPECT_EQ(s.theta().a, 1.0);
    EXPECT_NEAR(s.theta().b, 0.049875311720698254, 1e-15);
    EXPECT_GT(s.theta().b, 0.0);
    EXPECT_DOUBLE_EQ(s.A().bb, 100.25);
    EXPECT_EQ(s.A().aa, 100.0);
    EXPECT_EQ(s.A().ab, 0.0);
}

TEST(Ons, TwoStepsAtHalf) {
    // Second observation y = 0 at the updated b; exact values computed at
    // 40 digits.
    const auto s = ons_step(ons_step(OnsState{}, 0.5, 1), 0.5, 0);
    const double b1 = 0.5 / 100.25 * 10;
    const double r = oracle::sigmoid(b1);
    const double abb = 100.25 + r * r;
    EXPECT_NEAR(s.A().bb, abb, 1e-12);
    EXPECT_NEAR(s.A().bb, 100.51262165107580, 1e-11);
    EXPECT_NEAR(s.theta().b, b1 - 10 * r / abb, 1e-14);
    EXPECT_NEAR(s.theta().b, -0.0011099511669128936, 1e-14);
}

TEST(Ons, MovesPredictionTowardLabel) {
    SeededRng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        OnsState s;
        for (int k = 0; k < 20; ++k) s.update(rng.uniform(), rng.bernoulli(0.5));
        const double p = rng.uniform(0.01, 0.99);
        const int y = rng.bernoulli(0.5);
        const double before = s.predict(p);
        const auto next = ons_step(s, p, y);
        if (next.theta().norm() >= kParamRadius - 1e-9) continue;
        const double after = next.predict(p);
        if (y == 1) {
            EXPECT_GE(after, before);
        } else {
            EXPECT_LE(after, before);
        }
    }
}

TEST(Ons, InverseStaysConsistent) {
    SeededRng rng(12);
    OnsState s;
    for (int t = 0; t < 100000; ++t) {
        s.update(rng.uniform(), rng.bernoulli(rng.uniform()));
        if (t % 997 == 0 || t == 99999) {
            const auto& A = s.A();
            const auto& Ai = s.A_inv();
            const double i00 = A.aa * Ai.aa + A.ab * Ai.ab, i01 = A.aa * Ai.ab + A.ab * Ai.bb;
            const double i10 = A.ab * Ai.aa + A.bb * Ai.ab, i11 = A.ab * Ai.ab + A.bb * Ai.bb;
            EXPECT_NEAR(i00, 1.0, 1e-8);
            EXPECT_NEAR(i01, 0.0, 1e-8);
            EXPECT_NEAR(i10, 0.0, 1e-8);
            EXPECT_NEAR(i11, 1.0, 1e-8);
            EXPECT_GE(A.eigenvalues()[0], 100.0 * (1 - 1e-12));
            EXPECT_LE(s.theta().norm(), kParamRadius + 1e-9);
        }
    }
    EXPECT_EQ(s.step_count(), 100000);
}

TEST(Ons, AStartsAtScaledIdentityAndGrowsMonotonically) {
    SeededRng rng(13);
    OnsState s(0.01, 2.0);
    const double floor = 1.0 / (0.01 * 2.0) * (1.0 / (0.01 * 2.0));
    double prev_trace = s.A().trace();
    for (int t = 0; t < 2000; ++t) {
        s.update(rng.uniform(), rng.bernoulli(0.3));
        EXPECT_GE(s.A().trace(), prev_trace);
        EXPECT_GE(s.A().eigenvalues()[0], floor * (1 - 1e-12));
        prev_trace = s.A().trace();
    }
}

TEST(Projection, InsideBallIsUnchanged) {
    const PlattParams t{3.0, -4.0};
    EXPECT_EQ(project_onto_ball(t, Sym2{2.0, 0.5, 1.0}), t);
}

TEST(Projection, IdentityMetricIsRadialScaling) {
    const auto x = project_onto_ball({300.0, 400.0}, Sym2::scaled_identity(7.0));
    EXPECT_NEAR(x.a, 60.0, 1e-9);
    EXPECT_NEAR(x.b, 80.0, 1e-9);
}

TEST(Projection, MatchesBruteForceInGeneralMetric) {
    SeededRng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const double l1 = std::exp(rng.uniform(-3, 6)), l2 = std::exp(rng.uniform(-3, 6));
        const double ang = rng.uniform(0, std::numbers::pi);
        const double c = std::cos(ang), s = std::sin(ang);
        const Sym2 m{l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
        const double r = rng.uniform(101, 1000), phi = rng.uniform(0, 2 * std::numbers::pi);
        const PlattParams t{r * std::cos(phi), r * std::sin(phi)};
        const auto x = project_onto_ball(t, m);
        EXPECT_NEAR(x.norm(), kParamRadius, 1e-9);
        const auto ref = sphere_argmin(t, m, kParamRadius);
        auto f = [&](const PlattParams& p) {
            const double da = p.a - t.a, db = p.b - t.b;
            return m.aa * da * da + 2 * m.ab * da * db + m.bb * db * db;
        };
        EXPECT_LE(f(x), f(ref) * (1 + 1e-9)) << "trial " << trial;
    }
}

TEST(Projection, LandsOnSphereWhenNewtonStepLeavesBall) {
    // With a tiny A0 the first step has length about 1/(gamma |g|).
    OnsState s(1e-3, 1e6);
    s.update(0.9, 1);
    EXPECT_NEAR(s.theta().norm(), kParamRadius, 1e-9);
    EXPECT_GT(s.predict(0.9), 0.9);
    for (int t = 0; t < 200; ++t) {
        s.update(0.9, t % 3 == 0 ? 0 : 1);
        EXPECT_LE(s.theta().norm(), kParamRadius + 1e-9);
    }
}
