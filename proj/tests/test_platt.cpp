#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parity_cal/platt.hpp"
#include "parity_cal/synthetic.hpp"

using namespace parity_cal;

TEST(PlattApply, Examples) {
    EXPECT_NEAR(platt_apply({1, 0}, 0.3), 0.3, 1e-12);
    for (double b : {-2.0, 0.0, 0.7}) EXPECT_NEAR(platt_apply({3.5, b}, 0.5), oracle::sigmoid(b), 1e-15);
    // sigmoid(1) to 40 digits: 0.7310585786300048792...
    EXPECT_NEAR(platt_apply({2, 1}, 0.5), 0.7310585786300049, 1e-15);
}

TEST(PlattApply, EndpointsAreClamped) {
    const double lo = platt_apply({1, 0}, 0.0), hi = platt_apply({1, 0}, 1.0);
    EXPECT_NEAR(lo, 1e-6, 1e-15);
    EXPECT_NEAR(hi, 1 - 1e-6, 1e-15);
    for (double a : {-100.0, 100.0})
        for (double p : {0.0, 1.0}) {
            const double q = platt_apply({a, 0}, p);
            EXPECT_TRUE(std::isfinite(q));
            EXPECT_GE(q, 0.0);
            EXPECT_LE(q, 1.0);
        }
}

TEST(PlattApply, StrictlyIncreasingForPositiveSlope) {
    SeededRng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const PlattParams th{rng.uniform(0.01, 20), rng.uniform(-10, 10)};
        double prev = -1.0;
        for (int i = 0; i <= 200; ++i) {
            // Stay where the sigmoid is not saturated in double precision.
            const double p = 0.001 + 0.998 * i / 200.0;
            const double q = platt_apply(th, p);
            if (q > 1e-12 && q < 1 - 1e-12) { EXPECT_GT(q, prev); }
            prev = q;
        }
    }
}

TEST(PlattLogLoss, MatchesDirectCrossEntropy) {
    for (double p : {0.01, 0.2, 0.5, 0.9}) {
        for (int y : {0, 1}) {
            const double q = platt_apply({1.7, -0.4}, p);
            EXPECT_NEAR(platt_log_loss({1.7, -0.4}, p, y), y ? -std::log(q) : -std::log(1 - q), 1e-12);
            EXPECT_NEAR(platt_log_loss({1.7, -0.4}, p, y), oracle::platt_loss(1.7, -0.4, p, y), 1e-12);
        }
    }
}

TEST(PlattFitBatch, EmptySetIsRejected) {
    EXPECT_THROW(platt_fit_batch(std::vector<CalibrationPoint>{}), ValidationError);
    EXPECT_THROW(platt_fit_batch(std::vector<CalibrationPoint>{{1.5, 1}}), ValidationError);
    EXPECT_THROW(platt_fit_batch(std::vector<CalibrationPoint>{{0.5, 2}}), ValidationError);
}

TEST(PlattFitBatch, SymmetricLabelsAtHalf) {
    const std::vector<CalibrationPoint> cal{{0.5, 1}, {0.5, 0}};
    const auto th = platt_fit_batch(cal);
    EXPECT_NEAR(th.b, 0.0, 1e-6);
    EXPECT_NEAR(th.a, 1.0, 1e-3);
}

TEST(PlattFitBatch, AllPositiveLabelsPushOutputUp) {
    const std::vector<CalibrationPoint> cal(10, {0.9, 1});
    const auto th = platt_fit_batch(cal);
    EXPECT_LE(th.norm(), kParamRadius + 1e-9);
    EXPECT_GT(platt_apply(th, 0.9), 0.9999);
    EXPECT_LT(platt_fit_objective(cal, th), platt_fit_objective(cal, kIdentityParams));
}

TEST(PlattFitBatch, ClampsToBallAndStillImproves) {
    std::vector<CalibrationPoint> cal;
    for (int i = 0; i < 50; ++i) {
        cal.push_back({0.5001, 1});
        cal.push_back({0.4999, 0});
    }
    const auto th = platt_fit_batch(cal);
    EXPECT_NEAR(th.norm(), kParamRadius, 1e-9);
    EXPECT_LE(platt_fit_objective(cal, th), platt_fit_objective(cal, kIdentityParams));
}

TEST(PlattFitBatch, IsLocallyOptimal) {
    SeededRng rng(5);
    const auto cal = sample_platt_calset(20000, {2.0, 0.5}, 0.05, 0.95, rng);
    const auto th = platt_fit_batch(cal);
    const double f0 = platt_fit_objective(cal, th);
    for (double da : {-1e-3, 0.0, 1e-3})
        for (double db : {-1e-3, 0.0, 1e-3}) EXPECT_LE(f0, platt_fit_objective(cal, {th.a + da, th.b + db}));
    EXPECT_NEAR(th.a, 2.0, 0.15);
    EXPECT_NEAR(th.b, 0.5, 0.15);
}

TEST(PlattFitBatch, NeverWorseThanIdentity) {
    SeededRng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.next_u64() % 200;
        std::vector<CalibrationPoint> cal;
        const bool separable = trial % 5 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = rng.uniform();
            cal.push_back({p, separable ? (p > 0.5 ? 1 : 0) : rng.bernoulli(rng.uniform())});
        }
        const auto th = platt_fit_batch(cal);
        EXPECT_LE(th.norm(), kParamRadius + 1e-9);
        EXPECT_LE(platt_fit_objective(cal, th), platt_fit_objective(cal, kIdentityParams) + 1e-12);
    }
}

TEST(PlattFitBatch, AgreesWithCoarseGridOracle) {
    SeededRng rng(7);
    const auto cal = sample_platt_calset(3000, {1.5, -0.5}, 0.05, 0.95, rng);
    std::vector<double> feats;
    std::vector<int> ys;
    for (const auto& c : cal) {
        feats.push_back(std::log(c.p / (1 - c.p)));
        ys.push_back(c.y);
    }
    const auto best = oracle::grid_search(feats, ys, 0.0, 3.0, -2.0, 1.0, 0.05);
    const auto th = platt_fit_batch(cal);
    EXPECT_LE(platt_total_log_loss(cal, th), best.loss + 1e-6);
    EXPECT_NEAR(th.a, best.a, 0.05);
    EXPECT_NEAR(th.b, best.b, 0.05);
}

TEST(GridOracle, RowWalkMatchesFullScan) {
    SeededRng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const auto cal = sample_platt_calset(500, {rng.uniform(0.5, 5), rng.uniform(-2, 1)}, 0.02, 0.98, rng);
        std::vector<double> feats;
        std::vector<int> ys;
        for (const auto& c : cal) {
            feats.push_back(std::log(c.p / (1 - c.p)));
            ys.push_back(c.y);
        }
        const auto full = oracle::grid_search(feats, ys, 0.0, 6.0, -3.0, 1.0, 0.05);
        const auto rows = oracle::grid_search_rows(feats, ys, 0.0, 6.0, -3.0, 1.0, 0.05);
        EXPECT_NEAR(rows.loss, full.loss, 1e-9);
        EXPECT_NEAR(rows.a, full.a, 1e-12);
        EXPECT_NEAR(rows.b, full.b, 1e-12);
    }
}
