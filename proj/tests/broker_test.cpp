#include "margin/broker.hpp"
#include "margin/errors.hpp"
#include "margin/sim.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace margin;

namespace {

// n = 1, nu = 0.1, sigma = 0.25: lambda = 0.06875, 1'Sigma^-1 1 = 16.
MarketUniverse slow_stock() { return test::one_stock(0.1, 0.25); }

// U(r_L) for a single stock written out directly: mu = nu + s^2/2.
double stock_objective(double beta, double r_l) {
    const double r = 0.035, s2 = 0.0625, mu = 0.1 + s2 / 2, lambda = mu - s2;
    return beta * std::log((lambda - r_l) * (r_l - r)) + r_l + 0.5 * (mu - r_l) * (mu - r_l) / s2;
}

}  // namespace

TEST(Monopoly, SingleStockExample) {
    const auto u = test::one_stock(0.09, 0.25);
    const auto q = monopoly_rate(0.035, shadow_rate(u));
    EXPECT_NEAR(q.rate, 0.046875, 1e-12);
    EXPECT_NEAR(q.net_margin, 0.011875, 1e-12);
    EXPECT_NEAR(q.profit(16.0), 16.0 * 0.011875 * 0.011875, 1e-15);
}

TEST(Monopoly, TwoStockExample) {
    EXPECT_NEAR(monopoly_rate(0.035, shadow_rate(test::two_stock_universe())).rate, 0.0546875, 1e-12);
}

TEST(Monopoly, MaximizesInstantaneousProfit) {
    const double r = 0.035, lambda = 0.074375;
    const double best = instantaneous_profit(21.0, lambda, monopoly_rate(r, lambda).rate, r);
    for (double r_l = r; r_l <= lambda; r_l += 1e-4) EXPECT_LE(instantaneous_profit(21.0, lambda, r_l, r), best + 1e-15);
}

TEST(Monopoly, NoDemandWhenShadowRateAtCost) {
    EXPECT_THROW(monopoly_rate(0.035, 0.035), NoDemand);
    EXPECT_THROW(monopoly_rate(0.05, 0.035), NoDemand);
}

TEST(SingleStockRate, ClosedForm) {
    EXPECT_NEAR(single_stock_rate(0.035, 0.09, 0.25).rate, 0.046875, 1e-15);
    EXPECT_NEAR(single_stock_rate(0.035, 0.09, 0.25).net_margin, (0.09 - 0.035) / 2 - 0.0625 / 4, 1e-15);
    EXPECT_DOUBLE_EQ(single_stock_rate(0.035, 0.09, 0.0).rate, (0.035 + 0.09) / 2);
    EXPECT_THROW(single_stock_rate(0.09, 0.09, 0.25), NoDemand);
}

TEST(SingleStockRate, AgreesWithUniverseRoute) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> nu(0.05, 0.2), sig(0.05, 0.3), r(0.0, 0.04);
    for (int i = 0; i < 1000; ++i) {
        const double n = nu(rng), s = sig(rng), rr = r(rng);
        const double lambda = n - s * s / 2;
        if (lambda <= rr) continue;
        EXPECT_NEAR(single_stock_rate(rr, n, s).rate, monopoly_rate(rr, shadow_rate(test::one_stock(n, s))).rate, 1e-14);
    }
}

TEST(SingleStockRate, ComparativeStaticsInCostOfFunds) {
    const double h = 1e-6;
    const auto at = [](double r) { return single_stock_rate(r, 0.09, 0.25); };
    EXPECT_NEAR((at(0.035 + h).rate - at(0.035 - h).rate) / (2 * h), 0.5, 1e-8);
    EXPECT_NEAR((at(0.035 + h).net_margin - at(0.035 - h).net_margin) / (2 * h), -0.5, 1e-8);
}

TEST(Cournot, OneBrokerIsMonopoly) {
    const double r = 0.035, lambda = 0.074375, slope = 64.0 / 3.0;
    const auto c = cournot(r, lambda, slope, 1);
    const auto m = monopoly_rate(r, lambda);
    EXPECT_NEAR(c.rate, m.rate, 1e-12);
    EXPECT_NEAR(c.net_margin, m.net_margin, 1e-12);
    EXPECT_NEAR(c.aggregate_profit, m.profit(slope), 1e-12);
}

TEST(Cournot, ThreeBrokers) {
    const auto c = cournot(0.035, 0.074375, 21.3333, 3);
    EXPECT_NEAR(c.rate, 0.04484375, 1e-15);
    EXPECT_NEAR(c.aggregate_quantity, 3 * c.per_broker_quantity, 1e-15);
    EXPECT_NEAR(c.rate, 0.074375 - c.aggregate_quantity / 21.3333, 1e-15);
    EXPECT_NEAR(c.aggregate_profit, c.aggregate_quantity * c.net_margin, 1e-15);
}

TEST(Cournot, CompetitiveLimit) {
    const auto c = cournot(0.035, 0.074375, 21.3333, 1'000'000);
    EXPECT_LT(c.rate - 0.035, (0.074375 - 0.035) * 1e-6);
    EXPECT_GT(c.rate, 0.035);
}

TEST(Cournot, NoProfitableUnilateralDeviation) {
    for (long n : {1L, 2L, 3L, 7L, 50L}) {
        const double r = 0.035, lambda = 0.074375, slope = 21.3333;
        const auto c = cournot(r, lambda, slope, n);
        const double rivals = c.aggregate_quantity - c.per_broker_quantity;
        const double base = cournot_profit(r, lambda, slope, c.per_broker_quantity, rivals);
        EXPECT_NEAR(base, c.aggregate_profit / static_cast<double>(n), 1e-12);
        for (double dq : {-1e-4, 1e-4})
            EXPECT_LE(cournot_profit(r, lambda, slope, c.per_broker_quantity + dq, rivals), base);
    }
}

TEST(Cournot, InvalidArguments) {
    EXPECT_THROW(cournot(0.035, 0.07, 10, 0), InvalidArguments);
    EXPECT_THROW(cournot(0.035, 0.07, 0, 2), InvalidArguments);
    EXPECT_THROW(cournot(0.07, 0.035, 10, 2), InvalidArguments);
}

TEST(DiscountedMonopoly, Limits) {
    const auto u = slow_stock();
    const double r = 0.035, mid = 0.5 * (r + shadow_rate(u));
    EXPECT_NEAR(discounted_monopoly_rate(u, r, 1e8), mid, 1e-4);
    EXPECT_NEAR(discounted_monopoly_rate(u, r, 1e-8), r, 1e-4);
    EXPECT_THROW(discounted_monopoly_rate(u, 0.07, 0.1), NoDemand);
    EXPECT_THROW(discounted_monopoly_rate(u, r, 0.0), DomainError);
}

TEST(DiscountedMonopoly, MatchesDenseGridOfObjective) {
    const double r = 0.035, lambda = 0.06875, beta = 0.1;
    double best_x = 0, best = -1e300;
    for (double x = r + 1e-7; x < lambda; x += 1e-7) {
        const double v = stock_objective(beta, x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double rate = discounted_monopoly_rate(slow_stock(), r, beta);
    EXPECT_NEAR(rate, best_x, 1e-6);
    EXPECT_NEAR(rate, 0.05148182289693146, 1e-12);
}

TEST(DiscountedMonopoly, IncreasingInBetaAndBelowMonopoly) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = test::random_universe(rng, 1 + trial % 3, 0.03);
        const double mid = monopoly_rate(0.03, shadow_rate(u)).rate;
        double prev = 0.03;
        for (int k = 0; k < 50; ++k) {
            const double beta = std::pow(10.0, -4.0 + 8.0 * k / 49.0);
            const double rate = discounted_monopoly_rate(u, 0.03, beta);
            EXPECT_GT(rate, prev);
            EXPECT_LT(rate, mid);
            prev = rate;
        }
    }
}

TEST(DiscountedMonopoly, ThreeWayAgreementWithMonopoly) {
    const double r = 0.035, lambda = 0.074375;
    const double m = monopoly_rate(r, lambda).rate;
    EXPECT_NEAR(cournot(r, lambda, 64.0 / 3.0, 1).rate, m, 1e-6);
    EXPECT_NEAR(discounted_monopoly_rate(64.0 / 3.0, lambda, r, 1e8), m, 1e-6);
}

// Positivity behind dr_L/dbeta > 0 in the implicit differentiation of the FOC.
TEST(DiscountedMonopoly, ComparativeStaticsInequality) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> scale(-8, 1), frac(1e-6, 1 - 1e-6);
    for (int i = 0; i < 100000; ++i) {
        const double y = std::pow(10.0, scale(rng));
        const double x = frac(rng) * y;
        EXPECT_GT(1 / x - 2 / y + 2 / (y - x), 0.0);
        EXPECT_GT(2 * x * x + y * (y - x), 0.0);
    }
}

TEST(RationalizingBeta, ClosedForm) {
    EXPECT_NEAR(rationalizing_beta(slow_stock(), 0.035, 0.045), 0.006563636363636364, 1e-15);
    EXPECT_NEAR(discounted_monopoly_rate(slow_stock(), 0.035, 0.006563636363636364), 0.045, 1e-10);
}

TEST(RationalizingBeta, RoundTrip) {
    std::mt19937_64 rng(53);
    const auto u = slow_stock();
    const double r = 0.035, mid = 0.5 * (r + shadow_rate(u));
    std::uniform_real_distribution<double> rate(r + 1e-6, mid - 1e-6);
    for (int i = 0; i < 100; ++i) {
        const double r_l = rate(rng);
        EXPECT_NEAR(discounted_monopoly_rate(u, r, rationalizing_beta(u, r, r_l)), r_l, 1e-10);
    }
}

TEST(RationalizingBeta, DivergesAtMonopolyRate) {
    const auto u = slow_stock();
    const double mid = 0.5 * (0.035 + shadow_rate(u));
    // beta grows like 1/distance; at these parameters the coefficient is
    // S (lambda - mid)^2 (mid - r) / 2 = 3.84e-5, so beta passes 1e6 near 1e-11
    const double coef = 16.0 * std::pow(shadow_rate(u) - mid, 2) * (mid - 0.035) / 2;
    for (double gap : {1e-6, 1e-8, 1e-10})
        EXPECT_NEAR(rationalizing_beta(u, 0.035, mid - gap) * gap, coef, 1e-3 * coef);
    EXPECT_GT(rationalizing_beta(u, 0.035, mid - 1e-11), 1e6);
    EXPECT_THROW(rationalizing_beta(u, 0.035, mid), DomainError);
    EXPECT_THROW(rationalizing_beta(u, 0.035, 0.035), DomainError);
}

TEST(HjbObjective, ConcaveAtModeratePatience) {
    const auto u = slow_stock();
    const double h = 1e-5;
    for (double x = 0.035 + 2 * h; x < 0.06875 - 2 * h; x += h) {
        const double second =
            hjb_objective(u, 0.035, 0.1, x + h) - 2 * hjb_objective(u, 0.035, 0.1, x) + hjb_objective(u, 0.035, 0.1, x - h);
        EXPECT_LE(second, 0.0) << x;
    }
}

// Below beta = S (lambda - r)^2 / 8 the objective loses concavity near the
// middle of (r, lambda) but stays single-peaked.
TEST(HjbObjective, UnimodalForVeryPatientBroker) {
    const auto u = slow_stock();
    const double beta = 1e-3;   // threshold is 16 * 0.03375^2 / 8 = 2.28e-3
    const double h = 1e-5;
    bool saw_convex = false;
    const double peak = discounted_monopoly_rate(u, 0.035, beta);
    for (double x = 0.035 + 2 * h; x < 0.06875 - 2 * h; x += h) {
        const double here = hjb_objective(u, 0.035, beta, x);
        const double slope = hjb_objective(u, 0.035, beta, x + h) - here;
        if (hjb_objective(u, 0.035, beta, x + h) - 2 * here + hjb_objective(u, 0.035, beta, x - h) > 0) saw_convex = true;
        if (x + h < peak) EXPECT_GT(slope, 0.0) << x;
        if (x > peak) EXPECT_LT(slope, 0.0) << x;
    }
    EXPECT_TRUE(saw_convex);
}

TEST(HjbObjective, ArgmaxIsTheFocRoot) {
    const auto u = test::two_stock_universe();
    for (double beta : {0.01, 0.1, 1.0, 10.0}) {
        const double lambda = shadow_rate(u);
        const double x = sim::grid_argmax([&](double r_l) { return hjb_objective(u, 0.035, beta, r_l); }, 0.035, lambda,
                                          {1e-6, 1e-10});
        EXPECT_NEAR(x, discounted_monopoly_rate(u, 0.035, beta), 1e-6) << beta;
    }
}

TEST(HjbObjective, ZeroDiscountClampsToCostOfFunds) {
    const auto u = slow_stock();
    const double x =
        sim::grid_argmax([&](double r_l) { return hjb_objective(u, 0.035, 0.0, r_l); }, 0.035, 0.06875, {1e-5, 1e-10});
    EXPECT_NEAR(x, 0.035, 1e-8);
}

TEST(HjbObjective, DomainErrors) {
    const auto u = slow_stock();
    EXPECT_THROW(hjb_objective(u, 0.035, 0.1, 0.035), DomainError);
    EXPECT_THROW(hjb_objective(u, 0.035, 0.1, 0.06875), DomainError);
    EXPECT_THROW(hjb_objective(u, 0.035, -1.0, 0.05), DomainError);
}

TEST(HjbValueFunction, CoefficientsSolveTheKernel) {
    const auto u = test::two_stock_universe();
    const double beta = 0.2, r = 0.035, lambda = shadow_rate(u);
    const auto v = hjb_value_function(u, r, beta);
    EXPECT_DOUBLE_EQ(v.c2, 1 / beta);
    // c1 is the max of the kernel, which is U / beta^2
    double best = -1e300;
    for (double x = r + 1e-6; x < lambda; x += 1e-6) best = std::max(best, hjb_objective(u, r, beta, x) / (beta * beta));
    EXPECT_NEAR(v.c1, best, 1e-9 * std::abs(best));
    EXPECT_GE(v.c1, best - 1e-12 * std::abs(best));
}
