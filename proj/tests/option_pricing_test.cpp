#include "margin/errors.hpp"
#include "margin/option_pricing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace margin;

namespace {
constexpr double kTerm = 3.0 / 365.0;
}

TEST(NormCdf, KnownValues) {
    EXPECT_DOUBLE_EQ(norm_cdf(0.0), 0.5);
    EXPECT_NEAR(norm_cdf(1.0), 0.8413447460685429, 1e-15);
    EXPECT_NEAR(norm_cdf(-1.959963984540054), 0.025, 1e-15);
    EXPECT_NEAR(norm_cdf(-8.0), 6.220960574271785e-16, 1e-28);
}

TEST(BsCall, ZeroStrikeIsSpot) { EXPECT_DOUBLE_EQ(bs_call(100, 0, 0.035, 0.4, 1.0), 100.0); }

TEST(BsCall, ShortExpiryApproachesIntrinsic) {
    const double r = 0.035;
    const double t = 1e-9;
    EXPECT_NEAR(bs_call(100, 50 * std::exp(r * t), r, 0.4, t), 50.0, 1e-9);
}

TEST(BsCall, ReferenceValues) {
    // 40-digit evaluation of the closed form
    EXPECT_NEAR(bs_call(100, 50, 0.035, 0.4, kTerm), 50.01438149297375, 1e-12);
    EXPECT_NEAR(bs_call(100, 100, 0.035, 0.4, kTerm), 1.460858905125917, 1e-12);
}

TEST(BsCall, DomainErrors) {
    EXPECT_THROW(bs_call(0, 50, 0.03, 0.4, 1), DomainError);
    EXPECT_THROW(bs_call(100, 50, 0.03, 0.0, 1), DomainError);
    EXPECT_THROW(bs_call(100, 50, 0.03, 0.4, 0), DomainError);
    EXPECT_THROW(bs_call(100, -1, 0.03, 0.4, 1), DomainError);
}

TEST(BsCall, NoArbitrageBoundsAndParity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> s(10, 200), k(0, 300), r(0, 0.1), v(0.05, 1.0), t(0.001, 5);
    for (int i = 0; i < 10000; ++i) {
        const double s0 = s(rng), kk = k(rng), rr = r(rng), vv = v(rng), tt = t(rng);
        const double c = bs_call(s0, kk, rr, vv, tt);
        EXPECT_GE(c, std::max(s0 - kk * std::exp(-rr * tt), 0.0));
        EXPECT_LE(c, s0);
        EXPECT_NEAR(c - bs_put(s0, kk, rr, vv, tt), s0 - kk * std::exp(-rr * tt), 1e-10 * s0);
    }
}

TEST(Lattice, Parameters) {
    const auto l = LatticeSpec::make(0.035, 0.4, kTerm, 19);
    EXPECT_DOUBLE_EQ(l.dt, kTerm / 19);
    EXPECT_NEAR(l.up * l.down, 1.0, 1e-15);
    EXPECT_GT(l.q, 0.0);
    EXPECT_LT(l.q, 1.0);
    EXPECT_NEAR(l.q, (std::exp(0.035 * l.dt) - l.down) / (l.up - l.down), 1e-12);
    EXPECT_THROW(LatticeSpec::make(0.035, 0.4, kTerm, 0), InvalidLattice);
    // r dt >= sigma sqrt(dt) pushes q to 1
    EXPECT_THROW(LatticeSpec::make(0.5, 0.1, 10.0, 1), InvalidLattice);
}

TEST(CrrCall, SingleStepByHand) {
    const auto l = LatticeSpec::make(0.035, 0.4, kTerm, 1);
    const double u = std::exp(0.4 * std::sqrt(kTerm));
    const double d = 1 / u;
    const double q = (std::exp(0.035 * kTerm) - d) / (u - d);
    const double hand = q * (100 * u - 100) * std::exp(-0.035 * kTerm);
    EXPECT_NEAR(crr_call(100, 100, l), hand, 1e-12);
    EXPECT_NEAR(crr_call(100, 100, l), 1.827115732848915, 1e-12);
}

TEST(CrrCall, ZeroStrikeIsSpot) {
    for (long n : {1L, 7L, 100L, 5000L}) {
        const auto l = LatticeSpec::make(0.035, 0.4, 0.5, n);
        EXPECT_NEAR(crr_call(100, 0, l), 100.0, 1e-9) << n;
    }
}

// Direct summation with lgamma as an independent check on the recursion.
TEST(CrrCall, MatchesDirectBinomialSum) {
    for (long n : {1L, 2L, 15L, 19L, 250L, 2000L}) {
        for (double k : {50.0, 90.0, 100.0, 130.0}) {
            const auto l = LatticeSpec::make(0.035, 0.4, 0.75, n);
            double sum = 0.0;
            for (long j = 0; j <= n; ++j) {
                const double lw = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                                  j * std::log(l.q) + (n - j) * std::log(1 - l.q);
                sum += std::exp(lw) * std::max(100 * std::pow(l.up, 2.0 * j - n) - k, 0.0);
            }
            EXPECT_NEAR(crr_call(100, k, l), std::exp(-0.035 * 0.75) * sum, 1e-9) << n << " " << k;
        }
    }
}

TEST(CrrCall, LatticeParity) {
    for (long n : {1L, 10L, 1000L}) {
        const auto l = LatticeSpec::make(0.035, 0.4, 1.0, n);
        for (double k : {60.0, 100.0, 140.0})
            EXPECT_NEAR(crr_call(100, k, l) - crr_put(100, k, l), 100 - k * l.discount(), 1e-10);
    }
}

TEST(CrrCall, LargeLatticeStaysFinite) {
    const auto l = LatticeSpec::make(0.035, 0.4, 1.0, 100000);
    const double c = crr_call(100, 100, l);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_NEAR(c, bs_call(100, 100, 0.035, 0.4, 1.0), 1e-3);
}

TEST(CrrCall, MonotoneInStrikeAndSpot) {
    const auto l = LatticeSpec::make(0.035, 0.4, 0.25, 60);
    double prev = crr_call(100, 0, l);
    for (double k = 1; k <= 200; k += 1) {
        const double c = crr_call(100, k, l);
        EXPECT_LE(c, prev + 1e-12);
        prev = c;
    }
    prev = crr_call(1, 100, l);
    for (double s = 2; s <= 300; s += 1) {
        const double c = crr_call(s, 100, l);
        EXPECT_GE(c, prev - 1e-12);
        prev = c;
    }
}

TEST(CrrCall, ConvergesToBlackScholes) {
    const double bs = bs_call(100, 100, 0.035, 0.4, kTerm);
    const auto err = [&](long n) { return std::abs(crr_call(100, 100, LatticeSpec::make(0.035, 0.4, kTerm, n)) - bs); };
    EXPECT_LT(err(10000), 1e-3 * 100);
    // the worst error over N in [2k, 4k] shrinks as k doubles
    double previous = 1e300;
    for (long k = 25; k <= 1600; k *= 2) {
        double worst = 0.0;
        for (long n = 2 * k; n <= 4 * k; ++n) worst = std::max(worst, err(n));
        EXPECT_LT(worst, previous) << k;
        previous = worst;
    }
}
