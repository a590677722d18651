#pragma once

#include "margin/market.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>

namespace margin::sim {

/// xoshiro256++ seeded through SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed);
    /// Independent stream `stream` of a master seed (one per path).
    static Xoshiro256 stream(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t s_[4];
};

struct SimConfig {
    long paths = 100'000;
    long steps_per_year = 2520;
    std::uint64_t seed = 0x5eed;
    double horizon = 10.0;
};

struct Estimate {
    double mean;
    double std_error;
};

/// e^{-rT} E[max(S_T - K, 0)] over exact lognormal terminal draws.
Estimate mc_call_price(double s0, double strike, double r, double sigma, double term,
                       const SimConfig& config);

enum class WealthScheme {
    Exact,     // closed-form lognormal wealth at the horizon
    Stepped,   // rebalanced every step on exact per-step asset returns
};

/// Sample mean and standard error of log(V_T / V_0) / T for constant rule b.
Estimate mc_growth_rate(const MarketUniverse& universe, const Eigen::VectorXd& bets, double r_l,
                        double r, const SimConfig& config, WealthScheme scheme = WealthScheme::Exact);

struct GridOptions {
    double step = 1e-4;
    double tolerance = 1e-8;
};

/// Maximizer of f over (lo, hi): a dense scan of interior grid points followed
/// by golden-section refinement around the best one. Throws DomainError if f is
/// not finite at a probed point.
double grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                   const GridOptions& options = {});

}  // namespace margin::sim
