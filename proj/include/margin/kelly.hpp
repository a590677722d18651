#pragma once

#include "margin/market.hpp"

#include <Eigen/Core>

namespace margin {

enum class Regime { Levered, Cash, SelfFinanced };

const char* to_string(Regime regime);

/// |B - 1| below this is self-financed.
inline constexpr double kSelfFinancedTolerance = 1e-10;

/// Constant rebalancing rule: fraction b_i of wealth held in asset i.
struct RebalancingRule {
    Eigen::VectorXd bets;
    double exposure;   // B = 1'b
    Regime regime;

    static RebalancingRule from_bets(Eigen::VectorXd bets);
    /// (B-1)^+ V
    double loan(double wealth) const noexcept;
    /// (1-B)^+ V
    double deposit(double wealth) const noexcept;
};

struct GrowthReport {
    double drift;         // alpha = mu'b - (B-1)^+ r_L + (1-B)^+ r
    double growth_rate;   // alpha - b'Sigma b / 2
};

/// Asymptotic log-growth rate of wealth under rule b.
GrowthReport growth_rate(const MarketUniverse& universe, const Eigen::VectorXd& bets, double r_l,
                         double r);

/// Growth-optimal rule. Levered when lambda > r_L, cash when lambda < r_D,
/// self-financed (B = 1) otherwise.
RebalancingRule kelly_rule(const MarketUniverse& universe, double r_l, double r_d);

struct MarginDemand {
    double quantity;    // q = C - D r_L, floored at 0
    double intercept;   // C
    double slope;       // D
    bool clamped;       // r_L >= lambda: demand is zero
};

MarginDemand margin_demand(const MarketUniverse& universe, double wealth, double r_l);

/// Price elasticity of margin demand, r_L / (lambda - r_L), reported positive.
/// Throws DomainError unless 0 < r_L < lambda.
double demand_elasticity(double lambda, double r_l);

}  // namespace margin
