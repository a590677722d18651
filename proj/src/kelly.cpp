#include "margin/kelly.hpp"

#include "margin/errors.hpp"

#include <cmath>
#include <utility>

namespace margin {

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::Levered: return "levered";
        case Regime::Cash: return "cash";
        case Regime::SelfFinanced: return "self-financed";
    }
    return "unknown";
}

RebalancingRule RebalancingRule::from_bets(Eigen::VectorXd bets) {
    const double exposure = bets.sum();
    Regime regime = Regime::SelfFinanced;
    if (exposure - 1.0 > kSelfFinancedTolerance) regime = Regime::Levered;
    else if (1.0 - exposure > kSelfFinancedTolerance) regime = Regime::Cash;
    return {std::move(bets), exposure, regime};
}

double RebalancingRule::loan(double wealth) const noexcept {
    return std::max(exposure - 1.0, 0.0) * wealth;
}

double RebalancingRule::deposit(double wealth) const noexcept {
    return std::max(1.0 - exposure, 0.0) * wealth;
}

GrowthReport growth_rate(const MarketUniverse& universe, const Eigen::VectorXd& bets, double r_l, double r) {
    if (bets.size() != universe.size()) throw DimensionMismatch("bet vector length does not match universe size");
    if (!(r_l >= r)) throw DomainError("margin rate must be at least the deposit rate");
    const double exposure = bets.sum();
    const double alpha = universe.drift().dot(bets) - std::max(exposure - 1.0, 0.0) * r_l +
                         std::max(1.0 - exposure, 0.0) * r;
    const double variance = bets.dot(universe.covariance() * bets);
    return {alpha, alpha - 0.5 * variance};
}

RebalancingRule kelly_rule(const MarketUniverse& universe, double r_l, double r_d) {
    if (!(r_d <= r_l)) throw DomainError("deposit rate must not exceed the margin rate");
    const double lambda = shadow_rate(universe);
    const auto n = universe.size();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    if (lambda > r_l) {
        auto rule = RebalancingRule::from_bets(universe.solve(universe.drift() - r_l * ones));
        rule.regime = Regime::Levered;
        return rule;
    }
    if (lambda < r_d) {
        auto rule = RebalancingRule::from_bets(universe.solve(universe.drift() - r_d * ones));
        rule.regime = Regime::Cash;
        return rule;
    }
    auto rule = RebalancingRule::from_bets(universe.solve(universe.drift() - lambda * ones));
    rule.regime = Regime::SelfFinanced;
    return rule;
}

MarginDemand margin_demand(const MarketUniverse& universe, double wealth, double r_l) {
    const double intercept = wealth * (universe.ones_precision_drift() - 1.0);
    const double slope = wealth * universe.ones_precision_ones();
    const double q = intercept - slope * r_l;
    if (q <= 0.0) return {0.0, intercept, slope, true};
    return {q, intercept, slope, false};
}

double demand_elasticity(double lambda, double r_l) {
    if (!(r_l > 0.0) || !(r_l < lambda))
        throw DomainError("demand elasticity needs 0 < r_L < lambda");
    return r_l / (lambda - r_l);
}

}  // namespace margin
