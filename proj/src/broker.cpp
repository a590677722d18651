#include "margin/broker.hpp"

#include "margin/errors.hpp"

#include <cmath>
#include <string>

namespace margin {

double instantaneous_profit(double demand_slope, double lambda, double r_l, double r) {
    return demand_slope * (lambda - r_l) * (r_l - r);
}

MonopolyQuote monopoly_rate(double r, double lambda) {
    if (!(lambda > r)) throw NoDemand("shadow rate does not exceed the cost of funds");
    return {0.5 * (r + lambda), 0.5 * (lambda - r)};
}

MonopolyQuote single_stock_rate(double r, double nu, double sigma) {
    if (!(sigma >= 0.0)) throw DomainError("volatility must be non-negative");
    const double lambda = nu - 0.5 * sigma * sigma;   // mu - sigma^2 with mu = nu + sigma^2/2
    if (!(lambda > r)) throw NoDemand("shadow rate does not exceed the cost of funds");
    const double rate = 0.5 * (r + nu) - 0.25 * sigma * sigma;
    return {rate, 0.5 * (nu - r) - 0.25 * sigma * sigma};
}

CournotOutcome cournot(double r, double lambda, double demand_slope, long brokers) {
    if (brokers < 1) throw InvalidArguments("broker count must be at least 1");
    if (!(demand_slope > 0.0)) throw InvalidArguments("demand slope must be positive");
    if (!(lambda > r)) throw InvalidArguments("shadow rate must exceed the cost of funds");

    const double n = static_cast<double>(brokers);
    const double margin = (lambda - r) / (n + 1.0);
    CournotOutcome out{};
    out.per_broker_quantity = demand_slope * margin;
    out.aggregate_quantity = n * out.per_broker_quantity;
    out.rate = (n * r + lambda) / (n + 1.0);
    out.net_margin = margin;
    out.aggregate_profit = n * demand_slope * margin * margin;

    const double foc = lambda - r - out.aggregate_quantity / demand_slope - out.per_broker_quantity / demand_slope;
    if (std::abs(foc) > 1e-12)
        throw BracketFailure("Cournot first-order condition residual " + std::to_string(foc));
    return out;
}

double cournot_profit(double r, double lambda, double demand_slope, double own, double rivals) {
    return own * (lambda - r - own / demand_slope - rivals / demand_slope);
}

double discounted_foc(double precision_sum, double lambda, double r, double beta, double r_l) {
    const double spread = lambda - r_l;
    return precision_sum * spread * spread * (r_l - r) - 2.0 * beta * (0.5 * (r + lambda) - r_l);
}

double discounted_monopoly_rate(double precision_sum, double lambda, double r, double beta, double width_tol) {
    if (!(lambda > r)) throw NoDemand("shadow rate does not exceed the cost of funds");
    if (!(beta > 0.0)) throw DomainError("discount rate must be positive");
    if (!(precision_sum > 0.0)) throw DomainError("1'Sigma^-1 1 must be positive");

    // g(r) = -beta (lambda - r) < 0 and g(midpoint) > 0; the root is unique.
    double lo = r;
    double hi = 0.5 * (r + lambda);
    if (!(discounted_foc(precision_sum, lambda, r, beta, lo) < 0.0) ||
        !(discounted_foc(precision_sum, lambda, r, beta, hi) > 0.0))
        throw BracketFailure("discounted monopoly FOC does not change sign on (r, (r+lambda)/2)");
    while (hi - lo >= width_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (discounted_foc(precision_sum, lambda, r, beta, mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double discounted_monopoly_rate(const MarketUniverse& universe, double r, double beta, double width_tol) {
    return discounted_monopoly_rate(universe.ones_precision_ones(), shadow_rate(universe), r, beta, width_tol);
}

double rationalizing_beta(double precision_sum, double lambda, double r, double observed_r_l) {
    const double midpoint = 0.5 * (r + lambda);
    if (!(observed_r_l > r) || !(observed_r_l < midpoint))
        throw DomainError("observed margin rate must lie strictly between r and (r + lambda)/2");
    const double spread = lambda - observed_r_l;
    return precision_sum * spread * spread * (observed_r_l - r) / (2.0 * (midpoint - observed_r_l));
}

double rationalizing_beta(const MarketUniverse& universe, double r, double observed_r_l) {
    return rationalizing_beta(universe.ones_precision_ones(), shadow_rate(universe), r, observed_r_l);
}

namespace {

// r_L + (mu - r_L 1)'Sigma^-1(mu - r_L 1)/2, expanded in the cached quadratic forms.
double growth_term(const MarketUniverse& u, double r_l) {
    const double quad =
        u.drift_precision_drift() - 2.0 * r_l * u.ones_precision_drift() + r_l * r_l * u.ones_precision_ones();
    return r_l + 0.5 * quad;
}

}  // namespace

double hjb_objective(const MarketUniverse& universe, double r, double beta, double r_l) {
    const double lambda = shadow_rate(universe);
    if (!(r_l > r) || !(r_l < lambda)) throw DomainError("objective is defined only for r < r_L < lambda");
    if (!(beta >= 0.0)) throw DomainError("discount rate must be non-negative");
    const double log_term = beta == 0.0 ? 0.0 : beta * std::log((lambda - r_l) * (r_l - r));
    return log_term + growth_term(universe, r_l);
}

ValueFunction hjb_value_function(const MarketUniverse& universe, double r, double beta) {
    const double rate = discounted_monopoly_rate(universe, r, beta);
    const double lambda = shadow_rate(universe);
    const double c1 = std::log((lambda - rate) * (rate - r)) / beta + growth_term(universe, rate) / (beta * beta);
    return {c1, 1.0 / beta, rate};
}

}  // namespace margin
