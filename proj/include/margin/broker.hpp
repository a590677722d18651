#pragma once

#include "margin/market.hpp"

namespace margin {

struct MonopolyQuote {
    double rate;         // (r + lambda) / 2
    double net_margin;   // (lambda - r) / 2

    /// D (lambda - r)^2 / 4 for demand slope D.
    double profit(double demand_slope) const noexcept { return demand_slope * net_margin * net_margin; }
};

/// Instantaneous profit D (lambda - r_L)(r_L - r) of a broker charging r_L.
double instantaneous_profit(double demand_slope, double lambda, double r_l, double r);

/// Throws NoDemand when lambda <= r.
MonopolyQuote monopoly_rate(double r, double lambda);

/// Monopoly rate on one asset given its growth rate: (r + nu)/2 - sigma^2/4.
MonopolyQuote single_stock_rate(double r, double nu, double sigma);

struct CournotOutcome {
    double per_broker_quantity;
    double aggregate_quantity;
    double rate;
    double net_margin;
    double aggregate_profit;
};

/// Symmetric Cournot equilibrium among `brokers` quantity-setting brokers
/// facing inverse demand r_L = lambda - Q/D.
CournotOutcome cournot(double r, double lambda, double demand_slope, long brokers);

/// Profit of one broker supplying `own` while rivals supply `rivals` in total.
double cournot_profit(double r, double lambda, double demand_slope, double own, double rivals);

/// FOC cubic of the discounted log-utility monopolist:
/// S (lambda - r_L)^2 (r_L - r) - 2 beta ((r + lambda)/2 - r_L), S = 1'Sigma^-1 1.
double discounted_foc(double precision_sum, double lambda, double r, double beta, double r_l);

/// Rate set by an infinitely-lived monopolist with log utility over profit
/// flow and discount rate beta: the root of discounted_foc in
/// (r, (r + lambda)/2), by bisection to bracket width < width_tol.
double discounted_monopoly_rate(const MarketUniverse& universe, double r, double beta,
                                double width_tol = 1e-14);
double discounted_monopoly_rate(double precision_sum, double lambda, double r, double beta,
                                double width_tol = 1e-14);

/// Discount rate that makes an observed r_L in (r, (r + lambda)/2) optimal.
double rationalizing_beta(const MarketUniverse& universe, double r, double observed_r_l);
double rationalizing_beta(double precision_sum, double lambda, double r, double observed_r_l);

/// The monopolist's stationary objective
///   U(r_L) = beta log[(lambda - r_L)(r_L - r)] + r_L + (mu - r_L 1)'Sigma^-1(mu - r_L 1)/2.
/// Its maximizer over (r, lambda) is the discounted_monopoly_rate. At beta = 0
/// the log term is dropped. Throws DomainError outside (r, lambda).
double hjb_objective(const MarketUniverse& universe, double r, double beta, double r_l);

/// Constant term of the log value function J(V) = c1 + c2 log V, evaluated at
/// the optimal rate; c2 = 1/beta.
struct ValueFunction {
    double c1;
    double c2;
    double rate;
};
ValueFunction hjb_value_function(const MarketUniverse& universe, double r, double beta);

}  // namespace margin
