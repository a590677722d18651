#pragma once

namespace margin {

/// Standard normal CDF.
double norm_cdf(double x);

/// Recombining binomial lattice matched to GBM: u = exp(sigma sqrt(dt)),
/// d = 1/u, q the risk-neutral uptick probability.
struct LatticeSpec {
    long steps;
    double r;
    double sigma;
    double term;
    double dt;
    double up;
    double down;
    double q;

    /// Throws InvalidLattice unless steps >= 1 and d < exp(r dt) < u.
    static LatticeSpec make(double r, double sigma, double term, long steps);
    double discount() const;
};

/// Black-Scholes European call. Throws DomainError for non-positive s0,
/// sigma or term, or negative strike.
double bs_call(double s0, double strike, double r, double sigma, double term);
double bs_put(double s0, double strike, double r, double sigma, double term);

/// Cox-Ross-Rubinstein price of a European call, discounted to t = 0.
/// On the filled-in lattice this is the super-hedging upper bound.
double crr_call(double s0, double strike, const LatticeSpec& lattice);
double crr_put(double s0, double strike, const LatticeSpec& lattice);

}  // namespace margin
