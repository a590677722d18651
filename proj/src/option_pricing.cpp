#include "margin/option_pricing.hpp"

#include "margin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace margin {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

LatticeSpec LatticeSpec::make(double r, double sigma, double term, long steps) {
    if (steps < 1) throw InvalidLattice("lattice needs at least one step");
    if (!(sigma > 0.0) || !(term > 0.0)) throw InvalidLattice("lattice needs sigma > 0 and T > 0");
    LatticeSpec l{};
    l.steps = steps;
    l.r = r;
    l.sigma = sigma;
    l.term = term;
    l.dt = term / static_cast<double>(steps);
    const double vol_step = sigma * std::sqrt(l.dt);
    l.up = std::exp(vol_step);
    l.down = 1.0 / l.up;
    const double growth = std::exp(r * l.dt);
    if (!(l.down < growth && growth < l.up))
        throw InvalidLattice("risk-neutral probability outside (0, 1): need d < exp(r dt) < u");
    // (e^{r dt} - e^{-v}) / (e^{v} - e^{-v}) with expm1 to keep q accurate for tiny dt.
    l.q = (std::expm1(r * l.dt) - std::expm1(-vol_step)) / (2.0 * std::sinh(vol_step));
    return l;
}

double LatticeSpec::discount() const { return std::exp(-r * term); }

namespace {

struct D12 {
    double d1;
    double d2;
};

D12 bs_d(double s0, double strike, double r, double sigma, double term) {
    const double vol = sigma * std::sqrt(term);
    const double d1 = (std::log(s0 / strike) + (r + 0.5 * sigma * sigma) * term) / vol;
    return {d1, d1 - vol};
}

void check_bs(double s0, double strike, double sigma, double term) {
    if (!(s0 > 0.0)) throw DomainError("spot price must be positive");
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    if (!(term > 0.0)) throw DomainError("time to expiry must be positive");
    if (!(strike >= 0.0)) throw DomainError("strike must be non-negative");
}

// Node price S0 u^{2j-N}.
double node(double s0, const LatticeSpec& l, long j) {
    return s0 * std::exp(static_cast<double>(2 * j - l.steps) * l.sigma * std::sqrt(l.dt));
}

}  // namespace

double bs_call(double s0, double strike, double r, double sigma, double term) {
    check_bs(s0, strike, sigma, term);
    if (strike == 0.0) return s0;
    const auto [d1, d2] = bs_d(s0, strike, r, sigma, term);
    const double price = s0 * norm_cdf(d1) - strike * std::exp(-r * term) * norm_cdf(d2);
    return std::clamp(price, std::max(s0 - strike * std::exp(-r * term), 0.0), s0);
}

double bs_put(double s0, double strike, double r, double sigma, double term) {
    check_bs(s0, strike, sigma, term);
    if (strike == 0.0) return 0.0;
    const auto [d1, d2] = bs_d(s0, strike, r, sigma, term);
    const double pv_strike = strike * std::exp(-r * term);
    const double price = pv_strike * norm_cdf(-d2) - s0 * norm_cdf(-d1);
    return std::clamp(price, std::max(pv_strike - s0, 0.0), pv_strike);
}

// Weights are recursed in log space from the tail the payoff lives in, so
// C(N, j) q^j (1-q)^{N-j} never overflows and underflow only drops terms that
// are below double precision anyway.
double crr_call(double s0, double strike, const LatticeSpec& l) {
    if (!(l.q > 0.0 && l.q < 1.0)) throw InvalidLattice("risk-neutral probability outside (0, 1)");
    if (!(s0 > 0.0)) throw DomainError("spot price must be positive");
    if (!(strike >= 0.0)) throw DomainError("strike must be non-negative");
    const long n = l.steps;
    const double log_odds = std::log((1.0 - l.q) / l.q);   // log((1-q)/q)
    double log_w = static_cast<double>(n) * std::log(l.q);  // j = N
    double sum = 0.0;
    for (long j = n; j >= 0; --j) {
        const double payoff = node(s0, l, j) - strike;
        if (payoff <= 0.0) break;
        sum += std::exp(log_w) * payoff;
        // w_{j-1} = w_j * j / (N - j + 1) * (1-q)/q
        if (j > 0) log_w += std::log(static_cast<double>(j) / static_cast<double>(n - j + 1)) + log_odds;
    }
    return l.discount() * sum;
}

double crr_put(double s0, double strike, const LatticeSpec& l) {
    if (!(l.q > 0.0 && l.q < 1.0)) throw InvalidLattice("risk-neutral probability outside (0, 1)");
    if (!(s0 > 0.0)) throw DomainError("spot price must be positive");
    if (!(strike >= 0.0)) throw DomainError("strike must be non-negative");
    const long n = l.steps;
    const double log_odds = std::log(l.q / (1.0 - l.q));
    double log_w = static_cast<double>(n) * std::log1p(-l.q);  // j = 0
    double sum = 0.0;
    for (long j = 0; j <= n; ++j) {
        const double payoff = strike - node(s0, l, j);
        if (payoff <= 0.0) break;
        sum += std::exp(log_w) * payoff;
        // w_{j+1} = w_j * (N - j) / (j + 1) * q/(1-q)
        log_w += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_odds;
    }
    return l.discount() * sum;
}

}  // namespace margin
