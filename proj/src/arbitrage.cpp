#include "margin/arbitrage.hpp"

#include "margin/errors.hpp"
#include "margin/option_pricing.hpp"
#include "margin/roots.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace margin {

TerminalProfit broker_profit_terminal(double s_t, double debt, double r, double rate, double term) {
    if (!(s_t >= 0.0)) throw DomainError("terminal price must be non-negative");
    if (!(debt > 0.0)) throw DomainError("debt must be positive");
    const double owed = debt * std::exp(rate * term);
    const double funding = debt * std::exp(r * term);
    return {std::min(s_t, owed) - funding, s_t - funding - std::max(s_t - owed, 0.0)};
}

// S0 - D - C equals D(e^{(R-r)T} - 1) - P by put-call parity, which holds
// exactly both under Black-Scholes and on the lattice. The put form avoids
// cancelling S0 against a deep in-the-money call.
double bs_profit(const LoanScenario& loan) {
    const double strike = loan.debt * std::exp(loan.rate * loan.term);
    return loan.debt * std::expm1((loan.rate - loan.r) * loan.term) -
           bs_put(loan.s0, strike, loan.r, loan.sigma, loan.term);
}

double lattice_profit(const LoanScenario& loan, long steps) {
    const auto lattice = LatticeSpec::make(loan.r, loan.sigma, loan.term, steps);
    const double strike = loan.debt * std::exp(loan.rate * loan.term);
    return loan.debt * std::expm1((loan.rate - loan.r) * loan.term) - crr_put(loan.s0, strike, lattice);
}

namespace {

constexpr double kResidualScale = 1e-10;   // times S0

template <class Profit>
ArbitrageQuote solve_rate(const LoanScenario& scenario, long steps, Profit profit_at) {
    LoanScenario loan = scenario;
    loan.rate = loan.r;
    loan.validate();
    const double tol = kResidualScale * loan.s0;

    const double floor_profit = profit_at(loan.r);
    if (floor_profit >= -tol) return {loan.r, steps, loan.term, floor_profit, true};

    // Profit rises to S0 - D > 0 as R grows, so doubling finds a bracket.
    double hi = loan.r + 0.01;
    double f_hi = profit_at(hi);
    while (f_hi <= 0.0) {
        if (hi - loan.r > 1e4)
            throw NoSolution("no margin rate up to " + std::to_string(hi) + " guarantees a profit", hi, f_hi);
        hi = loan.r + 2.0 * (hi - loan.r);
        f_hi = profit_at(hi);
    }
    RootOptions opts;
    opts.residual_tol = tol;
    const auto root = find_root(profit_at, loan.r, hi, opts);
    return {root.x, steps, loan.term, root.residual, false};
}

}  // namespace

ArbitrageQuote implied_horizon(const LoanScenario& scenario, const HorizonOptions& options) {
    LoanScenario loan = scenario;
    loan.term = options.max_term;
    loan.validate();
    if (loan.rate == loan.r) return {loan.rate, 0, 0.0, 0.0, false};

    auto profit_at = [&](double t) {
        LoanScenario l = loan;
        l.term = t;
        return bs_profit(l);
    };
    const double lo = 1e-10 * options.max_term;
    const double f_hi = profit_at(options.max_term);
    if (f_hi >= 0.0)
        throw NoSolution("no solvency horizon up to " + std::to_string(options.max_term) +
                             " years makes R = " + std::to_string(loan.rate) +
                             " fair (residual " + std::to_string(f_hi) + ")",
                         options.max_term, f_hi);
    RootOptions opts;
    opts.residual_tol = kResidualScale * loan.s0;
    const auto root = find_root(profit_at, lo, options.max_term, opts);
    return {loan.rate, 0, root.x, root.residual, false};
}

ArbitrageQuote rational_rate(const LoanScenario& scenario, long steps) {
    if (steps < 1) throw InvalidLattice("revision count must be at least 1");
    LatticeSpec::make(scenario.r, scenario.sigma, scenario.term, steps);
    return solve_rate(scenario, steps, [&](double rate) {
        LoanScenario l = scenario;
        l.rate = rate;
        return lattice_profit(l, steps);
    });
}

ArbitrageQuote bs_rational_rate(const LoanScenario& scenario) {
    return solve_rate(scenario, 0, [&](double rate) {
        LoanScenario l = scenario;
        l.rate = rate;
        return bs_profit(l);
    });
}

long min_revisions(const LoanScenario& scenario, const RevisionOptions& options) {
    scenario.validate();
    if (!(scenario.rate > scenario.r))
        throw DomainError("minimum revisions requires R > r; at R = r no finite N guarantees a premium");
    for (long n = 1; n <= options.cap; ++n) {
        double profit = 0.0;
        try {
            profit = lattice_profit(scenario, n);
        } catch (const InvalidLattice&) {
            continue;   // coarse steps can violate d < e^{r dt} < u; such N cannot qualify
        }
        if (profit >= 0.0) return n;
    }
    throw NotReachedWithinCap("no revision count up to " + std::to_string(options.cap) +
                                  " guarantees a profit at R = " + std::to_string(scenario.rate),
                              options.cap);
}

}  // namespace margin
