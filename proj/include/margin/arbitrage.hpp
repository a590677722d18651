#pragma once

#include "margin/market.hpp"

namespace margin {

/// Broker's terminal profit in both algebraic forms. The two must agree.
struct TerminalProfit {
    double collateral_form;   // min(S_T, D e^{RT}) - D e^{rT}
    double call_form;         // S_T - D e^{rT} - max(S_T - D e^{RT}, 0)
};

TerminalProfit broker_profit_terminal(double s_t, double debt, double r, double rate, double term);

/// Present value at t = 0 of the broker's guaranteed profit when the client's
/// equity is exchanged for a call struck at D e^{RT}:
/// S0 - D - price(call), with the call priced by BS or by the CRR bound.
double bs_profit(const LoanScenario& loan);
double lattice_profit(const LoanScenario& loan, long steps);

struct ArbitrageQuote {
    double rate;
    long steps;        // 0 for the continuous-hedging (Black-Scholes) case
    double term;
    double profit_pv;
    /// Guaranteed profit was already non-negative at R = r: any R >= r is safe.
    bool at_floor = false;
};

struct HorizonOptions {
    double max_term = 10.0;
};

/// Solvency-check horizon T at which charging R is exactly fair under
/// continuous hedging: S0 - D = C_BS(S0, D e^{RT}, r, sigma, T).
/// R = r returns T = 0. Throws NoSolution when no root exists in (0, max_term].
/// scenario.term is ignored.
ArbitrageQuote implied_horizon(const LoanScenario& scenario, const HorizonOptions& options = {});

/// Lowest margin rate a broker who revises its super-hedge `steps` times over
/// [0, T] can charge without risking a loss. scenario.rate is ignored.
ArbitrageQuote rational_rate(const LoanScenario& scenario, long steps);

/// Margin rate implied by continuous hedging at fixed T (the limit of
/// rational_rate as steps grows).
ArbitrageQuote bs_rational_rate(const LoanScenario& scenario);

struct RevisionOptions {
    long cap = 1'000'000;
};

/// Smallest revision count N >= 1 whose guaranteed profit at scenario.rate is
/// non-negative, found by an upward scan. Requires R > r.
/// Throws NotReachedWithinCap.
long min_revisions(const LoanScenario& scenario, const RevisionOptions& options = {});

}  // namespace margin
