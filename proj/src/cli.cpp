#include "margin/cli.hpp"

#include "margin/arbitrage.hpp"
#include "margin/broker.hpp"
#include "margin/errors.hpp"
#include "margin/kelly.hpp"
#include "margin/market.hpp"
#include "margin/option_pricing.hpp"
#include "margin/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace margin::cli {

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

constexpr double kDaysPerYear = 365.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void write(std::ostream& os) const {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) os << ',';
                os << cells[i];
            }
            os << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }
};

std::string num(double v) { return format_number(v); }
std::string num(long v) { return std::to_string(v); }

// Inclusive grid lo, lo + step, ..., computed from the index to avoid drift.
std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw CLI::ValidationError("grid", "need lo <= hi and step > 0");
    std::vector<double> out;
    const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

std::vector<double> log_grid(double lo, double hi, long points) {
    if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw CLI::ValidationError("grid", "need 0 < lo <= hi, points >= 1");
    if (points == 1) return {lo};
    std::vector<double> out;
    const double a = std::log(lo), b = std::log(hi);
    for (long k = 0; k < points; ++k)
        out.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1)));
    return out;
}

// Scalar or lo/hi/step sweep over one parameter.
struct Sweep {
    std::optional<double> value;
    std::optional<double> lo, hi, step;

    void add(CLI::App* app, const std::string& name, const std::string& what) {
        app->add_option("--" + name, value, what);
        app->add_option("--" + name + "-lo", lo, what + ", sweep start");
        app->add_option("--" + name + "-hi", hi, what + ", sweep end");
        app->add_option("--" + name + "-step", step, what + ", sweep step");
    }

    std::vector<double> points(const std::string& name) const {
        if (value) {
            if (lo || hi || step) throw CLI::ValidationError("--" + name, "give a value or a sweep, not both");
            return {*value};
        }
        if (!lo || !hi || !step)
            throw CLI::RequiredError("--" + name + " or --" + name + "-lo/-hi/-step");
        return linear_grid(*lo, *hi, *step);
    }
};

struct IntSweep {
    std::optional<long> value;
    std::optional<long> lo, hi;
    long step = 1;

    void add(CLI::App* app, const std::string& name, const std::string& what) {
        app->add_option("--" + name, value, what);
        app->add_option("--" + name + "-lo", lo, what + ", sweep start");
        app->add_option("--" + name + "-hi", hi, what + ", sweep end");
        app->add_option("--" + name + "-step", step, what + ", sweep step")->check(CLI::PositiveNumber);
    }

    std::vector<long> points(const std::string& name) const {
        if (value) {
            if (lo || hi) throw CLI::ValidationError("--" + name, "give a value or a sweep, not both");
            return {*value};
        }
        if (!lo || !hi) throw CLI::RequiredError("--" + name + " or --" + name + "-lo/-hi");
        std::vector<long> out;
        for (long k = *lo; k <= *hi; k += step) out.push_back(k);
        return out;
    }
};

struct LoanFlags {
    double r = 0.0, sigma = 0.0, s0 = 0.0, debt = 0.0;
    std::optional<double> term, term_days;

    void add(CLI::App* app, bool with_term) {
        app->add_option("--r", r, "money-market rate (continuous, annual)")->required();
        app->add_option("--sigma", sigma, "volatility")->required();
        app->add_option("--s0", s0, "initial stock price")->required();
        app->add_option("--d", debt, "initial debt")->required();
        if (with_term) {
            auto* t = app->add_option("--T", term, "loan term in years");
            auto* td = app->add_option("--T-days", term_days, "loan term in calendar days (365 per year)");
            t->excludes(td);
        }
    }

    LoanScenario scenario() const {
        double t = 0.0;
        if (term) t = *term;
        else if (term_days) t = *term_days / kDaysPerYear;
        return {s0, debt, r, sigma, t, r};
    }

    double years() const {
        if (term) return *term;
        if (term_days) return *term_days / kDaysPerYear;
        throw CLI::RequiredError("--T or --T-days");
    }
};

// Market universe from per-asset vectors. A single --rho applies to every pair;
// otherwise the upper triangle is given row by row.
struct UniverseFlags {
    std::vector<double> mu, nu, sigma, rho;
    std::optional<double> lambda;

    void add(CLI::App* app, bool allow_lambda) {
        auto* m = app->add_option("--mu", mu, "asset drifts")->delimiter(',');
        auto* n = app->add_option("--nu", nu, "asset growth rates nu = mu - sigma^2/2")->delimiter(',');
        m->excludes(n);
        app->add_option("--sigma", sigma, "asset volatilities")->delimiter(',');
        app->add_option("--rho", rho, "correlation (one value, or the upper triangle)")->delimiter(',');
        if (allow_lambda) app->add_option("--lambda", lambda, "shadow rate, instead of a universe");
    }

    MarketUniverse universe() const {
        const bool use_mu = !mu.empty();
        const auto& rates = use_mu ? mu : nu;
        if (rates.empty()) throw CLI::RequiredError("--mu or --nu");
        if (sigma.size() != rates.size())
            throw DimensionMismatch("--sigma needs one entry per asset (" + std::to_string(rates.size()) + ")");
        std::vector<GbmAsset> assets;
        for (std::size_t i = 0; i < rates.size(); ++i)
            assets.push_back(use_mu ? GbmAsset::from_drift(rates[i], sigma[i])
                                    : GbmAsset::from_growth(rates[i], sigma[i]));
        const auto n = static_cast<Eigen::Index>(assets.size());
        Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(n, n);
        const std::size_t pairs = static_cast<std::size_t>(n * (n - 1) / 2);
        if (rho.size() == 1 && n > 1) {
            corr.setConstant(rho[0]);
            corr.diagonal().setOnes();
        } else if (rho.size() == pairs) {
            std::size_t k = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = i + 1; j < n; ++j) corr(i, j) = corr(j, i) = rho[k++];
        } else if (!(rho.empty() && n == 1) && !(rho.size() == 1 && n == 1)) {
            throw DimensionMismatch("--rho needs 1 or " + std::to_string(pairs) + " values");
        }
        return MarketUniverse::build(std::move(assets), corr);
    }

    bool has_universe() const { return !mu.empty() || !nu.empty(); }

    // lambda and 1'Sigma^-1 1 (the latter only when a universe is given).
    std::pair<double, std::optional<double>> lambda_and_precision() const {
        if (lambda) {
            if (has_universe()) throw CLI::ValidationError("--lambda", "give --lambda or a universe, not both");
            return {*lambda, std::nullopt};
        }
        const auto u = universe();
        return {shadow_rate(u), u.ones_precision_ones()};
    }
};

struct Context {
    std::ostream* out;
    std::string out_path;
    Table table;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Margin loan pricing: arbitrage bounds on a binomial lattice and broker pricing for Kelly gamblers",
                 "marginloan"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "TOML/INI file with one [section] per subcommand; flags override it");
    std::string out_path;
    app.add_option("--out", out_path, "write CSV here instead of stdout");
    Table table;

    // horizon
    LoanFlags horizon_loan;
    Sweep horizon_rate;
    double horizon_max = 10.0;
    auto* horizon = app.add_subcommand("horizon", "implied time between solvency checks for margin rates R");
    horizon_loan.add(horizon, false);
    horizon_rate.add(horizon, "R", "margin rate");
    horizon->add_option("--T-max", horizon_max, "search limit in years");

    // rate
    LoanFlags rate_loan;
    IntSweep rate_n;
    auto* rate = app.add_subcommand("rate", "lowest no-loss margin rate for N hedge revisions");
    rate_loan.add(rate, true);
    rate_n.add(rate, "N", "revision count");

    // revisions
    LoanFlags rev_loan;
    Sweep rev_rate;
    long rev_cap = 1'000'000;
    auto* revisions = app.add_subcommand("revisions", "fewest hedge revisions that guarantee no loss at rate R");
    rev_loan.add(revisions, true);
    rev_rate.add(revisions, "R", "margin rate");
    revisions->add_option("--cap", rev_cap, "largest N to try");

    // kelly
    UniverseFlags kelly_u;
    double kelly_rl = 0.0, kelly_r = 0.0;
    std::optional<double> kelly_rd;
    Sweep kelly_b;
    auto* kelly = app.add_subcommand("kelly", "growth rate of constant rebalancing rules and the Kelly rule");
    kelly_u.add(kelly, false);
    kelly->add_option("--rL", kelly_rl, "margin rate")->required();
    kelly->add_option("--r", kelly_r, "cash rate")->required();
    kelly->add_option("--rD", kelly_rd, "deposit rate for the Kelly rule (default --r)");
    kelly_b.add(kelly, "b", "bet (single asset) or multiple of the Kelly rule");

    // demand
    UniverseFlags demand_u;
    double demand_v = 1.0;
    Sweep demand_rl;
    auto* demand = app.add_subcommand("demand", "Kelly gambler's margin demand and its elasticity");
    demand_u.add(demand, false);
    demand->add_option("--V", demand_v, "client wealth");
    demand_rl.add(demand, "rL", "margin rate");

    // monopoly
    UniverseFlags mono_u;
    double mono_r = 0.0;
    auto* monopoly = app.add_subcommand("monopoly", "instantaneous monopoly margin rate");
    mono_u.add(monopoly, true);
    monopoly->add_option("--r", mono_r, "cost of funds")->required();

    // cournot
    UniverseFlags cournot_u;
    double cournot_r = 0.0, cournot_v = 1.0;
    std::optional<double> cournot_slope;
    IntSweep cournot_n;
    auto* cournot_cmd = app.add_subcommand("cournot", "symmetric Cournot equilibrium among N brokers");
    cournot_u.add(cournot_cmd, true);
    cournot_cmd->add_option("--r", cournot_r, "cost of funds")->required();
    cournot_cmd->add_option("--V", cournot_v, "client wealth");
    cournot_cmd->add_option("--demand-slope", cournot_slope, "D = V 1'Sigma^-1 1 (required with --lambda)");
    cournot_n.add(cournot_cmd, "n", "broker count");

    // discounted
    UniverseFlags disc_u;
    double disc_r = 0.0;
    std::optional<double> disc_beta, disc_lo, disc_hi;
    long disc_points = 50;
    auto* discounted = app.add_subcommand("discounted", "margin rate of a discounting log-utility monopolist");
    disc_u.add(discounted, false);
    discounted->add_option("--r", disc_r, "cost of funds")->required();
    discounted->add_option("--beta", disc_beta, "discount rate");
    discounted->add_option("--beta-lo", disc_lo, "log-spaced sweep start");
    discounted->add_option("--beta-hi", disc_hi, "log-spaced sweep end");
    discounted->add_option("--beta-points", disc_points, "log-spaced sweep size");

    // rationalize
    UniverseFlags rat_u;
    double rat_r = 0.0;
    Sweep rat_rl;
    auto* rationalize = app.add_subcommand("rationalize", "discount rate that makes an observed margin rate optimal");
    rat_u.add(rationalize, false);
    rationalize->add_option("--r", rat_r, "cost of funds")->required();
    rat_rl.add(rationalize, "rL", "observed margin rate");

    // simulate
    std::string sim_what;
    double sim_s0 = 0.0, sim_k = 0.0, sim_r = 0.0, sim_sigma = 0.0, sim_rl = 0.0;
    std::optional<double> sim_term, sim_term_days;
    UniverseFlags sim_u;
    std::vector<double> sim_b;
    sim::SimConfig sim_cfg;
    std::string sim_scheme = "exact";
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo checks: call price or Kelly growth rate");
    simulate->add_option("--what", sim_what, "call or growth")->required()->check(CLI::IsMember({"call", "growth"}));
    simulate->add_option("--s0", sim_s0, "spot (call)");
    simulate->add_option("--K", sim_k, "strike (call)");
    simulate->add_option("--r", sim_r, "money-market rate");
    simulate->add_option("--T", sim_term, "expiry in years (call)");
    simulate->add_option("--T-days", sim_term_days, "expiry in days (call)");
    simulate->add_option("--vol", sim_sigma, "volatility (call)");
    sim_u.add(simulate, false);
    simulate->add_option("--b", sim_b, "bet vector (growth)")->delimiter(',');
    simulate->add_option("--rL", sim_rl, "margin rate (growth)");
    simulate->add_option("--paths", sim_cfg.paths, "path count");
    simulate->add_option("--seed", sim_cfg.seed, "RNG seed");
    simulate->add_option("--horizon", sim_cfg.horizon, "years (growth)");
    simulate->add_option("--steps-per-year", sim_cfg.steps_per_year, "rebalancing steps (stepped growth)");
    simulate->add_option("--scheme", sim_scheme, "exact or stepped")->check(CLI::IsMember({"exact", "stepped"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);

        if (*horizon) {
            table.header = {"r", "sigma", "s0", "d", "R", "T", "residual", "status"};
            for (double rr : horizon_rate.points("R")) {
                LoanScenario loan = horizon_loan.scenario();
                loan.rate = rr;
                try {
                    const auto q = implied_horizon(loan, {horizon_max});
                    table.add({num(loan.r), num(loan.sigma), num(loan.s0), num(loan.debt), num(rr), num(q.term),
                               num(q.profit_pv), "ok"});
                } catch (const NoSolution& e) {
                    if (horizon_rate.value) throw;
                    table.add({num(loan.r), num(loan.sigma), num(loan.s0), num(loan.debt), num(rr), num(kNaN),
                               num(e.residual()), "no-solution"});
                }
            }
        } else if (*rate) {
            table.header = {"r", "sigma", "s0", "d", "T", "N", "R", "profit_pv", "at_floor"};
            LoanScenario loan = rate_loan.scenario();
            loan.term = rate_loan.years();
            for (long n : rate_n.points("N")) {
                const auto q = rational_rate(loan, n);
                table.add({num(loan.r), num(loan.sigma), num(loan.s0), num(loan.debt), num(loan.term), num(n),
                           num(q.rate), num(q.profit_pv), q.at_floor ? "1" : "0"});
            }
        } else if (*revisions) {
            table.header = {"r", "sigma", "s0", "d", "T", "R", "N", "status"};
            LoanScenario loan = rev_loan.scenario();
            loan.term = rev_loan.years();
            for (double rr : rev_rate.points("R")) {
                loan.rate = rr;
                try {
                    const long n = min_revisions(loan, {rev_cap});
                    table.add({num(loan.r), num(loan.sigma), num(loan.s0), num(loan.debt), num(loan.term), num(rr),
                               num(n), "ok"});
                } catch (const NotReachedWithinCap&) {
                    if (rev_rate.value) throw;
                    table.add({num(loan.r), num(loan.sigma), num(loan.s0), num(loan.debt), num(loan.term), num(rr),
                               "", "cap"});
                }
            }
        } else if (*kelly) {
            const auto u = kelly_u.universe();
            const auto rule = kelly_rule(u, kelly_rl, kelly_rd.value_or(kelly_r));
            if (!kelly_b.value && !kelly_b.lo) {
                table.header = {"lambda", "regime", "exposure", "growth_rate"};
                for (Eigen::Index i = 0; i < u.size(); ++i) table.header.push_back("b" + std::to_string(i + 1));
                std::vector<std::string> row{num(shadow_rate(u)), to_string(rule.regime), num(rule.exposure),
                                             num(growth_rate(u, rule.bets, kelly_rl, kelly_r).growth_rate)};
                for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(num(rule.bets(i)));
                table.add(row);
            } else {
                table.header = {u.size() == 1 ? "b" : "kelly_multiple", "exposure", "carry", "drift", "growth_rate"};
                for (double b : kelly_b.points("b")) {
                    const Eigen::VectorXd bets = u.size() == 1 ? Eigen::VectorXd::Constant(1, b) : Eigen::VectorXd(b * rule.bets);
                    const auto g = growth_rate(u, bets, kelly_rl, kelly_r);
                    const double exposure = bets.sum();
                    const double carry = std::max(1.0 - exposure, 0.0) * kelly_r - std::max(exposure - 1.0, 0.0) * kelly_rl;
                    table.add({num(b), num(exposure), num(carry), num(g.drift), num(g.growth_rate)});
                }
            }
        } else if (*demand) {
            const auto u = demand_u.universe();
            const double lambda = shadow_rate(u);
            table.header = {"rL", "lambda", "q", "C", "D", "elasticity", "clamped"};
            for (double rl : demand_rl.points("rL")) {
                const auto d = margin_demand(u, demand_v, rl);
                const double eps = (rl > 0.0 && rl < lambda) ? demand_elasticity(lambda, rl) : kNaN;
                table.add({num(rl), num(lambda), num(d.quantity), num(d.intercept), num(d.slope), num(eps),
                           d.clamped ? "1" : "0"});
            }
        } else if (*monopoly) {
            const auto [lambda, precision] = mono_u.lambda_and_precision();
            const auto q = monopoly_rate(mono_r, lambda);
            table.header = {"r", "lambda", "rL", "net_margin"};
            table.add({num(mono_r), num(lambda), num(q.rate), num(q.net_margin)});
        } else if (*cournot_cmd) {
            const auto [lambda, precision] = cournot_u.lambda_and_precision();
            double slope = 0.0;
            if (cournot_slope) slope = *cournot_slope;
            else if (precision) slope = cournot_v * *precision;
            else throw CLI::RequiredError("--demand-slope (with --lambda)");
            table.header = {"n", "r", "lambda", "rL", "net_margin", "per_broker_q", "aggregate_q", "aggregate_profit"};
            for (long n : cournot_n.points("n")) {
                const auto c = cournot(cournot_r, lambda, slope, n);
                table.add({num(n), num(cournot_r), num(lambda), num(c.rate), num(c.net_margin),
                           num(c.per_broker_quantity), num(c.aggregate_quantity), num(c.aggregate_profit)});
            }
        } else if (*discounted) {
            const auto u = disc_u.universe();
            std::vector<double> betas;
            if (disc_beta) {
                if (disc_lo || disc_hi) throw CLI::ValidationError("--beta", "give a value or a sweep, not both");
                betas = {*disc_beta};
            } else {
                if (!disc_lo || !disc_hi) throw CLI::RequiredError("--beta or --beta-lo/--beta-hi");
                betas = log_grid(*disc_lo, *disc_hi, disc_points);
            }
            const double lambda = shadow_rate(u);
            const double mono = monopoly_rate(disc_r, lambda).rate;
            table.header = {"beta", "r", "lambda", "rL", "monopoly_rL"};
            for (double beta : betas)
                table.add({num(beta), num(disc_r), num(lambda), num(discounted_monopoly_rate(u, disc_r, beta)), num(mono)});
        } else if (*rationalize) {
            const auto u = rat_u.universe();
            table.header = {"rL", "r", "lambda", "beta"};
            for (double rl : rat_rl.points("rL"))
                table.add({num(rl), num(rat_r), num(shadow_rate(u)), num(rationalizing_beta(u, rat_r, rl))});
        } else if (*simulate) {
            if (sim_what == "call") {
                const double t = sim_term ? *sim_term : sim_term_days ? *sim_term_days / kDaysPerYear : 0.0;
                const auto e = sim::mc_call_price(sim_s0, sim_k, sim_r, sim_sigma, t, sim_cfg);
                const double reference = sim_sigma > 0.0 ? bs_call(sim_s0, sim_k, sim_r, sim_sigma, t) : kNaN;
                table.header = {"estimate", "stderr", "reference", "paths", "seed"};
                table.add({num(e.mean), num(e.std_error), num(reference), num(sim_cfg.paths),
                           std::to_string(sim_cfg.seed)});
            } else {
                const auto u = sim_u.universe();
                Eigen::VectorXd bets = Eigen::Map<const Eigen::VectorXd>(sim_b.data(), static_cast<Eigen::Index>(sim_b.size()));
                const auto scheme = sim_scheme == "stepped" ? sim::WealthScheme::Stepped : sim::WealthScheme::Exact;
                const auto e = sim::mc_growth_rate(u, bets, sim_rl, sim_r, sim_cfg, scheme);
                const double reference = growth_rate(u, bets, sim_rl, sim_r).growth_rate;
                table.header = {"estimate", "stderr", "reference", "paths", "seed"};
                table.add({num(e.mean), num(e.std_error), num(reference), num(sim_cfg.paths),
                           std::to_string(sim_cfg.seed)});
            }
        }

        if (out_path.empty()) {
            table.write(out);
        } else {
            std::ofstream file(out_path, std::ios::binary);
            if (!file) throw IoError("cannot open " + out_path + " for writing");
            table.write(file);
            file.flush();
            if (!file) throw IoError("failed writing " + out_path);
        }
        return kExitOk;
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::FileError& e) {
        err << "marginloan: " << e.what() << '\n';
        return kExitIo;
    } catch (const CLI::Error& e) {
        err << "marginloan: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "marginloan: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "marginloan: " << e.what() << '\n';
        return kExitDomain;
    }
}

}  // namespace margin::cli
