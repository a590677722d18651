#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <vector>

namespace margin {

/// One asset in geometric Brownian motion. Either drift or growth rate may be
/// supplied; the other follows from nu = mu - sigma^2/2.
class GbmAsset {
public:
    static GbmAsset from_drift(double mu, double sigma);
    static GbmAsset from_growth(double nu, double sigma);

    double drift() const noexcept { return mu_; }
    double volatility() const noexcept { return sigma_; }
    double growth() const noexcept { return nu_; }

private:
    GbmAsset(double mu, double sigma, double nu) : mu_(mu), sigma_(sigma), nu_(nu) {}

    double mu_;
    double sigma_;
    double nu_;
};

/// n correlated GBM assets together with the covariance of instantaneous
/// returns per unit time. Immutable; the Cholesky factor and the quadratic
/// forms in Sigma^-1 used by the demand side are computed once at build time.
class MarketUniverse {
public:
    /// Throws DimensionMismatch, DomainError (bad correlation entry) or
    /// NotPositiveDefinite.
    static MarketUniverse build(std::vector<GbmAsset> assets, const Eigen::MatrixXd& correlation);
    /// Single asset shortcut.
    static MarketUniverse single(const GbmAsset& asset);
    /// All pairs share one correlation coefficient.
    static MarketUniverse equicorrelated(std::vector<GbmAsset> assets, double rho);

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(assets_.size()); }
    const std::vector<GbmAsset>& assets() const noexcept { return assets_; }
    const Eigen::VectorXd& drift() const noexcept { return mu_; }
    const Eigen::VectorXd& volatility() const noexcept { return sigma_; }
    const Eigen::MatrixXd& correlation() const noexcept { return rho_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    /// Lower Cholesky factor L with L L' = Sigma.
    Eigen::MatrixXd cholesky_factor() const;

    /// Sigma^-1 x by triangular solves.
    Eigen::VectorXd solve(const Eigen::VectorXd& x) const;

    /// 1' Sigma^-1 1
    double ones_precision_ones() const noexcept { return one_p_one_; }
    /// 1' Sigma^-1 mu
    double ones_precision_drift() const noexcept { return one_p_mu_; }
    /// mu' Sigma^-1 mu
    double drift_precision_drift() const noexcept { return mu_p_mu_; }

private:
    MarketUniverse() = default;

    std::vector<GbmAsset> assets_;
    Eigen::VectorXd mu_;
    Eigen::VectorXd sigma_;
    Eigen::MatrixXd rho_;
    Eigen::MatrixXd cov_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double one_p_one_ = 0.0;
    double one_p_mu_ = 0.0;
    double mu_p_mu_ = 0.0;
};

/// Shadow rate lambda = (1'Sigma^-1 mu - 1) / 1'Sigma^-1 1: the margin rate at
/// which a continuous-time Kelly gambler's demand for margin debt is zero.
double shadow_rate(const MarketUniverse& universe);

/// Single-asset parameters for the no-arbitrage side. All rates are
/// continuously compounded annual decimals.
struct LoanScenario {
    double s0;      // initial stock price
    double debt;    // initial loan D
    double r;       // money-market rate
    double sigma;   // volatility
    double term;    // T in years
    double rate;    // margin rate R

    double equity() const noexcept { return s0 - debt; }
    /// Throws DomainError when 0 < D < S0, T > 0, sigma > 0, R >= r >= 0 fails.
    void validate() const;
};

/// Demand-side parameters seen by a broker.
struct BrokerProblem {
    double r;                  // cost of funds
    double lambda;             // shadow rate
    double demand_slope;       // D = V 1'Sigma^-1 1
    double demand_intercept;   // C = V (1'Sigma^-1 mu - 1)
    double wealth = 1.0;       // V
    double beta = 0.0;         // discount rate, 0 when unused
    int broker_count = 1;

    static BrokerProblem from_universe(const MarketUniverse& universe, double r, double wealth = 1.0);
    /// q(r_L) = C - D r_L
    double demand(double r_l) const noexcept { return demand_intercept - demand_slope * r_l; }
};

}  // namespace margin
