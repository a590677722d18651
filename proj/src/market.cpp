#include "margin/market.hpp"

#include "margin/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace margin {

GbmAsset GbmAsset::from_drift(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
        throw DomainError("asset volatility must be positive and finite");
    return GbmAsset(mu, sigma, mu - 0.5 * sigma * sigma);
}

GbmAsset GbmAsset::from_growth(double nu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(nu))
        throw DomainError("asset volatility must be positive and finite");
    return GbmAsset(nu + 0.5 * sigma * sigma, sigma, nu);
}

MarketUniverse MarketUniverse::build(std::vector<GbmAsset> assets, const Eigen::MatrixXd& correlation) {
    const auto n = static_cast<Eigen::Index>(assets.size());
    if (n == 0) throw DimensionMismatch("universe needs at least one asset");
    if (correlation.rows() != n || correlation.cols() != n)
        throw DimensionMismatch("correlation matrix is " + std::to_string(correlation.rows()) + "x" +
                                std::to_string(correlation.cols()) + " for " + std::to_string(n) +
                                " assets");

    for (Eigen::Index i = 0; i < n; ++i) {
        if (correlation(i, i) != 1.0) throw DomainError("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < n; ++j) {
            const double rho = correlation(i, j);
            if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation entries must lie in [-1, 1]");
            if (rho != correlation(j, i)) throw DomainError("correlation matrix must be symmetric");
        }
    }

    MarketUniverse u;
    u.mu_.resize(n);
    u.sigma_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u.mu_(i) = assets[static_cast<std::size_t>(i)].drift();
        u.sigma_(i) = assets[static_cast<std::size_t>(i)].volatility();
    }
    u.rho_ = correlation;
    u.cov_ = u.sigma_.asDiagonal() * correlation * u.sigma_.asDiagonal();
    u.assets_ = std::move(assets);

    u.llt_.compute(u.cov_);
    if (u.llt_.info() != Eigen::Success)
        throw NotPositiveDefinite("covariance matrix is not positive definite");

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd p_one = u.llt_.solve(ones);
    const Eigen::VectorXd p_mu = u.llt_.solve(u.mu_);
    u.one_p_one_ = ones.dot(p_one);
    u.one_p_mu_ = ones.dot(p_mu);
    u.mu_p_mu_ = u.mu_.dot(p_mu);
    return u;
}

MarketUniverse MarketUniverse::single(const GbmAsset& asset) {
    return build({asset}, Eigen::MatrixXd::Ones(1, 1));
}

MarketUniverse MarketUniverse::equicorrelated(std::vector<GbmAsset> assets, double rho) {
    const auto n = static_cast<Eigen::Index>(assets.size());
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, rho);
    corr.diagonal().setOnes();
    return build(std::move(assets), corr);
}

Eigen::MatrixXd MarketUniverse::cholesky_factor() const { return llt_.matrixL(); }

Eigen::VectorXd MarketUniverse::solve(const Eigen::VectorXd& x) const {
    if (x.size() != size()) throw DimensionMismatch("vector length does not match universe size");
    return llt_.solve(x);
}

double shadow_rate(const MarketUniverse& universe) {
    return (universe.ones_precision_drift() - 1.0) / universe.ones_precision_ones();
}

void LoanScenario::validate() const {
    if (!(s0 > 0.0) || !(debt > 0.0) || !(debt < s0))
        throw DomainError("loan requires 0 < D < S0");
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    if (!(term > 0.0)) throw DomainError("loan term must be positive");
    if (!(r >= 0.0)) throw DomainError("money-market rate must be non-negative");
    if (!(rate >= r)) throw DomainError("margin rate must be at least the money-market rate");
}

BrokerProblem BrokerProblem::from_universe(const MarketUniverse& universe, double r, double wealth) {
    BrokerProblem p{};
    p.r = r;
    p.lambda = shadow_rate(universe);
    p.wealth = wealth;
    p.demand_slope = wealth * universe.ones_precision_ones();
    p.demand_intercept = wealth * (universe.ones_precision_drift() - 1.0);
    return p;
}

}  // namespace margin
