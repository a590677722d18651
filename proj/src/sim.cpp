#include "margin/sim.hpp"

#include "margin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace margin::sim {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Paths are accumulated in fixed-size blocks and the block sums are combined
// in block order, so results do not depend on how blocks map to threads.
constexpr long kBlock = 4096;

// Welford within a block, pairwise merge across blocks.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        count += 1.0;
        const double delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }

    void merge(const Moments& o) {
        const double total = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * (o.count / total);
        m2 += o.m2 + delta * delta * (count * o.count / total);
        count = total;
    }
};

template <class PathFn>
Estimate run_paths(long paths, PathFn path_value) {
    if (paths < 2) throw InvalidArguments("need at least two paths for a standard error");
    const long blocks = (paths + kBlock - 1) / kBlock;
    std::vector<Moments> partial(static_cast<std::size_t>(blocks));

    auto work = [&](long first_block, long stride) {
        for (long b = first_block; b < blocks; b += stride) {
            Moments m;
            const long end = std::min(paths, (b + 1) * kBlock);
            for (long p = b * kBlock; p < end; ++p) {
                m.add(path_value(static_cast<std::uint64_t>(p)));
            }
            partial[static_cast<std::size_t>(b)] = m;
        }
    };

    const long workers = std::clamp<long>(static_cast<long>(std::thread::hardware_concurrency()), 1, blocks);
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (long w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }

    Moments total = partial.front();
    for (std::size_t b = 1; b < partial.size(); ++b) total.merge(partial[b]);
    const double n = total.count;
    return {total.mean, std::sqrt(total.m2 / (n - 1.0) / n)};
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

Xoshiro256 Xoshiro256::stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t mix = stream;
    return Xoshiro256(seed ^ splitmix64(mix));
}

Xoshiro256::result_type Xoshiro256::operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

Estimate mc_call_price(double s0, double strike, double r, double sigma, double term, const SimConfig& config) {
    if (!(s0 > 0.0) || !(strike >= 0.0) || !(sigma >= 0.0) || !(term > 0.0))
        throw DomainError("Monte Carlo call needs S0 > 0, K >= 0, sigma >= 0, T > 0");
    const double drift = (r - 0.5 * sigma * sigma) * term;
    const double vol = sigma * std::sqrt(term);
    const double discount = std::exp(-r * term);
    return run_paths(config.paths, [&](std::uint64_t path) {
        auto gen = Xoshiro256::stream(config.seed, path);
        std::normal_distribution<double> normal;
        const double s_t = s0 * std::exp(drift + vol * normal(gen));
        return discount * std::max(s_t - strike, 0.0);
    });
}

Estimate mc_growth_rate(const MarketUniverse& universe, const Eigen::VectorXd& bets, double r_l, double r,
                        const SimConfig& config, WealthScheme scheme) {
    const auto n = universe.size();
    if (bets.size() != n) throw DimensionMismatch("bet vector length does not match universe size");
    if (!(config.horizon > 0.0)) throw InvalidArguments("horizon must be positive");

    const Eigen::MatrixXd chol = universe.cholesky_factor();
    const Eigen::VectorXd& mu = universe.drift();
    const Eigen::VectorXd& sigma = universe.volatility();
    const double exposure = bets.sum();
    const double levered = std::max(exposure - 1.0, 0.0);
    const double cash = std::max(1.0 - exposure, 0.0);
    const double horizon = config.horizon;

    if (scheme == WealthScheme::Exact) {
        // log V_T = (alpha - b'Sigma b/2) T + b' (L z) sqrt(T)
        const double alpha = mu.dot(bets) - levered * r_l + cash * r;
        const Eigen::MatrixXd cov = chol * chol.transpose();
        const double log_drift = (alpha - 0.5 * bets.dot(cov * bets)) * horizon;
        const Eigen::RowVectorXd loading = bets.transpose() * chol * std::sqrt(horizon);
        return run_paths(config.paths, [&](std::uint64_t path) {
            auto gen = Xoshiro256::stream(config.seed, path);
            std::normal_distribution<double> normal;
            double shock = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) shock += loading(i) * normal(gen);
            return (log_drift + shock) / horizon;
        });
    }

    const long steps = std::max<long>(1, std::lround(horizon * static_cast<double>(config.steps_per_year)));
    const double dt = horizon / static_cast<double>(steps);
    const Eigen::VectorXd asset_drift = (mu - 0.5 * sigma.cwiseProduct(sigma)) * dt;
    const double carry = cash * std::expm1(r * dt) - levered * std::expm1(r_l * dt);
    // The terminal Brownian value is drawn first, from the same normals the
    // exact scheme uses, and the steps are filled in by a Brownian bridge.
    // Paths are then coupled across schemes and step sizes.
    return run_paths(config.paths, [&](std::uint64_t path) {
        auto gen = Xoshiro256::stream(config.seed, path);
        std::normal_distribution<double> normal;
        Eigen::VectorXd remaining(n);
        for (Eigen::Index i = 0; i < n; ++i) remaining(i) = std::sqrt(horizon) * normal(gen);
        Eigen::VectorXd w(n);
        double log_wealth = 0.0;
        for (long k = 0; k < steps; ++k) {
            const double tau = horizon - static_cast<double>(k) * dt;
            if (k + 1 == steps) {
                w = remaining;
            } else {
                const double spread = std::sqrt(dt * std::max(tau - dt, 0.0) / tau);
                for (Eigen::Index i = 0; i < n; ++i) w(i) = remaining(i) * (dt / tau) + spread * normal(gen);
            }
            remaining -= w;
            const Eigen::VectorXd log_ret = asset_drift + chol * w;
            double gross = 1.0 + carry;
            for (Eigen::Index i = 0; i < n; ++i) gross += bets(i) * std::expm1(log_ret(i));
            if (gross <= 0.0) return -std::numeric_limits<double>::infinity();
            log_wealth += std::log(gross);
        }
        return log_wealth / horizon;
    });
}

double grid_argmax(const std::function<double(double)>& f, double lo, double hi, const GridOptions& options) {
    if (!(lo < hi)) throw DomainError("grid_argmax needs lo < hi");
    if (!(options.step > 0.0)) throw DomainError("grid step must be positive");
    auto eval = [&](double x) {
        const double v = f(x);
        if (!std::isfinite(v)) throw DomainError("objective is not finite at a grid point");
        return v;
    };

    const long cells = std::max<long>(2, static_cast<long>(std::ceil((hi - lo) / options.step)));
    const double h = (hi - lo) / static_cast<double>(cells);
    long best = 1;
    double best_value = eval(lo + h);
    for (long k = 2; k < cells; ++k) {
        const double v = eval(lo + static_cast<double>(k) * h);
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }

    // Golden-section search on the two cells around the best grid point.
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo + static_cast<double>(best - 1) * h;
    double b = best + 1 == cells ? hi : lo + static_cast<double>(best + 1) * h;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    while (b - a > options.tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
        if (!(c > a && d < b && c <= d)) break;
    }
    const double x = 0.5 * (a + b);
    return eval(x) >= best_value ? x : lo + static_cast<double>(best) * h;
}

}  // namespace margin::sim
