#include "margin/roots.hpp"

#include "margin/errors.hpp"

#include <cmath>
#include <utility>

namespace margin {

RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& options) {
    if (lo > hi) std::swap(lo, hi);
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || (f_lo > 0.0) == (f_hi > 0.0))
        throw BracketFailure("endpoints do not bracket a root");

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    bool secant_turn = true;
    for (int it = 1; it <= options.max_iterations; ++it) {
        if ((fx > 0.0) == (f_lo > 0.0)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if (fx == 0.0 || (std::abs(fx) < options.residual_tol && hi - lo < options.width_tol))
            return {x, fx, it};

        // Alternate secant and bisection steps; a secant step that leaves the
        // interior of the bracket falls back to bisection.
        double next = 0.5 * (lo + hi);
        if (secant_turn) {
            const double s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if (s > lo && s < hi) next = s;
        }
        secant_turn = !secant_turn;
        if (next <= lo || next >= hi) {
            // bracket exhausted in floating point
            return std::abs(f_lo) < std::abs(f_hi) ? RootResult{lo, f_lo, it} : RootResult{hi, f_hi, it};
        }
        x = next;
        fx = f(x);
    }
    return {x, fx, options.max_iterations};
}

}  // namespace margin
