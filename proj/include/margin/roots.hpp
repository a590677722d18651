#pragma once

#include <functional>

namespace margin {

struct RootResult {
    double x;
    double residual;
    int iterations;
};

struct RootOptions {
    double residual_tol = 1e-10;   // absolute, on |f(x)|
    double width_tol = 1e-12;      // absolute, on the bracket
    int max_iterations = 200;
};

/// Bracketed bisection with secant refinement. f(lo) and f(hi) must have
/// opposite signs (or one of them be zero). Every secant candidate that
/// falls outside the current bracket is replaced by the midpoint, so the
/// bracket always shrinks. Stops when both tolerances hold, or when the
/// bracket can no longer be split in floating point.
/// Throws BracketFailure when the endpoints do not bracket a root.
RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& options = {});

}  // namespace margin
