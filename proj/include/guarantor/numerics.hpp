#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace guarantor::numerics {

using ScalarFn = std::function<double(double)>;

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-15;
    std::size_t max_subdivisions = 2000;
};

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over the finite
/// interval [a, b]. The interval with the largest error estimate is split
/// until the total estimate drops below max(abs_tol, rel_tol * |I|).
/// Throws NonConvergent when the subdivision budget runs out first.
double integrate(const ScalarFn& f, double a, double b, const QuadratureOptions& opts = {});

/// Same as integrate() but splits [a, b] at the given interior breakpoints
/// first, so that kinks and jumps of `f` never fall inside a panel.
double integrate(const ScalarFn& f, double a, double b, std::span<const double> breakpoints,
                 const QuadratureOptions& opts = {});

struct RootOptions {
    double f_tol = 1e-10;   // absolute tolerance on |f(x)|
    double x_tol = 1e-15;   // relative width of the final bracket
    int max_iter = 400;
};

/// Bisection on a bracket [lo, hi] where f(lo) and f(hi) have opposite
/// signs. Stops when |f| <= f_tol or the bracket collapses.
double bisect(const ScalarFn& f, double lo, double hi, const RootOptions& opts = {});

/// Root of a strictly decreasing function on (lo_limit, hi_limit). Starts
/// from `guess`, steps outward by `step` (doubling each time) until the
/// sign changes, then bisects. Throws BracketFailure if the limits are hit
/// without a sign change.
double find_root_decreasing(const ScalarFn& f, double guess, double step, double lo_limit,
                            double hi_limit, const RootOptions& opts = {});

struct Extremum {
    double x;
    double value;
};

/// Golden-section search for the maximum of a unimodal function on [a, b].
Extremum golden_section_max(const ScalarFn& f, double a, double b, double x_tol);

/// Standard normal helpers. `normal_cdf_upper(x)` = 1 - Phi(x) without
/// cancellation; `normal_quantile_upper(p)` = Phi^{-1}(1 - p).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_cdf_upper(double x);
/// Phi(b) - Phi(a) for a <= b, accurate when the endpoints are close.
double normal_interval(double a, double b);
double normal_quantile(double p);
double normal_quantile_upper(double p);

}  // namespace guarantor::numerics
