#include "guarantor/numerics.hpp"

#include "guarantor/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

namespace guarantor::numerics {

namespace {

// QUADPACK qk15 abscissae and weights. Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod15(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod)) {
        std::ostringstream os;
        os << "non-finite integrand on [" << a << ", " << b << "]";
        throw NonConvergent(os.str());
    }
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

double integrate(const ScalarFn& f, double a, double b, const QuadratureOptions& opts) {
    if (!(b > a)) return 0.0;
    std::priority_queue<Panel> panels;
    Panel first = kronrod15(f, a, b);
    double total = first.value;
    double error = first.error;
    panels.push(first);
    std::size_t count = 1;
    while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (count >= opts.max_subdivisions) {
            std::ostringstream os;
            os << "quadrature on [" << a << ", " << b << "] stopped at error " << error
               << " after " << count << " subdivisions";
            throw NonConvergent(os.str());
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Panel cannot be split further in floating point; accept it.
            error -= worst.error;
            worst.error = 0.0;
            panels.push(worst);
            continue;
        }
        const Panel left = kronrod15(f, worst.a, mid);
        const Panel right = kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++count;
    }
    // Re-sum to shed accumulated rounding from the running updates.
    double sum = 0.0;
    while (!panels.empty()) {
        sum += panels.top().value;
        panels.pop();
    }
    return sum;
}

double integrate(const ScalarFn& f, double a, double b, std::span<const double> breakpoints,
                 const QuadratureOptions& opts) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a};
    for (double x : breakpoints) {
        if (x > a && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        sum += integrate(f, cuts[i], cuts[i + 1], opts);
    }
    return sum;
}

double bisect(const ScalarFn& f, double lo, double hi, const RootOptions& opts) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) {
        std::ostringstream os;
        os << "no sign change on [" << lo << ", " << hi << "]";
        throw BracketFailure(os.str());
    }
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < opts.max_iter; ++i) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) <= opts.f_tol) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (std::abs(hi - lo) <= opts.x_tol * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

double find_root_decreasing(const ScalarFn& f, double guess, double step, double lo_limit,
                            double hi_limit, const RootOptions& opts) {
    const double f0 = f(guess);
    if (f0 == 0.0) return guess;
    double lo = guess;
    double hi = guess;
    if (f0 > 0) {
        // Root lies to the right.
        double x = guess;
        while (true) {
            lo = x;
            x = std::min(x + step, hi_limit);
            const double fx = f(x);
            if (fx <= 0) {
                hi = x;
                break;
            }
            if (x >= hi_limit) {
                std::ostringstream os;
                os << "no sign change up to " << hi_limit << " (f = " << fx << ")";
                throw BracketFailure(os.str());
            }
            step *= 2.0;
        }
    } else {
        double x = guess;
        while (true) {
            hi = x;
            x = std::max(x - step, lo_limit);
            const double fx = f(x);
            if (fx >= 0) {
                lo = x;
                break;
            }
            if (x <= lo_limit) {
                std::ostringstream os;
                os << "no sign change down to " << lo_limit << " (f = " << fx << ")";
                throw BracketFailure(os.str());
            }
            step *= 2.0;
        }
    }
    return bisect(f, lo, hi, opts);
}

Extremum golden_section_max(const ScalarFn& f, double a, double b, double x_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > x_tol) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 >= f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_cdf_upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_interval(double a, double b) {
    if (!(b > a)) return 0.0;
    // Close endpoints: integrate the density instead of subtracting CDFs.
    if (b - a <= 1.0) {
        return integrate(normal_pdf, a, b, {.rel_tol = 1e-14, .abs_tol = 0.0, .max_subdivisions = 64});
    }
    if (a >= 0.0) return normal_cdf_upper(a) - normal_cdf_upper(b);
    return normal_cdf(b) - normal_cdf(a);
}

double normal_quantile(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_quantile_upper(double p) {
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    if (p >= 1.0) return -std::numeric_limits<double>::infinity();
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace guarantor::numerics
