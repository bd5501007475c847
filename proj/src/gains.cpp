#include "guarantor/gains.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace guarantor {

namespace {

// I(lambda xi) vanishes for xi >= u'(0+) / lambda, so the integration region
// ends there instead of carrying the kink.
double active_upper(const Utility& u, double c, double log_lambda) {
    return std::min(c, std::exp(std::log(u.marginal_at_zero()) - log_lambda));
}

void require_multiplier(double lambda) {
    if (!(lambda > 0)) throw DomainError("gains multiplier must be positive");
}

// Wide enough for lower sets of probability 1e-6 under exponential utility,
// where lambda is far below the smallest double.
constexpr double kLogLambdaMin = -1e6;
constexpr double kLogLambdaMax = 1e6;

}  // namespace

double gains_cost_log(const DensityModel& model, const Utility& u, double c, double log_lambda,
                      const numerics::QuadratureOptions& opts) {
    if (log_lambda == kInf) return 0.0;
    return model.expect(
        [&](double xi) { return xi * u.inverse_marginal_log(log_lambda + std::log(xi)); },
        {0.0, active_upper(u, c, log_lambda)}, {}, opts);
}

double gains_cost(const DensityModel& model, const Utility& u, double c, double lambda,
                  const numerics::QuadratureOptions& opts) {
    if (std::isinf(lambda)) return 0.0;
    require_multiplier(lambda);
    return gains_cost_log(model, u, c, std::log(lambda), opts);
}

double solve_log_multiplier(const DensityModel& model, const Utility& u, double c, double x_plus,
                            const numerics::QuadratureOptions& opts, double root_tol) {
    if (!(x_plus >= 0) || !std::isfinite(x_plus)) {
        std::ostringstream os;
        os << "gains budget must be finite and nonnegative, got " << x_plus;
        throw DomainError(os.str());
    }
    if (x_plus == 0.0) return kInf;
    if (!(model.cdf(c) > 0)) {
        std::ostringstream os;
        os << "no probability mass below c = " << c << " to carry a positive gains budget";
        throw DomainError(os.str());
    }
    auto residual = [&](double log_lambda) {
        return gains_cost_log(model, u, c, log_lambda, opts) - x_plus;
    };
    return numerics::find_root_decreasing(residual, 0.0, 1.0, kLogLambdaMin, kLogLambdaMax,
                                          {.f_tol = root_tol, .x_tol = 1e-15, .max_iter = 300});
}

double solve_multiplier(const DensityModel& model, const Utility& u, double c, double x_plus,
                        const numerics::QuadratureOptions& opts, double root_tol) {
    return std::exp(solve_log_multiplier(model, u, c, x_plus, opts, root_tol));
}

double gains_value_log(const DensityModel& model, const Utility& u, double c, double log_lambda,
                       const numerics::QuadratureOptions& opts) {
    if (log_lambda == kInf) return 0.0;
    return model.expect(
        [&](double xi) { return u.value(u.inverse_marginal_log(log_lambda + std::log(xi))); },
        {0.0, active_upper(u, c, log_lambda)}, {}, opts);
}

double gains_value(const DensityModel& model, const Utility& u, double c, double lambda,
                   const numerics::QuadratureOptions& opts) {
    if (std::isinf(lambda)) return 0.0;
    require_multiplier(lambda);
    return gains_value_log(model, u, c, std::log(lambda), opts);
}

double value_bound(const Utility& u, const DensityModel& model, double lambda, double x_plus,
                   const numerics::QuadratureOptions& opts) {
    if (!(lambda > 0)) throw DomainError("value bound needs lambda > 0");
    const std::array<double, 1> kink{u.marginal_at_zero() / lambda};
    const double conj = model.expect([&](double xi) { return u.conjugate(lambda * xi); }, {}, kink,
                                     opts);
    return conj + lambda * x_plus;
}

GainsSolution solve_gains(const DensityModel& model, const Utility& u, double c, double x_plus,
                          const numerics::QuadratureOptions& opts, double root_tol) {
    GainsSolution sol;
    sol.c = c;
    sol.x_plus = x_plus;
    sol.log_lambda = solve_log_multiplier(model, u, c, x_plus, opts, root_tol);
    sol.lambda = std::exp(sol.log_lambda);
    sol.value = gains_value_log(model, u, c, sol.log_lambda, opts);
    return sol;
}

}  // namespace guarantor
