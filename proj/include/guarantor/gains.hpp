#pragma once

#include "guarantor/density.hpp"
#include "guarantor/utility.hpp"

namespace guarantor {

/// Optimal gains on the lower set {xi <= c} for a gains budget x_plus:
/// Z* = I(lambda xi) 1{xi <= c} with E[xi Z*] = x_plus.
struct GainsSolution {
    double c = 0.0;
    double x_plus = 0.0;
    double lambda = kInf;      // +inf encodes the zero-budget claim Z* = 0; may underflow to 0
    double log_lambda = kInf;  // authoritative: finite whenever x_plus > 0
    double value = 0.0;        // E[u(I(lambda xi)) 1{xi <= c}]
};

/// E[xi I(lambda xi) 1{xi <= c}], strictly decreasing in lambda.
double gains_cost(const DensityModel& model, const Utility& u, double c, double lambda,
                  const numerics::QuadratureOptions& opts = {});
/// gains_cost in terms of ln lambda; +inf gives 0.
double gains_cost_log(const DensityModel& model, const Utility& u, double c, double log_lambda,
                      const numerics::QuadratureOptions& opts = {});

/// Unique lambda with gains_cost(lambda) = x_plus, found by bracketing on
/// ln lambda and bisecting. Returns +inf when x_plus == 0.
double solve_multiplier(const DensityModel& model, const Utility& u, double c, double x_plus,
                        const numerics::QuadratureOptions& opts = {}, double root_tol = 1e-10);
/// ln of the multiplier; +inf when x_plus == 0.
double solve_log_multiplier(const DensityModel& model, const Utility& u, double c, double x_plus,
                            const numerics::QuadratureOptions& opts = {}, double root_tol = 1e-10);

/// v = E[u(I(lambda xi)) 1{xi <= c}]; zero for the +inf sentinel.
double gains_value(const DensityModel& model, const Utility& u, double c, double lambda,
                   const numerics::QuadratureOptions& opts = {});
double gains_value_log(const DensityModel& model, const Utility& u, double c, double log_lambda,
                       const numerics::QuadratureOptions& opts = {});

/// Upper envelope E[v(lambda xi)] + lambda x_plus on the value of any claim
/// with price x_plus.
double value_bound(const Utility& u, const DensityModel& model, double lambda, double x_plus,
                   const numerics::QuadratureOptions& opts = {});

GainsSolution solve_gains(const DensityModel& model, const Utility& u, double c, double x_plus,
                          const numerics::QuadratureOptions& opts = {}, double root_tol = 1e-10);

}  // namespace guarantor
