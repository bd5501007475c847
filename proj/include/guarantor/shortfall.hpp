#pragma once

#include "guarantor/density.hpp"
#include "guarantor/risk_measure.hpp"

namespace guarantor {

/// Cheapest admissible shortfall on {xi > c}: the minimizer Y* of E[xi Y]
/// over Y <= 0 supported on {xi > c} with rho(Y) <= rho0.
struct ShortfallSolution {
    enum class Status { Finite, MinusInfinity };

    RiskMeasure::Kind kind = RiskMeasure::Kind::Entropic;
    Status status = Status::Finite;
    double c = 0.0;
    double alpha = 0.0;           // P(xi > c)
    double delta = 0.0;           // E[xi Y*], the value the threshold search uses
    double delta_envelope = 0.0;  // spectral: -rho0 max_{z <= alpha} R(z); entropic: = delta
    double beta = 0.0;            // entropic risk aversion
    double eta = kInf;            // entropic multiplier; +inf means Y* = 0
    double level = 0.0;           // spectral constant loss size on {xi > c}

    /// Y*(xi); zero on {xi <= c}.
    double loss(double xi) const;
};

/// Entropic shortfall. eta solves E[(beta xi / eta v 1) 1{xi > c}] = e^{rho0/beta} + alpha - 1,
/// Y* = -beta [ln(beta xi / eta)]^+ on {xi > c}.
ShortfallSolution solve_entropic(const DensityModel& model, double beta, double rho0, double c,
                                 const numerics::QuadratureOptions& opts = {});

/// Spectral shortfall. Y* is the constant -rho0 / Phi(alpha) on {xi > c};
/// `delta` is -rho0 R(alpha) and `delta_envelope` maximizes R over [0, alpha].
ShortfallSolution solve_spectral(const DensityModel& model, const RiskMeasure& rho, double rho0,
                                 double c);

ShortfallSolution solve_shortfall(const DensityModel& model, const RiskMeasure& rho, double rho0,
                                  double c, const numerics::QuadratureOptions& opts = {});

/// lim_{x -> 0+} F^{-1}(1 - x) / phi(x) = esssup(xi) / phi(0) for atomic mu.
double existence_limit(const DensityModel& model, const RiskMeasure& rho);

/// R(z) = E[xi 1{1 - F(xi) < z}] / int_0^z phi. For z below 1e-12 it
/// returns the limit value F^{-1}(1 - z) / phi(z) evaluated at z = 1e-12.
double shortfall_ratio(const DensityModel& model, const RiskMeasure& rho, double z);

}  // namespace guarantor
