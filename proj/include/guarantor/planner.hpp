#pragma once

#include "guarantor/density.hpp"
#include "guarantor/gains.hpp"
#include "guarantor/risk_measure.hpp"
#include "guarantor/shortfall.hpp"
#include "guarantor/utility.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace guarantor {

struct Numerics {
    int grid_points = 256;
    double q_min = 1e-4;
    double q_max = 1.0 - 1e-6;
    double q_tol = 1e-6;
    double expect_tol = 1e-9;
    double root_tol = 1e-10;
    std::size_t mc_paths = 1'000'000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;  // 0: one per hardware thread

    numerics::QuadratureOptions quadrature() const { return {.rel_tol = expect_tol}; }
};

/// One problem instance. Wealth is measured above the guarantee, so the
/// budget available to the claim is x0 = v0 - guarantee.
struct ProblemSpec {
    double v0;
    double guarantee;
    double rho0;
    DensityModel density;
    Utility utility;
    RiskMeasure risk;
    std::optional<BlackScholesMarket> market;
    Numerics numerics;

    double x0() const { return v0 - guarantee; }
};

/// Throws ConfigError on an inconsistent spec (z > v0, rho0 < 0, bad grid,
/// non-integrable conjugate, infinite entropic penalty).
void validate(const ProblemSpec& spec);

/// X = I(lambda xi) 1{xi <= c} + Y*(xi) 1{xi > c}. The multiplier is held
/// as ln lambda, which stays finite where lambda leaves double range.
struct Claim {
    double c;
    double log_lambda;
    Utility utility;
    ShortfallSolution shortfall;

    double operator()(double xi) const;
    /// xi-values where the claim has kinks or jumps.
    std::vector<double> breakpoints() const;
};

struct GridPoint {
    double q;
    double c;
    double delta;
    double x_plus;
    double log_lambda;
    double value;
};

struct PlanChecks {
    bool computed = false;
    double budget = 0.0;  // E[xi X]
    double risk = 0.0;    // rho(-(X)^-)
    double value = 0.0;   // E[u(X^+)] by direct quadrature
    bool budget_ok = false;
    bool risk_ok = false;
    bool value_ok = false;
};

/// Constants of the Black-Scholes payoff
/// X(S) = [L/delta ln S + K1]^+ 1{S >= s*} - beta [K2 - L ln S]^+ 1{S < s*}.
struct BsConstants {
    double s_star;
    double L;
    double K1;
    double K2;
};

struct Plan {
    enum class Classification { Optimal, NoOptimum, Unbounded };

    Classification classification = Classification::Optimal;
    std::string reason;
    double x0 = 0.0;
    double c_star = 0.0;
    double q_star = 0.0;  // P(xi <= c*), the probability of no loss
    double lambda_star = kInf;
    double log_lambda_star = kInf;
    double x_plus = 0.0;
    double value = 0.0;
    double epsilon = 0.0;  // NO_OPTIMUM only
    double v_sup = 0.0;    // limit of v(c) as c -> esssup
    ShortfallSolution shortfall;
    std::optional<Claim> claim;
    std::optional<BsConstants> bs;
    std::vector<GridPoint> grid;
    double existence_limit = kInf;  // spectral only
    PenaltyDiagnostic penalty{kInf, false};
    double benchmark_value = 0.0;
    double local_left = 0.0;   // v(q* - 1e-3)
    double local_right = 0.0;  // v(q* + 1e-3)
    PlanChecks checks;
    std::vector<std::string> warnings;
};

const char* to_string(Plan::Classification c);

/// v at the threshold c = F^{-1}(q), with the gains budget x0 - Delta(c).
/// Spectral risk uses Delta-hat(c) = -rho0 R(alpha(c)).
GridPoint evaluate_threshold(const ProblemSpec& spec, double q);

/// Full one-dimensional threshold search. Atom-bearing models are refused
/// with ConfigError; they belong to the enumeration oracle.
Plan solve(const ProblemSpec& spec);

struct Benchmark {
    double value;
    double log_lambda;
};

/// Best claim with X >= 0 and E[xi X] = x0: P1 on the whole space.
Benchmark no_risk_benchmark(const ProblemSpec& spec);

/// Evaluates budget, risk and value of `claim` by quadrature.
PlanChecks check_claim(const ProblemSpec& spec, const Claim& claim, double expected_value);

BsConstants bs_constants(const BlackScholesMarket& market, double delta, double beta, double c,
                         double lambda, double eta);

/// X as a function of S_T from the constants.
double bs_payoff(const BsConstants& k, double delta, double beta, double s_t);

struct PayoffPoint {
    double x;       // S_T for Black-Scholes curves, xi otherwise
    double x_star;  // claim above the guarantee
    double investor;
};

/// Payoff curve sampled at the given abscissae (S_T values when the spec
/// carries a Black-Scholes market, xi values otherwise).
std::vector<PayoffPoint> payoff_curve(const ProblemSpec& spec, const Plan& plan,
                                      const std::vector<double>& points);

/// Default abscissae: `n` points between the 0.1% and 99.9% quantiles.
std::vector<double> default_payoff_grid(const ProblemSpec& spec, int n = 201);

}  // namespace guarantor
