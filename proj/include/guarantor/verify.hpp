#pragma once

#include "guarantor/planner.hpp"

#include <cstdint>
#include <optional>

namespace guarantor {

struct VerifyOptions {
    std::size_t paths = 1'000'000;
    std::optional<std::uint64_t> seed;
    double tol = 1e-6;  // added to the 3-standard-error band
    int batches = 20;   // batch means for the spectral risk error
};

/// Monte Carlo estimate of one constraint or objective.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    Estimate budget;  // E[xi X], two-sided against x0
    Estimate risk;    // rho(-(X)^-), one-sided against rho0
    Estimate value;   // E[u(X^+)], two-sided against the plan value
    bool pass = false;
};

/// Draws xi = F^{-1}(U) from a seeded mt19937_64 stream and checks the
/// plan's claim. Throws SeedMissing without a seed and ConfigError for plans
/// that carry no claim (UNBOUNDED).
VerificationReport verify_solution(const ProblemSpec& spec, const Plan& plan, const VerifyOptions& opts);

}  // namespace guarantor
