#pragma once

#include "guarantor/density.hpp"
#include "guarantor/risk_measure.hpp"
#include "guarantor/utility.hpp"

#include <cstdint>
#include <vector>

namespace guarantor {

/// Finite market for brute-force checks: at most 16 distinct states.
struct OracleInstance {
    DensityModel density;
    Utility utility;
    RiskMeasure risk;
    double x0;
    double rho0;
};

inline constexpr int kOracleMaxStates = 16;

/// Decoupled solution on one gains set A, encoded as a bitmask over the
/// xi-sorted states (bit i set: state i is in A).
struct SubsetRow {
    std::uint32_t mask = 0;
    double delta = 0.0;   // inf E[xi Y] over shortfalls on the complement of A
    double x_plus = 0.0;  // x0 - delta
    double log_lambda = 0.0;
    double value = 0.0;   // U(A, x_plus)
};

struct OracleResult {
    double best_value = 0.0;
    std::uint32_t best_mask = 0;
    std::vector<SubsetRow> table;  // indexed by mask
    double best_lower_value = 0.0;
    std::uint32_t best_lower_mask = 0;
    double lower_set_gap = 0.0;  // best_value - best_lower_value
};

/// Shortfall on a complement set B (bitmask): the minimizing Y <= 0,
/// supported on B, with rho(Y) <= rho0. Exact for both risk kinds.
struct DiscreteShortfall {
    double delta = 0.0;
    std::vector<double> y;  // per state, zero off B
};

DiscreteShortfall solve_p2_discrete(const OracleInstance& inst, std::uint32_t complement);

/// Gains on A with budget x_plus: returns ln lambda (+inf for x_plus = 0)
/// and fills `value`.
double solve_p1_discrete(const OracleInstance& inst, std::uint32_t mask, double x_plus,
                         double& value);

/// Enumerates all 2^N gains sets. Throws BudgetExceeded for N > 16.
OracleResult enumerate_solve(const OracleInstance& inst);

/// Claim X assembled from the best row: I(lambda xi) on A*, Y* off it.
std::vector<double> reconstruct_claim(const OracleInstance& inst, const OracleResult& result);

struct ClaimEvaluation {
    double budget;  // E[xi X]
    double risk;    // rho(-(X)^-)
    double value;   // E[u(X^+)]
};

ClaimEvaluation evaluate_claim(const OracleInstance& inst, const std::vector<double>& claim);

struct DirectSearchOptions {
    int starts = 32;
    int max_sweeps = 400;
    std::uint64_t seed = 1;
};

struct DirectSearchResult {
    double value = 0.0;
    std::vector<double> claim;
};

/// Searches claims directly, without any set decomposition: multi-start
/// coordinate ascent over a direction w, where w^+ shapes the gains and w^-
/// the losses. Losses are scaled until the risk budget binds and gains
/// absorb the rest of the price budget.
DirectSearchResult direct_search(const OracleInstance& inst, const DirectSearchOptions& opts = {});

/// Comonotone pairing against all n! couplings of two equal-length samples.
struct RearrangementCertificate {
    double comonotone;  // (1/n) sum a_(k) b_(k)
    double best;        // max over permutations
    double worst;       // min over permutations
    bool holds;         // comonotone >= best up to rounding
};

RearrangementCertificate rearrangement_check(std::vector<double> a, std::vector<double> b);

/// Equal-probability discretization of a lognormal: N cells of mass 1/N,
/// each atom at the conditional mean of its cell.
DensityModel discretize_lognormal(double log_mean, double log_std, int n);

}  // namespace guarantor
