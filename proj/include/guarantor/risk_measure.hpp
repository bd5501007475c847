#pragma once

#include "guarantor/numerics.hpp"

#include <functional>
#include <span>
#include <vector>

namespace guarantor {

class DensityModel;

/// Atom of the mixing measure mu of a spectral risk measure: mass `weight`
/// placed at CVaR level `level` in (0, 1].
struct SpectralAtom {
    double weight;
    double level;
};

/// Law-invariant convex risk measure: entropic with risk aversion beta, or
/// spectral with a finitely supported mixing measure (CVaR is one atom).
class RiskMeasure {
public:
    enum class Kind { Entropic, Spectral };

    static RiskMeasure entropic(double beta);
    static RiskMeasure spectral(std::vector<SpectralAtom> atoms);
    static RiskMeasure cvar(double level);

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    const std::vector<SpectralAtom>& atoms() const { return atoms_; }
    bool is_cvar() const { return kind_ == Kind::Spectral && atoms_.size() == 1; }

    /// Spectral weight phi(x) = sum_i w_i / beta_i 1{x < beta_i}.
    double phi(double x) const;
    /// Running integral int_0^z phi(u) du = sum_i w_i min(z, beta_i) / beta_i.
    double phi_integral(double z) const;

private:
    RiskMeasure() = default;

    Kind kind_ = Kind::Entropic;
    double beta_ = 1.0;
    std::vector<SpectralAtom> atoms_;  // sorted by level
};

/// Quantile function of a position X, optionally with the u-locations of
/// its jumps so integration panels never straddle them.
struct QuantileFunction {
    std::function<double(double)> q;
    std::vector<double> jumps;
};

/// rho of an equally weighted sample (empirical law).
double evaluate_risk(const RiskMeasure& rho, std::span<const double> sample);
/// rho of the discrete law P(X = values[i]) = probs[i].
double evaluate_risk(const RiskMeasure& rho, std::span<const double> values,
                     std::span<const double> probs);
/// rho of a law given by its quantile function on (0, 1).
double evaluate_risk(const RiskMeasure& rho, const QuantileFunction& quantile,
                     const numerics::QuadratureOptions& opts = {});

/// Minimal penalty gamma_min(xi P). `computed` is false when no closed form
/// is available (general spectral); `value` is then +inf.
struct PenaltyDiagnostic {
    double value;
    bool computed;
};

PenaltyDiagnostic penalty_at_density(const RiskMeasure& rho, const DensityModel& model);

}  // namespace guarantor
