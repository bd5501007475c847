#include "guarantor/risk_measure.hpp"

#include "guarantor/density.hpp"
#include "guarantor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace guarantor {

RiskMeasure RiskMeasure::entropic(double beta) {
    if (!(beta > 0) || !std::isfinite(beta)) throw ConfigError("entropic risk needs beta > 0");
    RiskMeasure r;
    r.kind_ = Kind::Entropic;
    r.beta_ = beta;
    return r;
}

RiskMeasure RiskMeasure::spectral(std::vector<SpectralAtom> atoms) {
    if (atoms.empty()) throw ConfigError("spectral risk needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.weight > 0) || !(a.level > 0 && a.level <= 1)) {
            throw ConfigError("spectral atoms need weight > 0 and level in (0, 1]");
        }
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "spectral weights sum to " << total << ", expected 1";
        throw ConfigError(os.str());
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const SpectralAtom& a, const SpectralAtom& b) { return a.level < b.level; });
    RiskMeasure r;
    r.kind_ = Kind::Spectral;
    r.atoms_ = std::move(atoms);
    return r;
}

RiskMeasure RiskMeasure::cvar(double level) { return spectral({{1.0, level}}); }

double RiskMeasure::phi(double x) const {
    if (!(x >= 0 && x <= 1)) {
        std::ostringstream os;
        os << "phi argument " << x << " outside [0, 1]";
        throw DomainError(os.str());
    }
    double sum = 0.0;
    for (const auto& a : atoms_) {
        if (x < a.level) sum += a.weight / a.level;
    }
    return sum;
}

double RiskMeasure::phi_integral(double z) const {
    if (!(z >= 0 && z <= 1)) {
        std::ostringstream os;
        os << "phi integral bound " << z << " outside [0, 1]";
        throw DomainError(os.str());
    }
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.weight * std::min(z, a.level) / a.level;
    return sum;
}

double evaluate_risk(const RiskMeasure& rho, std::span<const double> sample) {
    if (sample.empty()) throw DomainError("risk of an empty sample");
    const std::vector<double> probs(sample.size(), 1.0 / static_cast<double>(sample.size()));
    return evaluate_risk(rho, sample, probs);
}

double evaluate_risk(const RiskMeasure& rho, std::span<const double> values,
                     std::span<const double> probs) {
    if (values.size() != probs.size() || values.empty()) {
        throw DomainError("risk of a discrete law needs matching, non-empty values and probabilities");
    }
    // Sorting first makes the result independent of the input order.
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] != values[b] ? values[a] < values[b] : probs[a] < probs[b];
    });

    if (rho.kind() == RiskMeasure::Kind::Entropic) {
        const double beta = rho.beta();
        double top = -kInf;
        for (double x : values) top = std::max(top, -x / beta);
        double sum = 0.0;
        for (std::size_t i : order) sum += probs[i] * std::exp(-values[i] / beta - top);
        return beta * (top + std::log(sum));
    }

    // -int_0^1 phi(u) q(u) du with q piecewise constant on the cumulative grid.
    double risk = 0.0;
    double cum = 0.0;
    double prev = 0.0;
    for (std::size_t i : order) {
        cum = std::min(1.0, cum + probs[i]);
        const double next = rho.phi_integral(cum);
        risk -= values[i] * (next - prev);
        prev = next;
    }
    return risk;
}

double evaluate_risk(const RiskMeasure& rho, const QuantileFunction& quantile,
                     const numerics::QuadratureOptions& opts) {
    if (rho.kind() == RiskMeasure::Kind::Entropic) {
        const double beta = rho.beta();
        auto integrand = [&](double u) { return std::exp(-quantile.q(u) / beta); };
        const double mgf = numerics::integrate(integrand, 0.0, 1.0, quantile.jumps, opts);
        if (!std::isfinite(mgf)) throw NonConvergent("entropic risk integral diverged");
        return beta * std::log(mgf);
    }
    // phi is constant between consecutive atom levels.
    double risk = 0.0;
    double left = 0.0;
    for (const auto& atom : rho.atoms()) {
        const double right = atom.level;
        if (right > left) {
            const double weight = rho.phi(left);
            risk -= weight * numerics::integrate(quantile.q, left, right, quantile.jumps, opts);
        }
        left = right;
    }
    return risk;
}

PenaltyDiagnostic penalty_at_density(const RiskMeasure& rho, const DensityModel& model) {
    if (rho.kind() == RiskMeasure::Kind::Entropic) {
        const double moment = model.expect([](double xi) { return xi * std::log(xi); });
        return {rho.beta() * moment, true};
    }
    if (rho.is_cvar()) {
        const double level = rho.atoms().front().level;
        return {model.esssup() <= 1.0 / level ? 0.0 : kInf, true};
    }
    return {kInf, false};
}

}  // namespace guarantor
