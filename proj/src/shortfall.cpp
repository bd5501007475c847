#include "guarantor/shortfall.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace guarantor {

namespace {

constexpr double kRatioZeroProbe = 1e-12;
constexpr int kEnvelopeGrid = 512;

void check_budget(double rho0) {
    if (!(rho0 >= 0) || !std::isfinite(rho0)) {
        std::ostringstream os;
        os << "risk budget must be finite and nonnegative, got " << rho0;
        throw DomainError(os.str());
    }
}

double require_tail(const DensityModel& model, double c) {
    const double alpha = model.tail_prob(c);
    if (!(alpha > 0)) {
        std::ostringstream os;
        os << "no probability mass above c = " << c;
        throw InfeasibleTail(os.str());
    }
    return alpha;
}

// Discrete laws cannot split atoms: the envelope runs over top sets {xi >= x_j}.
double discrete_envelope_ratio(const DensityModel& model, const RiskMeasure& rho, double c) {
    double best = 0.0;
    double price = 0.0;
    double prob = 0.0;
    const auto& states = model.states();
    for (auto it = states.rbegin(); it != states.rend() && it->xi > c; ++it) {
        price += it->xi * it->prob;
        prob += it->prob;
        best = std::max(best, price / rho.phi_integral(std::min(prob, 1.0)));
    }
    return best;
}

double atomless_envelope_ratio(const DensityModel& model, const RiskMeasure& rho, double alpha) {
    const double h = alpha / kEnvelopeGrid;
    int best_i = 0;
    double best = shortfall_ratio(model, rho, 0.0);
    for (int i = 1; i <= kEnvelopeGrid; ++i) {
        const double r = shortfall_ratio(model, rho, i * h);
        if (r >= best) {  // ties go to larger z
            best = r;
            best_i = i;
        }
    }
    const double lo = std::max(0.0, (best_i - 1) * h);
    const double hi = std::min(alpha, (best_i + 1) * h);
    const auto refined = numerics::golden_section_max(
        [&](double z) { return shortfall_ratio(model, rho, z); }, lo, hi, 1e-12 * alpha + 1e-15);
    return std::max(best, refined.value);
}

}  // namespace

double ShortfallSolution::loss(double xi) const {
    if (!(xi > c)) return 0.0;
    if (kind == RiskMeasure::Kind::Spectral) return -level;
    if (std::isinf(eta)) return 0.0;
    return -beta * std::max(0.0, std::log(beta * xi / eta));
}

ShortfallSolution solve_entropic(const DensityModel& model, double beta, double rho0, double c,
                                 const numerics::QuadratureOptions& opts) {
    check_budget(rho0);
    ShortfallSolution sol;
    sol.kind = RiskMeasure::Kind::Entropic;
    sol.c = c;
    sol.beta = beta;
    sol.alpha = model.tail_prob(c);
    if (rho0 == 0.0) return sol;
    const double alpha = require_tail(model, c);

    const double excess = std::expm1(rho0 / beta);
    // E[(beta xi / eta v 1) 1{xi > c}] - alpha - (e^{rho0/beta} - 1), strictly decreasing in ln eta.
    auto residual = [&](double log_eta) {
        const double eta = std::exp(log_eta);
        const double k = std::max(c, eta / beta);
        return beta / eta * model.tail_price(k) - model.tail_prob(k) - excess;
    };
    // Exact when the solution has eta <= beta c.
    const double lo = std::log(1e-30);
    const double hi = std::log(1e30);
    const double guess = std::log(beta * model.tail_price(c) / (excess + alpha));
    const double log_eta = numerics::find_root_decreasing(
        residual, std::clamp(guess, lo, hi), 1.0, lo, hi,
        {.f_tol = 0.0, .x_tol = 1e-15, .max_iter = 200});
    sol.eta = std::exp(log_eta);

    const double k = std::max(c, sol.eta / beta);
    const double eta = sol.eta;
    sol.delta = -beta * model.expect([&](double xi) { return xi * std::log(beta * xi / eta); },
                                     {k, kInf}, {}, opts);
    sol.delta_envelope = sol.delta;
    return sol;
}

double existence_limit(const DensityModel& model, const RiskMeasure& rho) {
    if (rho.kind() != RiskMeasure::Kind::Spectral) {
        throw DomainError("existence limit is defined for spectral risk measures");
    }
    const double top = model.esssup();
    if (std::isinf(top)) return kInf;
    return top / rho.phi(0.0);
}

double shortfall_ratio(const DensityModel& model, const RiskMeasure& rho, double z) {
    if (!(z >= 0 && z <= 1)) throw DomainError("shortfall ratio needs z in [0, 1]");
    // Below the probe the tail price is lost to cancellation; use the limit.
    if (z < kRatioZeroProbe) {
        return model.upper_quantile(kRatioZeroProbe) / rho.phi(kRatioZeroProbe);
    }
    if (!model.atomless()) {
        double price = 0.0;
        double cum = 0.0;
        for (const auto& st : model.states()) {
            cum += st.prob;
            if (1.0 - cum < z) price += st.xi * st.prob;
        }
        return price / rho.phi_integral(z);
    }
    return model.tail_price(model.upper_quantile(z)) / rho.phi_integral(z);
}

ShortfallSolution solve_spectral(const DensityModel& model, const RiskMeasure& rho, double rho0,
                                 double c) {
    check_budget(rho0);
    if (rho.kind() != RiskMeasure::Kind::Spectral) {
        throw DomainError("solve_spectral needs a spectral risk measure");
    }
    ShortfallSolution sol;
    sol.kind = RiskMeasure::Kind::Spectral;
    sol.c = c;
    sol.alpha = model.tail_prob(c);
    if (rho0 == 0.0) return sol;
    const double alpha = require_tail(model, c);

    if (std::isinf(existence_limit(model, rho))) {
        sol.status = ShortfallSolution::Status::MinusInfinity;
        sol.delta = -kInf;
        sol.delta_envelope = -kInf;
        sol.level = kInf;
        return sol;
    }
    const double mass = rho.phi_integral(alpha);
    sol.level = rho0 / mass;
    sol.delta = -sol.level * model.tail_price(c);
    const double envelope = model.atomless() ? atomless_envelope_ratio(model, rho, alpha)
                                             : discrete_envelope_ratio(model, rho, c);
    sol.delta_envelope = std::min(sol.delta, -rho0 * envelope);
    return sol;
}

ShortfallSolution solve_shortfall(const DensityModel& model, const RiskMeasure& rho, double rho0,
                                  double c, const numerics::QuadratureOptions& opts) {
    if (rho.kind() == RiskMeasure::Kind::Entropic) {
        return solve_entropic(model, rho.beta(), rho0, c, opts);
    }
    return solve_spectral(model, rho, rho0, c);
}

}  // namespace guarantor
