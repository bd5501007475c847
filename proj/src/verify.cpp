#include "guarantor/verify.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace guarantor {

namespace {

// One stratum of the sample: draws of xi conditional on {xi <= c} or
// {xi > c}, carrying total probability `weight`.
struct Stratum {
    double weight = 0.0;
    std::vector<double> price;
    std::vector<double> value;
    std::vector<double> loss;
};

struct Moments {
    double mean;
    double variance;  // of the sample mean
};

Moments moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, n > 1 ? ss / (n - 1.0) / n : 0.0};
}

template <class Field>
Moments combined(const std::vector<Stratum>& strata, Field field) {
    Moments out{0.0, 0.0};
    for (const auto& s : strata) {
        const auto m = moments(s.*field);
        out.mean += s.weight * m.mean;
        out.variance += s.weight * s.weight * m.variance;
    }
    return out;
}

Estimate entropic_risk(std::vector<Stratum> strata, double beta) {
    for (auto& s : strata) {
        for (auto& y : s.loss) y = std::exp(-y / beta);
    }
    const auto m = combined(strata, &Stratum::loss);
    // Delta method for beta ln(mean).
    return {beta * std::log(m.mean), beta * std::sqrt(m.variance) / m.mean, 0.0, false};
}

double weighted_risk(const RiskMeasure& rho, const std::vector<Stratum>& strata, std::size_t part,
                     std::size_t parts) {
    std::vector<double> values;
    std::vector<double> probs;
    for (const auto& s : strata) {
        const std::size_t size = s.loss.size() / parts;
        const std::size_t first = part * size;
        const std::size_t count = parts == 1 ? s.loss.size() : size;
        for (std::size_t i = first; i < first + count; ++i) {
            values.push_back(s.loss[i]);
            probs.push_back(s.weight / static_cast<double>(count));
        }
    }
    return evaluate_risk(rho, values, probs);
}

Estimate spectral_risk(const RiskMeasure& rho, const std::vector<Stratum>& strata, int batches) {
    Estimate e;
    e.mean = weighted_risk(rho, strata, 0, 1);
    std::vector<double> batch_values;
    for (int b = 0; b < batches; ++b) {
        batch_values.push_back(weighted_risk(rho, strata, static_cast<std::size_t>(b),
                                             static_cast<std::size_t>(batches)));
    }
    e.std_error = std::sqrt(moments(batch_values).variance);
    return e;
}

}  // namespace

VerificationReport verify_solution(const ProblemSpec& spec, const Plan& plan, const VerifyOptions& opts) {
    if (!opts.seed) throw SeedMissing("Monte Carlo verification needs numerics.seed");
    if (!plan.claim) {
        throw ConfigError(std::string("cannot verify a ") + to_string(plan.classification) +
                          " plan: it carries no claim");
    }
    const auto min_paths = 4 * static_cast<std::size_t>(std::max(opts.batches, 2));
    if (opts.paths < min_paths || opts.batches < 2) {
        throw ConfigError("verification needs at least 2 batches and 4 paths per batch");
    }
    const auto& claim = *plan.claim;
    const auto& model = spec.density;
    const auto& u = spec.utility;

    // Stratify at the threshold: the loss region can be far too rare for
    // plain sampling (an epsilon-claim sits at q close to 1).
    const double alpha = model.tail_prob(claim.c);
    std::vector<Stratum> strata;
    std::vector<std::size_t> counts;
    if (alpha > 0 && alpha < 1) {
        const auto tail = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(alpha * static_cast<double>(opts.paths))),
            opts.paths / 10, opts.paths - opts.paths / 10);
        strata.push_back({1.0 - alpha, {}, {}, {}});
        strata.push_back({alpha, {}, {}, {}});
        counts = {opts.paths - tail, tail};
    } else {
        strata.push_back({1.0, {}, {}, {}});
        counts = {opts.paths};
    }

    std::mt19937_64 rng(*opts.seed);
    for (std::size_t k = 0; k < strata.size(); ++k) {
        auto& s = strata[k];
        s.price.reserve(counts[k]);
        s.value.reserve(counts[k]);
        s.loss.reserve(counts[k]);
        const bool upper = strata.size() == 2 && k == 1;
        for (std::size_t i = 0; i < counts[k]; ++i) {
            const double unit = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            const double xi = upper ? model.upper_quantile(alpha * unit)
                                    : model.quantile(strata.size() == 2 ? (1.0 - alpha) * unit : unit);
            const double x = claim(xi);
            s.price.push_back(xi * x);
            s.value.push_back(u.value(std::max(x, 0.0)));
            s.loss.push_back(std::min(x, 0.0));
        }
    }

    VerificationReport rep;
    rep.seed = *opts.seed;
    rep.paths = opts.paths;

    const auto mb = combined(strata, &Stratum::price);
    rep.budget = {mb.mean, std::sqrt(mb.variance), spec.x0(), false};
    rep.budget.pass = std::abs(rep.budget.mean - spec.x0()) <= 3.0 * rep.budget.std_error + opts.tol;

    const auto mv = combined(strata, &Stratum::value);
    rep.value = {mv.mean, std::sqrt(mv.variance), plan.value, false};
    rep.value.pass = std::abs(rep.value.mean - plan.value) <= 3.0 * rep.value.std_error + opts.tol;

    rep.risk = spec.risk.kind() == RiskMeasure::Kind::Entropic
                   ? entropic_risk(strata, spec.risk.beta())
                   : spectral_risk(spec.risk, strata, opts.batches);
    rep.risk.target = spec.rho0;
    rep.risk.pass = rep.risk.mean <= spec.rho0 + 3.0 * rep.risk.std_error + opts.tol;

    rep.pass = rep.budget.pass && rep.value.pass && rep.risk.pass;
    return rep;
}

}  // namespace guarantor
