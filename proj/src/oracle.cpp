#include "guarantor/oracle.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace guarantor {

namespace {

constexpr double kTieTol = 1e-13;

std::size_t state_count(const OracleInstance& inst) {
    if (inst.density.atomless()) throw ConfigError("the oracle needs a discrete density");
    const std::size_t n = inst.density.states().size();
    if (n > static_cast<std::size_t>(kOracleMaxStates)) {
        std::ostringstream os;
        os << "oracle enumeration is limited to " << kOracleMaxStates << " states, got " << n;
        throw BudgetExceeded(os.str());
    }
    return n;
}

bool in_set(std::uint32_t mask, std::size_t i) { return (mask >> i) & 1u; }

// Per-mask sums of p xi and p; index = bitmask over sorted states.
struct MaskSums {
    std::vector<double> price;
    std::vector<double> prob;

    explicit MaskSums(const std::vector<State>& states) {
        const std::size_t full = std::size_t{1} << states.size();
        price.assign(full, 0.0);
        prob.assign(full, 0.0);
        for (std::size_t m = 1; m < full; ++m) {
            const auto low = static_cast<std::size_t>(std::countr_zero(m));
            const std::size_t rest = m & (m - 1);
            price[m] = price[rest] + states[low].xi * states[low].prob;
            prob[m] = prob[rest] + states[low].prob;
        }
    }
};

// Spectral shortfall on B: a loss level t on a set S costs rho = t Phi(P(S))
// and saves t E[xi 1_S]; nested level sets add up (comonotone additivity),
// so one set S maximizing E[xi 1_S] / Phi(P(S)) carries the whole budget.
double spectral_ratio(const RiskMeasure& rho, const MaskSums& sums, std::size_t s) {
    return sums.price[s] / rho.phi_integral(std::min(1.0, sums.prob[s]));
}

DiscreteShortfall spectral_shortfall(const OracleInstance& inst, std::uint32_t b, std::uint32_t s_best) {
    const auto& states = inst.density.states();
    DiscreteShortfall out;
    out.y.assign(states.size(), 0.0);
    if (inst.rho0 == 0.0 || s_best == 0) return out;
    const double prob = std::accumulate(states.begin(), states.end(), 0.0, [&, i = 0u](double acc, const State& st) mutable {
        return acc + (in_set(s_best, i++) ? st.prob : 0.0);
    });
    const double level = inst.rho0 / inst.risk.phi_integral(std::min(1.0, prob));
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (in_set(s_best, i) && in_set(b, i)) {
            out.y[i] = -level;
            out.delta -= level * states[i].xi * states[i].prob;
        }
    }
    return out;
}

// Entropic shortfall on B in closed form: with the states of B sorted by
// decreasing xi, the active ones (beta xi > eta) form a prefix.
DiscreteShortfall entropic_shortfall(const OracleInstance& inst, std::uint32_t b) {
    const auto& states = inst.density.states();
    DiscreteShortfall out;
    out.y.assign(states.size(), 0.0);
    if (inst.rho0 == 0.0 || b == 0) return out;
    const double beta = inst.risk.beta();
    std::vector<std::size_t> idx;
    double prob_b = 0.0;
    for (std::size_t i = states.size(); i-- > 0;) {
        if (in_set(b, i)) {
            idx.push_back(i);
            prob_b += states[i].prob;
        }
    }
    const double rhs = std::expm1(inst.rho0 / beta) + prob_b;
    double price = 0.0;
    double taken = 0.0;
    double eta = -1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& st = states[idx[k]];
        price += st.prob * st.xi;
        taken += st.prob;
        const double candidate = beta * price / (rhs - (prob_b - taken));
        const bool inner = beta * st.xi >= candidate;
        const bool outer = k + 1 == idx.size() || beta * states[idx[k + 1]].xi <= candidate;
        if (inner && outer) {
            eta = candidate;
            break;
        }
    }
    if (!(eta > 0)) throw NonConvergent("no consistent active set for the entropic shortfall");
    for (std::size_t i : idx) {
        const double y = -beta * std::max(0.0, std::log(beta * states[i].xi / eta));
        out.y[i] = y;
        out.delta += states[i].prob * states[i].xi * y;
    }
    return out;
}

double p1_cost(const OracleInstance& inst, std::uint32_t mask, double log_lambda) {
    double cost = 0.0;
    const auto& states = inst.density.states();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!in_set(mask, i)) continue;
        cost += states[i].prob * states[i].xi *
                inst.utility.inverse_marginal_log(log_lambda + std::log(states[i].xi));
    }
    return cost;
}

// rho(-t L) = rho0 for the scale t of a loss direction L >= 0.
double loss_scale(const OracleInstance& inst, const std::vector<double>& loss) {
    const auto& states = inst.density.states();
    double mean_loss = 0.0;
    double top = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        mean_loss += states[i].prob * loss[i];
        top = std::max(top, loss[i]);
    }
    if (inst.rho0 == 0.0 || top == 0.0) return 0.0;
    if (inst.risk.kind() == RiskMeasure::Kind::Spectral) {
        std::vector<double> values(states.size());
        std::vector<double> probs(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) {
            values[i] = -loss[i];
            probs[i] = states[i].prob;
        }
        return inst.rho0 / evaluate_risk(inst.risk, values, probs);
    }
    // ln E[exp(t L / beta)] is convex and increasing in t; Newton from the
    // Jensen upper bound descends monotonically onto the root.
    const double beta = inst.risk.beta();
    double t = inst.rho0 / mean_loss;
    for (int it = 0; it < 100; ++it) {
        double sum = 0.0;
        double slope = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double w = states[i].prob * std::exp(t * (loss[i] - top) / beta);
            sum += w;
            slope += w * loss[i];
        }
        const double f = t * top / beta + std::log(sum) - inst.rho0 / beta;
        const double step = f / (slope / (beta * sum));
        t -= step;
        if (std::abs(step) <= 1e-15 * t) break;
    }
    return t;
}

struct Shaped {
    double value;
    std::vector<double> claim;
};

Shaped shape_claim(const OracleInstance& inst, const std::vector<double>& w) {
    const auto& states = inst.density.states();
    const std::size_t n = states.size();
    std::vector<double> loss(n);
    double gain_price = 0.0;
    double loss_price = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loss[i] = std::max(0.0, -w[i]);
        gain_price += states[i].prob * states[i].xi * std::max(0.0, w[i]);
        loss_price += states[i].prob * states[i].xi * loss[i];
    }
    const double t = loss_scale(inst, loss);
    Shaped out{0.0, std::vector<double>(n, 0.0)};
    const double a = gain_price > 0 ? (inst.x0 + t * loss_price) / gain_price : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.claim[i] = w[i] > 0 ? a * w[i] : -t * loss[i];
        out.value += states[i].prob * inst.utility.value(std::max(0.0, out.claim[i]));
    }
    return out;
}

double shaped_value(const OracleInstance& inst, const std::vector<double>& w) {
    return shape_claim(inst, w).value;
}

// Best value of coordinate i (or of the group of coordinates tied with it)
// along a coarse grid, tie candidates, and a golden refinement.
bool improve_coordinate(const OracleInstance& inst, std::vector<double>& w, double& f, std::size_t i,
                        bool group) {
    std::vector<std::size_t> members{i};
    if (group) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (j != i && w[j] == w[i]) members.push_back(j);
        }
        if (members.size() == 1) return false;
    }
    auto trial = [&](double t) {
        auto v = w;
        for (std::size_t j : members) v[j] = t;
        return shaped_value(inst, v);
    };
    double scale = 0.0;
    for (double x : w) scale = std::max(scale, std::abs(x));
    scale = std::max(scale, 1e-3);

    constexpr int kGrid = 40;
    const double h = 4.0 * scale / kGrid;
    double best_t = w[i];
    double best_f = f;
    auto consider = [&](double t) {
        const double v = trial(t);
        if (v > best_f) {
            best_f = v;
            best_t = t;
        }
    };
    for (int k = 0; k <= kGrid; ++k) consider(-2.0 * scale + k * h);
    consider(0.0);
    for (double x : w) consider(x);

    // Golden refinement around the incumbent.
    double lo = best_t - h;
    double hi = best_t + h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = trial(x1);
    double f2 = trial(x2);
    while (hi - lo > 1e-13 * scale) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = trial(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = trial(x1);
        }
    }
    if (f1 > best_f) {
        best_f = f1;
        best_t = x1;
    }
    if (f2 > best_f) {
        best_f = f2;
        best_t = x2;
    }
    if (!(best_f > f)) return false;
    for (std::size_t j : members) w[j] = best_t;
    f = best_f;
    return true;
}

}  // namespace

DiscreteShortfall solve_p2_discrete(const OracleInstance& inst, std::uint32_t complement) {
    const std::size_t n = state_count(inst);
    if (inst.risk.kind() == RiskMeasure::Kind::Entropic) return entropic_shortfall(inst, complement);
    const MaskSums sums(inst.density.states());
    std::uint32_t best = 0;
    double best_ratio = 0.0;
    // Every non-empty subset of the complement.
    for (std::uint32_t s = complement; s != 0; s = (s - 1) & complement) {
        const double r = spectral_ratio(inst.risk, sums, s);
        if (r > best_ratio) {
            best_ratio = r;
            best = s;
        }
    }
    (void)n;
    return spectral_shortfall(inst, complement, best);
}

double solve_p1_discrete(const OracleInstance& inst, std::uint32_t mask, double x_plus, double& value) {
    value = 0.0;
    if (x_plus < 0) throw DomainError("negative gains budget");
    if (x_plus == 0.0 || mask == 0) return kInf;
    auto residual = [&](double ll) { return p1_cost(inst, mask, ll) - x_plus; };
    double lo = -1.0;
    double hi = 1.0;
    while (residual(lo) < 0) lo *= 2.0;
    while (residual(hi) > 0) hi *= 2.0;
    for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0 ? lo : hi) = mid;
    }
    const double log_lambda = 0.5 * (lo + hi);
    const auto& states = inst.density.states();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!in_set(mask, i)) continue;
        const double gain = inst.utility.inverse_marginal_log(log_lambda + std::log(states[i].xi));
        value += states[i].prob * inst.utility.value(gain);
    }
    return log_lambda;
}

OracleResult enumerate_solve(const OracleInstance& inst) {
    const std::size_t n = state_count(inst);
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    const auto& states = inst.density.states();

    // best_sub[B]: subset of B with the largest spectral ratio, by a
    // subset-max sweep over masks.
    std::vector<std::uint32_t> best_sub;
    MaskSums sums(states);
    if (inst.risk.kind() == RiskMeasure::Kind::Spectral) {
        best_sub.assign(std::size_t{full} + 1, 0);
        std::vector<double> best_ratio(std::size_t{full} + 1, 0.0);
        for (std::uint32_t m = 1; m <= full; ++m) {
            best_ratio[m] = spectral_ratio(inst.risk, sums, m);
            best_sub[m] = m;
            for (std::size_t i = 0; i < n; ++i) {
                if (!in_set(m, i)) continue;
                const std::uint32_t r = m & ~(std::uint32_t{1} << i);
                if (best_ratio[r] > best_ratio[m]) {
                    best_ratio[m] = best_ratio[r];
                    best_sub[m] = best_sub[r];
                }
            }
        }
    }

    OracleResult res;
    res.table.resize(std::size_t{full} + 1);
    res.best_value = -kInf;
    res.best_lower_value = -kInf;
    // Walk from the full set down so near-ties resolve toward larger sets.
    for (std::uint32_t mask = full + 1; mask-- > 0;) {
        const std::uint32_t b = full & ~mask;
        const auto p2 = inst.risk.kind() == RiskMeasure::Kind::Entropic
                            ? entropic_shortfall(inst, b)
                            : spectral_shortfall(inst, b, best_sub[b]);
        SubsetRow row;
        row.mask = mask;
        row.delta = p2.delta;
        row.x_plus = inst.x0 - p2.delta;
        row.log_lambda = solve_p1_discrete(inst, mask, row.x_plus, row.value);
        res.table[mask] = row;
        if (row.value > res.best_value + kTieTol) {
            res.best_value = row.value;
            res.best_mask = mask;
        }
    }
    for (std::size_t k = n + 1; k-- > 0;) {
        const std::uint32_t mask = (std::uint32_t{1} << k) - 1;
        if (res.table[mask].value > res.best_lower_value + kTieTol) {
            res.best_lower_value = res.table[mask].value;
            res.best_lower_mask = mask;
        }
    }
    res.lower_set_gap = res.best_value - res.best_lower_value;
    return res;
}

std::vector<double> reconstruct_claim(const OracleInstance& inst, const OracleResult& result) {
    const std::size_t n = state_count(inst);
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    const std::uint32_t mask = result.best_mask;
    const auto p2 = solve_p2_discrete(inst, full & ~mask);
    double value = 0.0;
    const double log_lambda = solve_p1_discrete(inst, mask, inst.x0 - p2.delta, value);
    const auto& states = inst.density.states();
    std::vector<double> claim(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (in_set(mask, i)) {
            claim[i] = log_lambda == kInf
                           ? 0.0
                           : inst.utility.inverse_marginal_log(log_lambda + std::log(states[i].xi));
        } else {
            claim[i] = p2.y[i];
        }
    }
    return claim;
}

ClaimEvaluation evaluate_claim(const OracleInstance& inst, const std::vector<double>& claim) {
    const auto& states = inst.density.states();
    if (claim.size() != states.size()) throw DomainError("claim length does not match the states");
    ClaimEvaluation ev{0.0, 0.0, 0.0};
    std::vector<double> losses(states.size());
    std::vector<double> probs(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        ev.budget += states[i].prob * states[i].xi * claim[i];
        ev.value += states[i].prob * inst.utility.value(std::max(0.0, claim[i]));
        losses[i] = std::min(0.0, claim[i]);
        probs[i] = states[i].prob;
    }
    ev.risk = evaluate_risk(inst.risk, losses, probs);
    return ev;
}

DirectSearchResult direct_search(const OracleInstance& inst, const DirectSearchOptions& opts) {
    const std::size_t n = state_count(inst);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DirectSearchResult best;
    best.value = -kInf;
    for (int start = 0; start < opts.starts; ++start) {
        std::vector<double> w(n);
        for (auto& x : w) x = normal(rng);
        double f = shaped_value(inst, w);
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            const double before = f;
            for (std::size_t i = 0; i < n; ++i) {
                improve_coordinate(inst, w, f, i, false);
                improve_coordinate(inst, w, f, i, true);
            }
            // The value is invariant under w -> t w; keep w at unit scale.
            double scale = 0.0;
            for (double x : w) scale = std::max(scale, std::abs(x));
            if (scale > 0) {
                for (auto& x : w) x /= scale;
            }
            if (!(f > before + 1e-15)) break;
        }
        if (f > best.value) {
            best.value = f;
            best.claim = shape_claim(inst, w).claim;
        }
    }
    return best;
}

RearrangementCertificate rearrangement_check(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw DomainError("rearrangement check needs two non-empty samples of equal length");
    }
    if (a.size() > 8) throw BudgetExceeded("rearrangement check enumerates at most 8! couplings");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size());
    RearrangementCertificate cert{0.0, -kInf, kInf, false};
    for (std::size_t k = 0; k < a.size(); ++k) cert.comonotone += a[k] * b[k] / n;
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[perm[k]] / n;
        cert.best = std::max(cert.best, s);
        cert.worst = std::min(cert.worst, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    cert.holds = cert.comonotone >= cert.best - 1e-12 * std::max(1.0, std::abs(cert.best));
    return cert;
}

DensityModel discretize_lognormal(double log_mean, double log_std, int n) {
    if (n < 1) throw ConfigError("discretization needs at least one cell");
    std::vector<State> states;
    states.reserve(static_cast<std::size_t>(n));
    const double scale = std::exp(log_mean + 0.5 * log_std * log_std);
    // Cell k spans normal quantiles [z_k, z_{k+1}]; its conditional mean is
    // scale * (Phi(z_{k+1} - s) - Phi(z_k - s)) * n.
    for (int k = 0; k < n; ++k) {
        const double lo = k == 0 ? -kInf : numerics::normal_quantile(static_cast<double>(k) / n);
        const double hi = k == n - 1 ? kInf : numerics::normal_quantile(static_cast<double>(k + 1) / n);
        const double a = std::isinf(lo) ? 0.0 : numerics::normal_cdf(lo - log_std);
        const double b = std::isinf(hi) ? 1.0 : numerics::normal_cdf(hi - log_std);
        states.push_back({scale * (b - a) * n, 1.0 / n});
    }
    return DensityModel::discrete(std::move(states));
}

}  // namespace guarantor
