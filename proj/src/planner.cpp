#include "guarantor/planner.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace guarantor {

namespace {

constexpr double kCheckTol = 1e-6;
constexpr double kLocalStep = 1e-3;
constexpr int kBoundaryCells = 2;

struct Threshold {
    GridPoint point;
    ShortfallSolution shortfall;
};

// Re-raises numerical failures with the offending threshold attached.
template <class F>
auto at_threshold(double c, F&& body) {
    auto where = [c](const std::exception& e) {
        std::ostringstream os;
        os << e.what() << " (at c = " << c << ")";
        return os.str();
    };
    try {
        return body();
    } catch (const NonConvergent& e) {
        throw NonConvergent(where(e));
    } catch (const BracketFailure& e) {
        throw BracketFailure(where(e));
    }
}

Threshold threshold_at(const ProblemSpec& spec, double q) {
    const double c = spec.density.quantile(q);
    return at_threshold(c, [&] {
        const auto quad = spec.numerics.quadrature();
        Threshold t{{}, solve_shortfall(spec.density, spec.risk, spec.rho0, c, quad)};
        const double x_plus = spec.x0() - t.shortfall.delta;
        const auto gains =
            solve_gains(spec.density, spec.utility, c, x_plus, quad, spec.numerics.root_tol);
        t.point = {q, c, t.shortfall.delta, x_plus, gains.log_lambda, gains.value};
        return t;
    });
}

std::vector<GridPoint> evaluate_grid(const ProblemSpec& spec) {
    const auto& num = spec.numerics;
    const int n = num.grid_points;
    std::vector<GridPoint> grid(static_cast<std::size_t>(n));
    const double h = (num.q_max - num.q_min) / (n - 1);

    unsigned workers = num.threads ? num.threads : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(n));

    std::atomic<int> next{0};
    std::mutex failure_mutex;
    int failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                const double q = i == n - 1 ? num.q_max : num.q_min + i * h;
                grid[static_cast<std::size_t>(i)] = threshold_at(spec, q).point;
            } catch (...) {
                // Keep the lowest failing index so the report is deterministic.
                std::lock_guard lock(failure_mutex);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return grid;
}

double utility_supremum(const Utility& u) {
    return u.kind() == Utility::Kind::Exponential ? 1.0 : kInf;
}

// Limit of v(c) as c -> esssup: the gains problem on the whole space with
// the limiting subsidy (0 for entropic, rho0 L0 for spectral).
double boundary_limit(const ProblemSpec& spec, double existence) {
    const double subsidy = spec.risk.kind() == RiskMeasure::Kind::Entropic ? 0.0 : spec.rho0 * existence;
    const double x_plus = spec.x0() + subsidy;
    if (x_plus == 0.0) return 0.0;
    return solve_gains(spec.density, spec.utility, spec.density.esssup(), x_plus,
                       spec.numerics.quadrature(), spec.numerics.root_tol)
        .value;
}

void adopt(Plan& plan, const ProblemSpec& spec, const Threshold& t) {
    plan.c_star = t.point.c;
    plan.q_star = t.point.q;
    plan.log_lambda_star = t.point.log_lambda;
    plan.lambda_star = std::exp(t.point.log_lambda);
    plan.x_plus = t.point.x_plus;
    plan.value = t.point.value;
    plan.shortfall = t.shortfall;
    plan.claim = Claim{t.point.c, t.point.log_lambda, spec.utility, t.shortfall};
}

void finish(Plan& plan, const ProblemSpec& spec) {
    plan.checks = check_claim(spec, *plan.claim, plan.value);
    const bool bs_shape = spec.market && spec.utility.kind() == Utility::Kind::Exponential &&
                          spec.risk.kind() == RiskMeasure::Kind::Entropic &&
                          spec.density.kind() == DensityModel::Kind::Lognormal;
    if (bs_shape && std::isfinite(plan.c_star) && plan.lambda_star > 0 &&
        std::isfinite(plan.shortfall.eta)) {
        plan.bs = bs_constants(*spec.market, spec.utility.parameter(), spec.risk.beta(), plan.c_star,
                               plan.lambda_star, plan.shortfall.eta);
    }
}

}  // namespace

const char* to_string(Plan::Classification c) {
    switch (c) {
        case Plan::Classification::Optimal: return "OPTIMAL";
        case Plan::Classification::NoOptimum: return "NO_OPTIMUM";
        case Plan::Classification::Unbounded: return "UNBOUNDED";
    }
    return "UNKNOWN";
}

void validate(const ProblemSpec& spec) {
    if (!std::isfinite(spec.v0) || !std::isfinite(spec.guarantee)) {
        throw ConfigError("v0 and guarantee must be finite");
    }
    if (spec.guarantee > spec.v0) {
        std::ostringstream os;
        os << "guarantee " << spec.guarantee << " exceeds initial value " << spec.v0
           << " (direct arbitrage)";
        throw ConfigError(os.str());
    }
    if (!(spec.rho0 >= 0) || !std::isfinite(spec.rho0)) {
        throw ConfigError("risk budget rho0 must be finite and nonnegative");
    }
    const auto& num = spec.numerics;
    if (num.grid_points < 3) throw ConfigError("numerics.grid_points must be at least 3");
    if (!(num.q_min > 0 && num.q_min < num.q_max && num.q_max < 1)) {
        throw ConfigError("numerics needs 0 < q_min < q_max < 1");
    }
    if (!(num.q_tol > 0) || !(num.expect_tol > 0) || !(num.root_tol > 0)) {
        throw ConfigError("numerics tolerances must be positive");
    }
    check_conjugate_integrability(spec.utility, spec.density);
    if (spec.risk.kind() == RiskMeasure::Kind::Entropic) {
        const auto penalty = penalty_at_density(spec.risk, spec.density);
        if (!std::isfinite(penalty.value)) {
            throw ConfigError("entropic risk needs E[xi ln xi] < infinity");
        }
    }
}

double Claim::operator()(double xi) const {
    if (xi <= c) {
        return log_lambda == kInf ? 0.0 : utility.inverse_marginal_log(log_lambda + std::log(xi));
    }
    return shortfall.loss(xi);
}

std::vector<double> Claim::breakpoints() const {
    std::vector<double> out;
    if (std::isfinite(c)) out.push_back(c);
    if (std::isfinite(log_lambda) && std::isfinite(utility.marginal_at_zero())) {
        const double kink = std::exp(std::log(utility.marginal_at_zero()) - log_lambda);
        if (std::isfinite(kink) && kink > 0) out.push_back(kink);
    }
    if (shortfall.kind == RiskMeasure::Kind::Entropic && std::isfinite(shortfall.eta)) {
        out.push_back(shortfall.eta / shortfall.beta);
    }
    std::sort(out.begin(), out.end());
    return out;
}

GridPoint evaluate_threshold(const ProblemSpec& spec, double q) { return threshold_at(spec, q).point; }

Benchmark no_risk_benchmark(const ProblemSpec& spec) {
    const double x0 = spec.x0();
    if (x0 == 0.0) return {0.0, kInf};
    const auto gains = solve_gains(spec.density, spec.utility, spec.density.esssup(), x0,
                                   spec.numerics.quadrature(), spec.numerics.root_tol);
    return {gains.value, gains.log_lambda};
}

PlanChecks check_claim(const ProblemSpec& spec, const Claim& claim, double expected_value) {
    const auto quad = spec.numerics.quadrature();
    const auto breaks = claim.breakpoints();
    const auto& model = spec.density;
    const auto& u = spec.utility;

    PlanChecks ch;
    ch.computed = true;
    ch.budget = model.expect([&](double xi) { return xi * claim(xi); }, {}, breaks, quad);
    ch.value = model.expect([&](double xi) { return u.value(std::max(claim(xi), 0.0)); }, {}, breaks,
                            quad);
    // The loss is nonincreasing in xi, so its quantile at u sits at the upper
    // xi-quantile of u.
    const double alpha = model.tail_prob(claim.c);
    QuantileFunction q{[&](double p) { return std::min(claim(model.upper_quantile(p)), 0.0); }, {}};
    if (alpha > 0 && alpha < 1) q.jumps.push_back(alpha);
    ch.risk = evaluate_risk(spec.risk, q, quad);

    ch.budget_ok = ch.budget <= spec.x0() + kCheckTol;
    ch.risk_ok = ch.risk <= spec.rho0 + kCheckTol;
    ch.value_ok = std::abs(ch.value - expected_value) <= kCheckTol;
    return ch;
}

Plan solve(const ProblemSpec& spec) {
    validate(spec);
    if (!spec.density.atomless()) {
        throw ConfigError(
            "threshold search needs an atomless density; solve discrete markets with the oracle");
    }
    const auto& num = spec.numerics;
    Plan plan;
    plan.x0 = spec.x0();
    plan.penalty = penalty_at_density(spec.risk, spec.density);
    const bool spectral = spec.risk.kind() == RiskMeasure::Kind::Spectral;
    if (spectral) plan.existence_limit = existence_limit(spec.density, spec.risk);
    plan.benchmark_value = no_risk_benchmark(spec).value;

    if (spec.rho0 == 0.0) {
        const double top = spec.density.esssup();
        const auto gains = solve_gains(spec.density, spec.utility, top, plan.x0, num.quadrature(),
                                       num.root_tol);
        Threshold t{{1.0, top, 0.0, plan.x0, gains.log_lambda, gains.value},
                    solve_shortfall(spec.density, spec.risk, 0.0, top)};
        adopt(plan, spec, t);
        plan.v_sup = plan.value;
        plan.reason = "zero risk budget: no shortfall allowed";
        finish(plan, spec);
        return plan;
    }

    if (spectral && std::isinf(plan.existence_limit)) {
        plan.classification = Plan::Classification::Unbounded;
        plan.reason = "existence limit infinite";
        plan.c_star = spec.density.esssup();
        plan.q_star = 1.0;
        plan.shortfall = solve_spectral(spec.density, spec.risk, spec.rho0,
                                        spec.density.quantile(num.q_max));
        plan.value = utility_supremum(spec.utility);
        plan.v_sup = plan.value;
        return plan;
    }

    plan.grid = evaluate_grid(spec);
    const int n = num.grid_points;
    int best = 0;
    for (int i = 1; i < n; ++i) {
        if (plan.grid[i].value > plan.grid[best].value) best = i;  // ties keep the smaller q
    }
    const double lo = plan.grid[std::max(0, best - 1)].q;
    const double hi = plan.grid[std::min(n - 1, best + 1)].q;
    const auto refined = numerics::golden_section_max(
        [&](double q) { return threshold_at(spec, q).point.value; }, lo, hi, num.q_tol);
    const double q_best = refined.value > plan.grid[best].value ? refined.x : plan.grid[best].q;
    const Threshold at_best = threshold_at(spec, q_best);

    plan.v_sup = boundary_limit(spec, spectral ? plan.existence_limit : 0.0);
    const bool pinned = best >= n - 1 - kBoundaryCells;

    if (spectral && (pinned || plan.v_sup > at_best.point.value)) {
        const Threshold edge = threshold_at(spec, num.q_max);
        plan.classification = Plan::Classification::NoOptimum;
        plan.reason = pinned ? "maximizer pinned at q_max; supremum approached as c -> esssup"
                             : "boundary limit exceeds the interior maximum";
        adopt(plan, spec, edge);
        plan.epsilon = std::max(0.0, plan.v_sup - plan.value);
        finish(plan, spec);
        return plan;
    }

    adopt(plan, spec, at_best);
    if (pinned) {
        plan.warnings.push_back("maximizer within " + std::to_string(kBoundaryCells) +
                                " grid cells of q_max");
    }
    plan.local_left = threshold_at(spec, std::max(num.q_min, q_best - kLocalStep)).point.value;
    plan.local_right = threshold_at(spec, std::min(num.q_max, q_best + kLocalStep)).point.value;
    finish(plan, spec);
    return plan;
}

BsConstants bs_constants(const BlackScholesMarket& m, double delta, double beta, double c,
                         double lambda, double eta) {
    if (!(c > 0) || !(lambda > 0) || !(eta > 0) || !(delta > 0) || !(beta > 0)) {
        throw ConfigError("payoff constants need positive c, lambda, eta, delta and beta");
    }
    const double b = m.drift;
    const double s2 = m.vol * m.vol;
    const double T = m.maturity;
    const double L = b / s2;
    const double drift_term = b * (s2 - b) * T / (2.0 * s2);
    BsConstants k;
    k.L = L;
    k.s_star = m.s0 * std::exp(T * (b - s2) / 2.0) * std::pow(c, -s2 / b);
    k.K1 = (drift_term - L * std::log(m.s0) - std::log(lambda / delta)) / delta;
    k.K2 = L * std::log(m.s0) - drift_term + std::log(beta / eta);
    return k;
}

double bs_payoff(const BsConstants& k, double delta, double beta, double s_t) {
    const double log_s = std::log(s_t);
    if (s_t >= k.s_star) return std::max(0.0, k.L / delta * log_s + k.K1);
    return -beta * std::max(0.0, k.K2 - k.L * log_s);
}

std::vector<PayoffPoint> payoff_curve(const ProblemSpec& spec, const Plan& plan,
                                      const std::vector<double>& points) {
    if (!plan.claim) throw ConfigError("plan carries no claim to sample");
    std::vector<PayoffPoint> out;
    out.reserve(points.size());
    for (double x : points) {
        const double xi = spec.market ? spec.market->xi_of_price(x) : x;
        const double value = (*plan.claim)(xi);
        out.push_back({x, value, spec.guarantee + std::max(value, 0.0)});
    }
    return out;
}

std::vector<double> default_payoff_grid(const ProblemSpec& spec, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = 0.001 + 0.998 * i / (n - 1);
        const double xi = spec.density.quantile(u);
        out.push_back(spec.market ? spec.market->price_of_xi(xi) : xi);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace guarantor
