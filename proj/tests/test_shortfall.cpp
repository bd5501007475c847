#include "doctest.h"
#include "test_support.hpp"

#include "guarantor/density.hpp"
#include "guarantor/errors.hpp"
#include "guarantor/risk_measure.hpp"
#include "guarantor/shortfall.hpp"

#include <cmath>
#include <vector>

using namespace guarantor;
namespace ts = testsupport;

namespace {

constexpr double kM = -0.0703125;
constexpr double kS = 0.375;

DensityModel base_model() { return DensityModel::lognormal(kM, kS); }

// Quantile function of Y*: the largest xi carry the largest losses.
QuantileFunction loss_quantile(const DensityModel& model, const ShortfallSolution& sol) {
    return {[&model, sol](double u) {
                if (u >= sol.alpha) return 0.0;
                return sol.loss(model.upper_quantile(u));
            },
            {sol.alpha}};
}

}  // namespace

TEST_CASE("zero budget gives the zero shortfall") {
    const auto ln = base_model();
    for (double c : {0.5, 1.0, 3.0}) {
        const auto e = solve_entropic(ln, 1.0, 0.0, c);
        CHECK(e.delta == 0.0);
        CHECK(e.loss(5.0) == 0.0);
        const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
        const auto s = solve_spectral(tr, RiskMeasure::cvar(0.5), 0.0, std::min(c, 2.0));
        CHECK(s.delta == 0.0);
        CHECK(s.delta_envelope == 0.0);
        CHECK(s.loss(2.5) == 0.0);
    }
}

TEST_CASE("entropic two-state hand computation") {
    const auto d = DensityModel::discrete({{0.5, 0.5}, {2.0, 0.5}});
    const auto sol = solve_entropic(d, 1.0, std::log(2.0), 1.0);
    CHECK(sol.eta == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(sol.delta == doctest::Approx(-std::log(3.0)).epsilon(1e-10));
    CHECK(sol.loss(2.0) == doctest::Approx(-std::log(3.0)).epsilon(1e-10));

    // Grid over the loss y <= 0 on the high state.
    double best = 0.0;
    for (int i = 0; i <= 400000; ++i) {
        const double y = -i * 1e-5;
        const std::vector<double> values{0.0, y};
        const std::vector<double> probs{0.5, 0.5};
        if (evaluate_risk(RiskMeasure::entropic(1.0), values, probs) <= std::log(2.0) + 1e-12) {
            best = std::min(best, 0.5 * 2.0 * y);
        }
    }
    CHECK(std::abs(best - sol.delta) < 2e-5);
}

TEST_CASE("entropic shortfall on the lognormal") {
    const auto ln = base_model();
    for (double c : {0.3, 1.0, 1.4367, 2.72293}) {
        for (double beta : {0.5, 1.0}) {
            const double rho0 = 1.5;
            const auto sol = solve_entropic(ln, beta, rho0, c);
            CHECK(sol.delta < 0.0);
            // Defining equation of eta.
            const double lhs = ln.expect([&](double xi) { return std::max(beta * xi / sol.eta, 1.0); },
                                         {c, kInf}, std::vector<double>{sol.eta / beta});
            CHECK(lhs == doctest::Approx(std::exp(rho0 / beta) + sol.alpha - 1.0).epsilon(1e-8));
            // Budget identity.
            const double price = ln.expect([&](double xi) { return xi * sol.loss(xi); }, {c, kInf},
                                           std::vector<double>{sol.eta / beta});
            CHECK(std::abs(price - sol.delta) < 1e-6);
            // Constraint activity.
            const double risk = evaluate_risk(RiskMeasure::entropic(beta), loss_quantile(ln, sol));
            CHECK(std::abs(risk - rho0) < 1e-6);
        }
    }
}

TEST_CASE("entropic shortfall is nonincreasing in the budget") {
    const auto ln = base_model();
    for (double c : {0.5, 1.5}) {
        double prev = 0.0;
        for (double rho0 = 0.1; rho0 < 3.0; rho0 += 0.2) {
            const double d = solve_entropic(ln, 1.0, rho0, c).delta;
            CHECK(d <= prev + 1e-12);
            prev = d;
        }
    }
}

TEST_CASE("spectral two-state hand computation") {
    const auto d = DensityModel::discrete({{0.8, 0.5}, {1.2, 0.5}});
    const auto sol = solve_spectral(d, RiskMeasure::cvar(0.5), 0.1, 1.0);
    CHECK(sol.alpha == 0.5);
    CHECK(sol.level == doctest::Approx(0.1));
    CHECK(sol.delta == doctest::Approx(-0.06));
    CHECK(sol.loss(1.2) == doctest::Approx(-0.1));
    CHECK(sol.loss(0.8) == 0.0);
    CHECK(solve_shortfall(d, RiskMeasure::cvar(0.5), 0.1, 1.0).delta == doctest::Approx(-0.06));
}

TEST_CASE("CVaR closed form below the level") {
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0, true);
    const double beta = 0.5;
    for (double c : {1.2, 1.5, 2.5}) {
        const auto sol = solve_spectral(tr, RiskMeasure::cvar(beta), 0.7, c);
        REQUIRE(sol.alpha <= beta);
        CHECK(sol.delta == doctest::Approx(-0.7 * beta * tr.tail_price(c) / sol.alpha).epsilon(1e-12));
    }
}

TEST_CASE("existence limit") {
    CHECK(std::isinf(existence_limit(base_model(), RiskMeasure::cvar(0.5))));
    CHECK(existence_limit(DensityModel::discrete({{0.8, 0.5}, {1.2, 0.5}}), RiskMeasure::cvar(0.5)) ==
          doctest::Approx(0.6));
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
    CHECK(existence_limit(tr, RiskMeasure::spectral({{0.5, 0.25}, {0.5, 1.0}})) == doctest::Approx(1.2));
    CHECK_THROWS_AS(existence_limit(tr, RiskMeasure::entropic(1.0)), DomainError);

    const auto unb = solve_spectral(base_model(), RiskMeasure::cvar(0.5), 1.0, 1.0);
    CHECK(unb.status == ShortfallSolution::Status::MinusInfinity);
    CHECK(std::isinf(unb.delta));
}

TEST_CASE("spectral envelope ordering, linearity and activity") {
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0, true);
    const std::vector<RiskMeasure> measures{RiskMeasure::cvar(0.5), RiskMeasure::cvar(0.05),
                                            RiskMeasure::spectral({{0.5, 0.25}, {0.5, 1.0}})};
    for (const auto& rho : measures) {
        // Global max of R over [0, 1] on a fine grid.
        double global = 0.0;
        for (int i = 0; i <= 4000; ++i) global = std::max(global, shortfall_ratio(tr, rho, i / 4000.0));
        for (double c : {0.2, 0.8, 1.3, 2.0, 2.9}) {
            const auto one = solve_spectral(tr, rho, 1.0, c);
            const auto two = solve_spectral(tr, rho, 2.0, c);
            CHECK(one.delta >= one.delta_envelope);
            CHECK(one.delta_envelope >= -global * (1 + 1e-7));
            CHECK(two.delta == doctest::Approx(2.0 * one.delta).epsilon(1e-14));
            CHECK(two.delta_envelope == doctest::Approx(2.0 * one.delta_envelope).epsilon(1e-12));

            const double price =
                tr.expect([&](double xi) { return xi * one.loss(xi); }, {c, kInf});
            CHECK(std::abs(price - one.delta) < 1e-6);
            const double risk = evaluate_risk(rho, loss_quantile(tr, one));
            CHECK(std::abs(risk - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("shortfall ratio at zero is the limit value") {
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
    const auto rho = RiskMeasure::cvar(0.5);
    CHECK(shortfall_ratio(tr, rho, 0.0) == doctest::Approx(3.0 * 0.5).epsilon(1e-8));
    CHECK(shortfall_ratio(tr, rho, 1e-6) == doctest::Approx(shortfall_ratio(tr, rho, 0.0)).epsilon(1e-4));
}

TEST_CASE("empty tail is infeasible") {
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
    CHECK_THROWS_AS(solve_spectral(tr, RiskMeasure::cvar(0.5), 1.0, 3.0), InfeasibleTail);
    const auto d = DensityModel::discrete({{0.8, 0.5}, {1.2, 0.5}});
    CHECK_THROWS_AS(solve_entropic(d, 1.0, 1.0, 1.2), InfeasibleTail);
    CHECK_THROWS_AS(solve_entropic(d, 1.0, -1.0, 1.0), DomainError);
}
