#include "doctest.h"
#include "test_support.hpp"

#include "guarantor/density.hpp"
#include "guarantor/errors.hpp"
#include "guarantor/gains.hpp"
#include "guarantor/utility.hpp"

#include <cmath>
#include <vector>

using namespace guarantor;
namespace ts = testsupport;

namespace {

constexpr double kM = -0.0703125;
constexpr double kS = 0.375;

DensityModel base_model() { return DensityModel::lognormal(kM, kS); }
DensityModel two_state() { return DensityModel::discrete({{0.8, 0.5}, {1.2, 0.5}}); }

}  // namespace

TEST_CASE("zero budget sentinel") {
    const auto u = Utility::exponential(0.6);
    CHECK(std::isinf(solve_multiplier(base_model(), u, 1.0, 0.0)));
    const auto sol = solve_gains(base_model(), u, 1.0, 0.0);
    CHECK(sol.value == 0.0);
    CHECK(gains_cost(base_model(), u, 1.0, kInf) == 0.0);
    CHECK_THROWS_AS(solve_multiplier(base_model(), u, 1.0, -0.1), DomainError);
    CHECK_THROWS_AS(solve_multiplier(two_state(), u, 0.5, 0.1), DomainError);
}

TEST_CASE("two-state exponential closed form") {
    const auto d = two_state();
    const auto u = Utility::exponential(1.0);
    const double xlogx = 0.5 * (0.8 * std::log(0.8) + 1.2 * std::log(1.2));
    const double expected = std::exp(-1.0 - xlogx);
    CHECK(expected == doctest::Approx(0.36057).epsilon(1e-4));

    const double lambda = solve_multiplier(d, u, 1.2, 1.0);
    CHECK(lambda == doctest::Approx(expected).epsilon(1e-9));
    // Independent bisection on the explicit two-term budget.
    const double oracle = std::exp(ts::bisect_increasing(
        [&](double ll) {
            const double l = std::exp(ll);
            double cost = 0.0;
            for (double xi : {0.8, 1.2}) cost += 0.5 * xi * std::max(0.0, std::log(1.0 / (l * xi)));
            return 1.0 - cost;
        },
        -10, 10));
    CHECK(lambda == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(gains_value(d, u, 1.2, lambda) == doctest::Approx(1.0 - expected).epsilon(1e-9));
    CHECK(gains_value(d, u, 1.2, lambda) == doctest::Approx(0.63943).epsilon(1e-4));
}

TEST_CASE("value fixture on the lognormal") {
    const auto ln = base_model();
    const auto u = Utility::exponential(0.6);
    const double c = 2.72293;
    const double lambda = 0.0596571;
    const double v = gains_value(ln, u, c, lambda);
    CHECK(std::abs(v / 0.900134 - 1.0) < 2e-3);

    // Closed reduction u(I(y)) = (1 - y / delta)^+.
    const double top = std::min(c, 0.6 / lambda);
    const double reduced = (1.0 - ln.tail_prob(top)) - lambda / 0.6 * ln.head_price(top);
    CHECK(v == doctest::Approx(reduced).epsilon(1e-9));

    const double x_plus = gains_cost(ln, u, c, lambda);
    const double bound = value_bound(u, ln, lambda, x_plus);
    CHECK(bound >= v);
    // The reference value carries the same 2e-3 slack as the fixture itself.
    CHECK(bound >= 0.900134 * (1 - 2e-3));
    const double conj = ts::lognormal_mean_of([&](double xi) { return u.conjugate(lambda * xi); }, kM, kS);
    CHECK(bound == doctest::Approx(conj + lambda * x_plus).epsilon(1e-8));
}

TEST_CASE("budget identity and uniqueness") {
    const auto ln = base_model();
    for (const auto& u : {Utility::exponential(0.6), Utility::power(0.5), Utility::log_shifted(0.8)}) {
        for (double c : {0.4, 1.0, 2.72293}) {
            for (double x_plus : {0.05, 1.0, 2.6}) {
                const double lambda = solve_multiplier(ln, u, c, x_plus);
                const double cost = gains_cost(ln, u, c, lambda);
                CHECK(std::abs(cost - x_plus) <= 1e-8 * x_plus);
                const double up = gains_cost(ln, u, c, lambda * (1 + 1e-6)) - x_plus;
                const double down = gains_cost(ln, u, c, lambda * (1 - 1e-6)) - x_plus;
                CHECK(up < 0.0);
                CHECK(down > 0.0);
            }
        }
    }
}

TEST_CASE("value grows with the budget and stays under the envelope") {
    const auto ln = base_model();
    const auto u = Utility::exponential(0.6);
    for (double c : {0.5, 1.4, 3.0}) {
        CHECK(solve_gains(ln, u, c, 0.2).value > solve_gains(ln, u, c, 0.1).value);
        double prev = 0.0;
        for (double x_plus = 0.1; x_plus < 4.0; x_plus += 0.3) {
            const auto sol = solve_gains(ln, u, c, x_plus);
            // Far out the gain 1 - lambda xi / delta saturates in double precision.
            CHECK(sol.value >= prev);
            CHECK(sol.value <= value_bound(u, ln, sol.lambda, x_plus) * (1 + 1e-9));
            prev = sol.value;
        }
    }
}

TEST_CASE("value bound where the conjugate vanishes") {
    const auto u = Utility::exponential(1.0);
    CHECK(value_bound(u, two_state(), 1.25, 0.4) == doctest::Approx(1.25 * 0.4));
}

TEST_CASE("full-space solution matches the unconstrained static optimum") {
    const auto d = DensityModel::discrete({{0.6, 0.3}, {0.9, 0.3}, {1.5, 0.4}});
    const auto u = Utility::power(0.5);
    const double x0 = 0.8;
    const auto sol = solve_gains(d, u, d.esssup(), x0);
    // For power 1/2, I(y) = 1 / (4 y^2): budget sum p xi / (4 lambda^2 xi^2) = x0.
    double inv = 0.0;
    for (const auto& s : d.states()) inv += s.prob / s.xi;
    const double lambda = std::sqrt(inv / (4.0 * x0));
    CHECK(sol.lambda == doctest::Approx(lambda).epsilon(1e-9));
    double value = 0.0;
    for (const auto& s : d.states()) value += s.prob * std::sqrt(1.0 / (4 * lambda * lambda * s.xi * s.xi));
    CHECK(sol.value == doctest::Approx(value).epsilon(1e-9));
}
