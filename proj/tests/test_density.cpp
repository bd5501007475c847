#include "doctest.h"
#include "test_support.hpp"

#include "guarantor/density.hpp"
#include "guarantor/errors.hpp"

#include <cmath>
#include <random>

using namespace guarantor;
namespace ts = testsupport;

namespace {

constexpr double kM = -0.0703125;
constexpr double kS = 0.375;

DensityModel base_model() { return DensityModel::lognormal(kM, kS); }
DensityModel two_state() { return DensityModel::discrete({{1.2, 0.5}, {0.8, 0.5}}); }

}  // namespace

TEST_CASE("cdf") {
    const auto ln = base_model();
    CHECK(ln.cdf(1e300) == doctest::Approx(1.0));
    CHECK(ln.cdf(0.0) == 0.0);
    CHECK(ln.cdf(-1.0) == 0.0);
    CHECK(two_state().cdf(1.0) == 0.5);
    CHECK(two_state().cdf(1.2) == 1.0);
    CHECK(two_state().cdf(0.79) == 0.0);

    const double median = std::exp(kM);
    CHECK(median == doctest::Approx(0.93213).epsilon(1e-4));
    CHECK(ln.cdf(median) == doctest::Approx(0.5).epsilon(1e-14));
    // The density integrated on the xi scale, no change of variables.
    const double pdf_mass = ts::simpson(
        [](double x) {
            if (x <= 0) return 0.0;
            const double z = (std::log(x) - kM) / kS;
            return ts::normal_pdf(z) / (kS * x);
        },
        1e-12, median, 200000);
    CHECK(pdf_mass == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("quantile") {
    const auto ln = base_model();
    CHECK(ln.quantile(0.0) == 0.0);
    CHECK(std::isinf(ln.quantile(1.0)));
    CHECK(two_state().quantile(0.0) == 0.8);
    CHECK(two_state().quantile(0.7) == 1.2);
    CHECK(two_state().quantile(0.5) == 0.8);
    CHECK(two_state().quantile(1.0) == 1.2);

    const double oracle = ts::bisect_increasing([&](double x) { return ln.cdf(x) - 0.5; }, 0.01, 10.0);
    CHECK(ln.quantile(0.5) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(ln.quantile(0.5) == doctest::Approx(std::exp(kM)).epsilon(1e-13));

    CHECK_THROWS_AS(ln.quantile(-0.1), DomainError);
    CHECK_THROWS_AS(ln.quantile(1.1), DomainError);
    CHECK_THROWS_AS(two_state().quantile(NAN), DomainError);
}

TEST_CASE("quantile and cdf round trips") {
    const auto ln = base_model();
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
    for (double u = 0.001; u < 1.0; u += 0.0137) {
        CHECK(ln.cdf(ln.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
        CHECK(tr.cdf(tr.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
    }
    const auto d = DensityModel::discrete({{0.5, 0.2}, {0.9, 0.3}, {1.4, 0.4}, {2.5, 0.1}});
    for (double x = 0.5; x < 3.0; x += 0.07) CHECK(d.quantile(d.cdf(x)) <= x);
}

TEST_CASE("expect") {
    const auto ln = base_model();
    CHECK(ln.expect([](double xi) { return xi; }) == doctest::Approx(1.0).epsilon(1e-9));
    for (double c : {0.3, 0.9, 1.7}) {
        CHECK(ln.expect([](double) { return 1.0; }, {c, kInf}) ==
              doctest::Approx(1.0 - ln.cdf(c)).epsilon(1e-9));
    }
    const double xlogx = ln.expect([](double xi) { return xi * std::log(xi); });
    CHECK(xlogx == doctest::Approx(kM + kS * kS).epsilon(1e-9));
    CHECK(kM + kS * kS == doctest::Approx(0.0703125));
    CHECK(ts::lognormal_mean_of([](double xi) { return xi * std::log(xi); }, kM, kS) ==
          doctest::Approx(xlogx).epsilon(1e-9));

    const auto d = two_state();
    CHECK(d.expect([](double xi) { return xi * xi; }) == doctest::Approx(0.5 * (0.64 + 1.44)));
    CHECK(d.expect([](double xi) { return xi; }, {0.8, 1.2}) == doctest::Approx(0.6));
}

TEST_CASE("expect is additive over a split") {
    const auto ln = base_model();
    const std::function<double(double)> gs[] = {[](double) { return 1.0; }, [](double x) { return x; },
                                                [](double x) { return x * std::log(x); }};
    for (const auto& g : gs) {
        for (double c : {0.2, 1.0, 2.72293}) {
            const double whole = ln.expect(g);
            const double split = ln.expect(g, {0.0, c}) + ln.expect(g, {c, kInf});
            CHECK(split == doctest::Approx(whole).epsilon(2e-9).scale(1.0));
        }
    }
}

TEST_CASE("tail price") {
    const auto ln = base_model();
    CHECK(ln.tail_price(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two_state().tail_price(1.0) == doctest::Approx(0.6));
    const auto tr = DensityModel::truncated_lognormal(kM, kS, 3.0);
    CHECK(tr.tail_price(3.0) == 0.0);
    CHECK(tr.tail_price(5.0) == 0.0);

    double prev = ln.tail_price(0.0);
    for (double c = 0.0; c < 6.0; c += 0.01) {
        const double t = ln.tail_price(c);
        CHECK(t <= prev);
        CHECK(prev - t < 0.02);  // slope c f(c) stays below 2 on this range
        prev = t;
    }
    for (double c : {0.4, 0.93, 2.0}) {
        CHECK(ln.tail_price(c) == doctest::Approx(ln.expect([](double x) { return x; }, {c, kInf})).epsilon(1e-9));
        CHECK(tr.tail_price(c) == doctest::Approx(tr.expect([](double x) { return x; }, {c, kInf})).epsilon(1e-9));
        const double head = numerics::normal_cdf((std::log(c) - kM) / kS - kS);
        const double quad = ts::lognormal_mean_of([&](double x) { return x <= c ? x : 0.0; }, kM, kS, -12,
                                                  (std::log(c) - kM) / kS, 40000);
        CHECK(ln.head_price(c) == doctest::Approx(head).epsilon(1e-12));
        CHECK(quad == doctest::Approx(head).epsilon(1e-9));
    }
}

TEST_CASE("discrete construction") {
    CHECK_THROWS_AS(DensityModel::discrete({{1.0, 0.5}, {1.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(DensityModel::discrete({{1.0, 0.4}, {2.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(DensityModel::discrete({{-1.0, 0.5}, {2.0, 0.5}}), ConfigError);
    const auto d = DensityModel::discrete({{2.0, 0.25}, {0.5, 0.75}});
    CHECK(d.states().front().xi == 0.5);
    CHECK(d.mean() == doctest::Approx(0.875));
    CHECK(d.essinf() == 0.5);
    CHECK(d.esssup() == 2.0);
}

TEST_CASE("truncated lognormal") {
    const auto raw = DensityModel::truncated_lognormal(kM, kS, 3.0);
    CHECK(raw.esssup() == 3.0);
    CHECK(raw.mean() < 1.0);
    CHECK(raw.expect([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));
    const auto centered = DensityModel::truncated_lognormal(kM, kS, 3.0, true);
    CHECK(centered.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(centered.expect([](double x) { return x; }) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Black-Scholes state price density") {
    const BlackScholesMarket m{5.0, 0.15, 0.4, 1.0};
    const auto model = DensityModel::black_scholes(m);
    CHECK(model.log_std() == doctest::Approx(0.375));
    CHECK(model.log_mean() == doctest::Approx(kM));
    for (double s : {0.5, 1.70907, 5.0, 12.0}) CHECK(m.price_of_xi(m.xi_of_price(s)) == doctest::Approx(s));
    // xi falls as the stock rises.
    CHECK(m.xi_of_price(6.0) < m.xi_of_price(5.0));
}
