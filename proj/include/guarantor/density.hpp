#pragma once

#include "guarantor/numerics.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace guarantor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open range of state-price values lo < xi <= hi.
struct Interval {
    double lo = 0.0;
    double hi = kInf;
};

/// One atom of a discrete state-price density.
struct State {
    double xi;
    double prob;
};

/// Black-Scholes market with zero interest rate. The state-price density is
/// xi = exp(-mu W_T - mu^2 T / 2) with market price of risk mu = b / sigma.
struct BlackScholesMarket {
    double s0 = 1.0;
    double drift = 0.0;  // b
    double vol = 1.0;    // sigma
    double maturity = 1.0;

    double market_price_of_risk() const { return drift / vol; }
    /// xi as a function of the terminal stock price.
    double xi_of_price(double s_t) const;
    /// Inverse of xi_of_price.
    double price_of_xi(double xi) const;
};

/// Law of the state-price density xi. Immutable after construction; every
/// query is pure and safe to call concurrently.
class DensityModel {
public:
    enum class Kind { Lognormal, Discrete, TruncatedLognormal };

    /// ln xi ~ N(log_mean, log_std^2).
    static DensityModel lognormal(double log_mean, double log_std);
    /// Martingale-normalized lognormal: log_mean = -log_std^2 / 2.
    static DensityModel lognormal_normalized(double log_std);
    static DensityModel black_scholes(const BlackScholesMarket& market);
    /// States need not be sorted; probabilities must be positive and sum to 1.
    static DensityModel discrete(std::vector<State> states);
    /// Lognormal conditioned on xi <= upper. With `recenter`, log_mean is
    /// re-solved so that the truncated law still has E[xi] = 1.
    static DensityModel truncated_lognormal(double log_mean, double log_std, double upper,
                                            bool recenter = false);

    Kind kind() const { return kind_; }
    bool atomless() const { return kind_ != Kind::Discrete; }
    double log_mean() const { return m_; }
    double log_std() const { return s_; }
    double truncation() const { return upper_; }
    const std::vector<State>& states() const { return states_; }

    double essinf() const;
    double esssup() const;
    double mean() const;

    double cdf(double x) const;
    /// Generalized inverse inf{x : F(x) >= u}; u = 0 gives essinf, u = 1 gives esssup.
    double quantile(double u) const;
    /// F^{-1}(1 - p), evaluated without forming 1 - p for atomless models.
    double upper_quantile(double p) const;

    /// E[g(xi) 1{xi in region}]. Lognormal kinds integrate on the standard
    /// normal scale; `breakpoints` are xi-values where g has kinks.
    double expect(const std::function<double(double)>& g, Interval region = {},
                  std::span<const double> breakpoints = {},
                  const numerics::QuadratureOptions& opts = {}) const;

    /// E[xi 1{xi > c}] in closed form.
    double tail_price(double c) const;
    /// E[xi 1{xi <= c}] in closed form.
    double head_price(double c) const { return mean() - tail_price(c); }
    /// P(xi > c).
    double tail_prob(double c) const;

private:
    DensityModel() = default;

    // Untruncated lognormal helpers on the log scale.
    double z_of(double x) const;

    Kind kind_ = Kind::Lognormal;
    double m_ = 0.0;
    double s_ = 1.0;
    double upper_ = kInf;
    double mass_ = 1.0;  // P_LN(xi <= upper) for the truncated kind
    std::vector<State> states_;  // sorted by xi
};

/// Standard-normal half-width beyond which lognormal integrands are dropped.
double lognormal_clip_width(double log_std);

}  // namespace guarantor
