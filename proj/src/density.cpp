#include "guarantor/density.hpp"

#include "guarantor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace guarantor {

using numerics::normal_cdf;
using numerics::normal_cdf_upper;

double BlackScholesMarket::xi_of_price(double s_t) const {
    const double sig2 = vol * vol;
    return std::pow(s_t * std::exp(maturity * (sig2 - drift) / 2.0) / s0, -drift / sig2);
}

double BlackScholesMarket::price_of_xi(double xi) const {
    const double sig2 = vol * vol;
    return s0 * std::exp(maturity * (drift - sig2) / 2.0) * std::pow(xi, -sig2 / drift);
}

double lognormal_clip_width(double log_std) { return 9.0 + 3.0 * log_std; }

DensityModel DensityModel::lognormal(double log_mean, double log_std) {
    if (!(log_std > 0) || !std::isfinite(log_std) || !std::isfinite(log_mean)) {
        throw ConfigError("lognormal density needs a finite log-mean and log-std > 0");
    }
    DensityModel d;
    d.kind_ = Kind::Lognormal;
    d.m_ = log_mean;
    d.s_ = log_std;
    return d;
}

DensityModel DensityModel::lognormal_normalized(double log_std) {
    return lognormal(-0.5 * log_std * log_std, log_std);
}

DensityModel DensityModel::black_scholes(const BlackScholesMarket& market) {
    if (!(market.vol > 0) || !(market.maturity > 0) || !(market.s0 > 0)) {
        throw ConfigError("Black-Scholes market needs sigma > 0, T > 0 and S0 > 0");
    }
    const double mu = market.market_price_of_risk();
    if (!(mu > 0)) throw ConfigError("Black-Scholes market needs b / sigma > 0");
    return lognormal_normalized(mu * std::sqrt(market.maturity));
}

DensityModel DensityModel::discrete(std::vector<State> states) {
    if (states.empty()) throw ConfigError("discrete density needs at least one state");
    double total = 0.0;
    for (const auto& st : states) {
        if (!(st.xi > 0) || !(st.prob > 0) || !std::isfinite(st.xi)) {
            throw ConfigError("discrete states need xi > 0 and p > 0");
        }
        total += st.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "discrete probabilities sum to " << total << ", expected 1";
        throw ConfigError(os.str());
    }
    std::sort(states.begin(), states.end(),
              [](const State& a, const State& b) { return a.xi < b.xi; });
    for (std::size_t i = 1; i < states.size(); ++i) {
        if (states[i].xi == states[i - 1].xi) {
            throw ConfigError("discrete states must have distinct xi values");
        }
    }
    DensityModel d;
    d.kind_ = Kind::Discrete;
    d.states_ = std::move(states);
    return d;
}

DensityModel DensityModel::truncated_lognormal(double log_mean, double log_std, double upper,
                                               bool recenter) {
    if (!(upper > 0)) throw ConfigError("truncation bound must be positive");
    DensityModel d = lognormal(log_mean, log_std);
    d.kind_ = Kind::TruncatedLognormal;
    d.upper_ = upper;
    if (recenter) {
        if (!(upper > 1.0)) {
            throw ConfigError("cannot re-center a density truncated at or below 1");
        }
        const double s = log_std;
        const double lu = std::log(upper);
        // ln E[xi | xi <= upper] as a function of the log-mean; increasing.
        auto log_mean_gap = [&](double m) {
            const double z = (lu - m) / s;
            return m + 0.5 * s * s + std::log(normal_cdf(z - s)) - std::log(normal_cdf(z));
        };
        // Truncation only lowers the mean, so the root lies above -s^2 / 2.
        d.m_ = numerics::bisect(log_mean_gap, -0.5 * s * s, lu + 5.0 * s,
                                {.f_tol = 1e-15, .x_tol = 1e-16, .max_iter = 400});
    }
    d.mass_ = normal_cdf(d.z_of(upper));
    if (!(d.mass_ > 0)) throw ConfigError("truncation leaves no probability mass");
    return d;
}

double DensityModel::z_of(double x) const { return (std::log(x) - m_) / s_; }

double DensityModel::essinf() const {
    return kind_ == Kind::Discrete ? states_.front().xi : 0.0;
}

double DensityModel::esssup() const {
    switch (kind_) {
        case Kind::Discrete: return states_.back().xi;
        case Kind::TruncatedLognormal: return upper_;
        case Kind::Lognormal: break;
    }
    return kInf;
}

double DensityModel::mean() const {
    switch (kind_) {
        case Kind::Discrete: {
            double sum = 0.0;
            for (const auto& st : states_) sum += st.xi * st.prob;
            return sum;
        }
        case Kind::TruncatedLognormal:
            return std::exp(m_ + 0.5 * s_ * s_) * normal_cdf(z_of(upper_) - s_) / mass_;
        case Kind::Lognormal: break;
    }
    return std::exp(m_ + 0.5 * s_ * s_);
}

double DensityModel::cdf(double x) const {
    if (!(x > 0)) return 0.0;
    switch (kind_) {
        case Kind::Discrete: {
            double sum = 0.0;
            for (const auto& st : states_) {
                if (st.xi > x) break;
                sum += st.prob;
            }
            return std::min(sum, 1.0);
        }
        case Kind::TruncatedLognormal:
            if (x >= upper_) return 1.0;
            return normal_cdf(z_of(x)) / mass_;
        case Kind::Lognormal: break;
    }
    if (std::isinf(x)) return 1.0;
    return normal_cdf(z_of(x));
}

double DensityModel::tail_prob(double c) const {
    if (!(c > 0)) return 1.0;
    switch (kind_) {
        case Kind::Discrete: {
            double sum = 0.0;
            for (const auto& st : states_) {
                if (st.xi > c) sum += st.prob;
            }
            return sum;
        }
        case Kind::TruncatedLognormal:
            if (c >= upper_) return 0.0;
            return numerics::normal_interval(z_of(c), z_of(upper_)) / mass_;
        case Kind::Lognormal: break;
    }
    if (std::isinf(c)) return 0.0;
    return normal_cdf_upper(z_of(c));
}

double DensityModel::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
        std::ostringstream os;
        os << "quantile level " << u << " outside [0, 1]";
        throw DomainError(os.str());
    }
    switch (kind_) {
        case Kind::Discrete: {
            double cum = 0.0;
            for (const auto& st : states_) {
                cum += st.prob;
                if (cum >= u - 1e-14) return st.xi;
            }
            return states_.back().xi;
        }
        case Kind::TruncatedLognormal:
            if (u == 1.0) return upper_;
            if (u == 0.0) return 0.0;
            return std::min(upper_, std::exp(m_ + s_ * numerics::normal_quantile(u * mass_)));
        case Kind::Lognormal: break;
    }
    if (u == 0.0) return 0.0;
    if (u == 1.0) return kInf;
    return std::exp(m_ + s_ * numerics::normal_quantile(u));
}

double DensityModel::upper_quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << "tail probability " << p << " outside [0, 1]";
        throw DomainError(os.str());
    }
    switch (kind_) {
        case Kind::Discrete: return quantile(1.0 - p);
        case Kind::TruncatedLognormal: {
            if (p == 0.0) return upper_;
            if (p == 1.0) return 0.0;
            const double upper_tail = normal_cdf_upper(z_of(upper_)) + mass_ * p;
            return std::min(upper_, std::exp(m_ + s_ * numerics::normal_quantile_upper(upper_tail)));
        }
        case Kind::Lognormal: break;
    }
    if (p == 0.0) return kInf;
    if (p == 1.0) return 0.0;
    return std::exp(m_ + s_ * numerics::normal_quantile_upper(p));
}

double DensityModel::tail_price(double c) const {
    if (!(c > 0)) return mean();
    switch (kind_) {
        case Kind::Discrete: {
            double sum = 0.0;
            for (const auto& st : states_) {
                if (st.xi > c) sum += st.xi * st.prob;
            }
            return sum;
        }
        case Kind::TruncatedLognormal: {
            if (c >= upper_) return 0.0;
            const double scale = std::exp(m_ + 0.5 * s_ * s_);
            return scale * numerics::normal_interval(z_of(c) - s_, z_of(upper_) - s_) / mass_;
        }
        case Kind::Lognormal: break;
    }
    if (std::isinf(c)) return 0.0;
    return std::exp(m_ + 0.5 * s_ * s_) * normal_cdf_upper(z_of(c) - s_);
}

double DensityModel::expect(const std::function<double(double)>& g, Interval region,
                            std::span<const double> breakpoints,
                            const numerics::QuadratureOptions& opts) const {
    if (kind_ == Kind::Discrete) {
        double sum = 0.0;
        for (const auto& st : states_) {
            if (st.xi > region.lo && st.xi <= region.hi) sum += g(st.xi) * st.prob;
        }
        return sum;
    }
    double hi = region.hi;
    if (kind_ == Kind::TruncatedLognormal) hi = std::min(hi, upper_);
    if (!(hi > region.lo)) return 0.0;

    const double width = lognormal_clip_width(s_);
    const double z_lo = region.lo > 0 ? std::max(z_of(region.lo), -width) : -width;
    const double z_hi = std::isinf(hi) ? width : std::min(z_of(hi), width);
    if (!(z_hi > z_lo)) return 0.0;

    std::vector<double> z_breaks;
    z_breaks.reserve(breakpoints.size());
    for (double x : breakpoints) {
        if (x > 0 && std::isfinite(x)) z_breaks.push_back(z_of(x));
    }
    const double m = m_;
    const double s = s_;
    auto integrand = [&](double z) { return g(std::exp(m + s * z)) * numerics::normal_pdf(z); };
    const double value = numerics::integrate(integrand, z_lo, z_hi, z_breaks, opts);
    return kind_ == Kind::TruncatedLognormal ? value / mass_ : value;
}

}  // namespace guarantor
