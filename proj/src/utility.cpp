#include "guarantor/utility.hpp"

#include "guarantor/density.hpp"
#include "guarantor/errors.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace guarantor {

namespace {

void require_positive(double y, const char* what) {
    if (!(y > 0)) {
        std::ostringstream os;
        os << what << " needs y > 0, got " << y;
        throw DomainError(os.str());
    }
}

}  // namespace

Utility Utility::exponential(double delta) {
    if (!(delta > 0) || !std::isfinite(delta)) throw ConfigError("exponential utility needs delta > 0");
    return {Kind::Exponential, delta};
}

Utility Utility::power(double gamma) {
    if (!(gamma > 0 && gamma < 1)) throw ConfigError("power utility needs 0 < gamma < 1");
    return {Kind::Power, gamma};
}

Utility Utility::log_shifted(double shift) {
    if (!(shift > 0) || !std::isfinite(shift)) throw ConfigError("log utility needs a > 0");
    return {Kind::LogShifted, shift};
}

double Utility::value(double x) const {
    if (x <= 0) return 0.0;
    switch (kind_) {
        case Kind::Exponential: return -std::expm1(-param_ * x);
        case Kind::Power: return std::pow(x, param_);
        case Kind::LogShifted: return std::log1p(x / param_);
    }
    return 0.0;
}

double Utility::marginal(double x) const {
    switch (kind_) {
        case Kind::Exponential: return param_ * std::exp(-param_ * x);
        case Kind::Power: return param_ * std::pow(x, param_ - 1.0);
        case Kind::LogShifted: return 1.0 / (param_ + x);
    }
    return 0.0;
}

double Utility::marginal_at_zero() const {
    switch (kind_) {
        case Kind::Exponential: return param_;
        case Kind::Power: return kInf;
        case Kind::LogShifted: return 1.0 / param_;
    }
    return kInf;
}

double Utility::inverse_marginal(double y) const {
    require_positive(y, "inverse marginal utility");
    if (y >= marginal_at_zero()) return 0.0;
    switch (kind_) {
        case Kind::Exponential: return std::log(param_ / y) / param_;
        case Kind::Power: return std::pow(y / param_, 1.0 / (param_ - 1.0));
        case Kind::LogShifted: return 1.0 / y - param_;
    }
    return 0.0;
}

double Utility::inverse_marginal_log(double log_y) const {
    if (std::isnan(log_y)) throw DomainError("inverse marginal utility of NaN");
    if (log_y >= std::log(marginal_at_zero())) return 0.0;
    switch (kind_) {
        case Kind::Exponential: return (std::log(param_) - log_y) / param_;
        case Kind::Power: return std::exp((log_y - std::log(param_)) / (param_ - 1.0));
        case Kind::LogShifted: return std::exp(-log_y) - param_;
    }
    return 0.0;
}

double Utility::conjugate(double y) const {
    require_positive(y, "utility conjugate");
    if (y >= marginal_at_zero()) return 0.0;
    switch (kind_) {
        case Kind::Exponential: {
            const double r = y / param_;
            return 1.0 - r + r * std::log(r);
        }
        case Kind::Power:
            return (1.0 - param_) * std::pow(y / param_, param_ / (param_ - 1.0));
        case Kind::LogShifted: {
            const double ay = param_ * y;
            return ay - 1.0 - std::log(ay);
        }
    }
    return 0.0;
}

void check_conjugate_integrability(const Utility& u, const DensityModel& model) {
    for (double lambda : std::array{1e-3, 1.0, 1e3}) {
        double value = 0.0;
        try {
            value = model.expect([&](double xi) { return u.conjugate(lambda * xi); });
        } catch (const NonConvergent& e) {
            std::ostringstream os;
            os << "E[v(lambda xi)] did not converge at lambda = " << lambda << ": " << e.what();
            throw ConfigError(os.str());
        }
        if (!std::isfinite(value)) {
            std::ostringstream os;
            os << "E[v(lambda xi)] is not finite at lambda = " << lambda;
            throw ConfigError(os.str());
        }
    }
}

}  // namespace guarantor
