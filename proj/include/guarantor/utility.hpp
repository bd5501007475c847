#pragma once

namespace guarantor {

class DensityModel;

/// Concave utility of gains above the guarantee, with u(0) = 0.
///
///   Exponential(delta):  u(x) = 1 - exp(-delta x)
///   Power(gamma):        u(x) = x^gamma,            0 < gamma < 1
///   LogShifted(a):       u(x) = ln(1 + x / a)
class Utility {
public:
    enum class Kind { Exponential, Power, LogShifted };

    static Utility exponential(double delta);
    static Utility power(double gamma);
    static Utility log_shifted(double shift);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }

    double value(double x) const;
    double marginal(double x) const;
    /// lim_{x -> 0+} u'(x); +inf for power utility.
    double marginal_at_zero() const;
    /// I(y) = (u')^{-1}(y) for y < u'(0+), 0 otherwise.
    double inverse_marginal(double y) const;
    /// I(exp(log_y)), usable where y itself under- or overflows.
    double inverse_marginal_log(double log_y) const;
    /// v(y) = sup_{x >= 0} (u(x) - x y).
    double conjugate(double y) const;

private:
    Utility(Kind kind, double param) : kind_(kind), param_(param) {}

    Kind kind_;
    double param_;
};

/// Checks E[v(lambda xi)] < inf at lambda in {1e-3, 1, 1e3}. Throws
/// ConfigError when an expectation is not finite or fails to converge.
void check_conjugate_integrability(const Utility& u, const DensityModel& model);

}  // namespace guarantor
