#pragma once

#include <stdexcept>
#include <string>

namespace guarantor {

/// Base class for every error raised by the library. `kind()` is the stable
/// machine-readable tag written into CLI error reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Invalid argument outside an operation's mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

/// Inconsistent or unsupported problem configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

/// Quadrature or iteration failed to reach the requested tolerance.
class NonConvergent : public Error {
public:
    explicit NonConvergent(const std::string& what) : Error("NonConvergent", what) {}
};

/// No sign change found while expanding a root bracket.
class BracketFailure : public Error {
public:
    explicit BracketFailure(const std::string& what) : Error("BracketFailure", what) {}
};

/// The shortfall region {xi > c} carries no probability mass.
class InfeasibleTail : public Error {
public:
    explicit InfeasibleTail(const std::string& what) : Error("InfeasibleTail", what) {}
};

/// Enumeration size limit exceeded.
class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& what) : Error("BudgetExceeded", what) {}
};

/// Monte Carlo verification requested without a reproducible seed.
class SeedMissing : public Error {
public:
    explicit SeedMissing(const std::string& what) : Error("SeedMissing", what) {}
};

}  // namespace guarantor
