#pragma once

#include "guarantor/oracle.hpp"
#include "guarantor/planner.hpp"
#include "guarantor/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace guarantor {

using Json = nlohmann::json;

inline constexpr const char* kConfigSchema = "guarantor-config/1";
inline constexpr const char* kInstanceSchema = "guarantor-instance/1";
inline constexpr const char* kSolutionSchema = "guarantor-solution/1";

/// Abscissae for the payoff CSV (S_T for Black-Scholes markets, xi otherwise).
struct PayoffGrid {
    double min;
    double max;
    int points;
};

struct OutputSettings {
    std::string dir = ".";
    std::optional<PayoffGrid> payoff_grid;
};

struct Config {
    ProblemSpec spec;
    OutputSettings outputs;
};

/// Parses a "guarantor-config/1" document. Unknown keys and missing
/// required fields raise ConfigError naming the offending path.
Config parse_config(const Json& doc);
Config load_config(const std::filesystem::path& path);

/// Parses a "guarantor-instance/1" document: discrete states plus utility,
/// risk, x0 and rho0.
OracleInstance parse_instance(const Json& doc);
OracleInstance load_instance(const std::filesystem::path& path);

Json load_json(const std::filesystem::path& path);

/// Non-finite doubles become the strings "inf", "-inf" and "nan".
Json number(double x);
double read_number(const Json& j, const std::string& where);

Json plan_to_json(const ProblemSpec& spec, const Plan& plan);
/// Rebuilds the plan fields and claim written by plan_to_json. Diagnostics
/// arrays are not read back.
Plan plan_from_json(const ProblemSpec& spec, const Json& doc);

Json verification_to_json(const VerificationReport& rep);
Json oracle_to_json(const OracleInstance& inst, const OracleResult& res,
                    const std::vector<double>& claim, const ClaimEvaluation& eval);

/// GUARANTOR_OUTPUT_DIR when set, else outputs.dir.
std::filesystem::path output_dir(const OutputSettings& outputs);

/// Writes through a sibling temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace guarantor
