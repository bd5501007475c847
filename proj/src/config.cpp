#include "guarantor/config.hpp"

#include "guarantor/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <system_error>

namespace guarantor {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

const Json& object_at(const Json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    return j;
}

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    for (const auto& [key, _] : object_at(j, where).items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) fail(where + "." + key, "unknown key");
    }
}

const Json& required(const Json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where + "." + key, "missing");
    return j.at(key);
}

double required_number(const Json& j, const std::string& where, const char* key) {
    return read_number(required(j, where, key), where + "." + key);
}

double optional_number(const Json& j, const std::string& where, const char* key, double fallback) {
    return j.contains(key) ? read_number(j.at(key), where + "." + key) : fallback;
}

std::string required_string(const Json& j, const std::string& where, const char* key) {
    const auto& v = required(j, where, key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

template <class Int>
Int integer_at(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a nonnegative integer");
    return static_cast<Int>(j.get<unsigned long long>());
}

void check_schema(const Json& doc, const char* schema) {
    const auto found = required_string(object_at(doc, "$"), "$", "schema");
    if (found != schema) fail("$.schema", "expected \"" + std::string(schema) + "\", got \"" + found + "\"");
}

std::vector<State> parse_states(const Json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of {xi, p}");
    std::vector<State> states;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        allow_keys(j[i], at, {"xi", "p"});
        states.push_back({required_number(j[i], at, "xi"), required_number(j[i], at, "p")});
    }
    return states;
}

struct Market {
    DensityModel density;
    std::optional<BlackScholesMarket> bs;
};

Market parse_market(const Json& j) {
    const std::string where = "$.market";
    const auto kind = required_string(object_at(j, where), where, "kind");
    std::optional<double> truncation;
    bool recenter = false;
    if (j.contains("truncation")) truncation = read_number(j.at("truncation"), where + ".truncation");
    if (j.contains("recenter")) {
        if (!j.at("recenter").is_boolean()) fail(where + ".recenter", "expected a boolean");
        recenter = j.at("recenter").get<bool>();
    }
    if (kind == "black_scholes") {
        allow_keys(j, where, {"kind", "S0", "b", "sigma", "T", "truncation", "recenter"});
        BlackScholesMarket m{required_number(j, where, "S0"), required_number(j, where, "b"),
                             required_number(j, where, "sigma"), required_number(j, where, "T")};
        auto density = DensityModel::black_scholes(m);
        if (!truncation) return {density, m};
        // A truncated law no longer maps onto the stock price.
        return {DensityModel::truncated_lognormal(density.log_mean(), density.log_std(), *truncation,
                                                  recenter),
                std::nullopt};
    }
    if (kind == "lognormal") {
        allow_keys(j, where, {"kind", "log_mean", "log_std", "truncation", "recenter"});
        const double s = required_number(j, where, "log_std");
        const double m = optional_number(j, where, "log_mean", -0.5 * s * s);
        if (!truncation) return {DensityModel::lognormal(m, s), std::nullopt};
        return {DensityModel::truncated_lognormal(m, s, *truncation, recenter), std::nullopt};
    }
    if (kind == "discrete") {
        allow_keys(j, where, {"kind", "states"});
        return {DensityModel::discrete(parse_states(required(j, where, "states"), where + ".states")),
                std::nullopt};
    }
    fail(where + ".kind", "unknown market kind \"" + kind + "\"");
}

RiskMeasure parse_risk(const Json& j, const std::string& where) {
    const auto kind = required_string(object_at(j, where), where, "kind");
    if (kind == "entropic") {
        allow_keys(j, where, {"kind", "beta"});
        return RiskMeasure::entropic(required_number(j, where, "beta"));
    }
    if (kind == "cvar") {
        allow_keys(j, where, {"kind", "beta"});
        return RiskMeasure::cvar(required_number(j, where, "beta"));
    }
    if (kind == "spectral") {
        allow_keys(j, where, {"kind", "atoms"});
        const auto& atoms = required(j, where, "atoms");
        if (!atoms.is_array()) fail(where + ".atoms", "expected an array of {weight, level}");
        std::vector<SpectralAtom> out;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string at = where + ".atoms[" + std::to_string(i) + "]";
            allow_keys(atoms[i], at, {"weight", "level"});
            out.push_back({required_number(atoms[i], at, "weight"), required_number(atoms[i], at, "level")});
        }
        return RiskMeasure::spectral(std::move(out));
    }
    fail(where + ".kind", "unknown risk kind \"" + kind + "\"");
}

Utility parse_utility(const Json& j, const std::string& where) {
    const auto kind = required_string(object_at(j, where), where, "kind");
    if (kind == "exponential") {
        allow_keys(j, where, {"kind", "delta"});
        return Utility::exponential(required_number(j, where, "delta"));
    }
    if (kind == "power") {
        allow_keys(j, where, {"kind", "gamma"});
        return Utility::power(required_number(j, where, "gamma"));
    }
    if (kind == "log") {
        allow_keys(j, where, {"kind", "a"});
        return Utility::log_shifted(required_number(j, where, "a"));
    }
    fail(where + ".kind", "unknown utility kind \"" + kind + "\"");
}

Numerics parse_numerics(const Json& j) {
    const std::string where = "$.numerics";
    allow_keys(j, where, {"grid_points", "q_min", "q_max", "q_tol", "expect_tol", "root_tol",
                          "mc_paths", "seed", "threads"});
    Numerics n;
    if (j.contains("grid_points")) n.grid_points = integer_at<int>(j.at("grid_points"), where + ".grid_points");
    n.q_min = optional_number(j, where, "q_min", n.q_min);
    n.q_max = optional_number(j, where, "q_max", n.q_max);
    n.q_tol = optional_number(j, where, "q_tol", n.q_tol);
    n.expect_tol = optional_number(j, where, "expect_tol", n.expect_tol);
    n.root_tol = optional_number(j, where, "root_tol", n.root_tol);
    if (j.contains("mc_paths")) n.mc_paths = integer_at<std::size_t>(j.at("mc_paths"), where + ".mc_paths");
    if (j.contains("seed")) n.seed = integer_at<std::uint64_t>(j.at("seed"), where + ".seed");
    if (j.contains("threads")) n.threads = integer_at<unsigned>(j.at("threads"), where + ".threads");
    return n;
}

OutputSettings parse_outputs(const Json& j) {
    const std::string where = "$.outputs";
    allow_keys(j, where, {"dir", "payoff_grid"});
    OutputSettings out;
    if (j.contains("dir")) out.dir = required_string(j, where, "dir");
    if (j.contains("payoff_grid")) {
        const auto& g = j.at("payoff_grid");
        const std::string at = where + ".payoff_grid";
        allow_keys(g, at, {"min", "max", "points"});
        out.payoff_grid = PayoffGrid{required_number(g, at, "min"), required_number(g, at, "max"),
                                     integer_at<int>(required(g, at, "points"), at + ".points")};
        if (!(out.payoff_grid->min > 0 && out.payoff_grid->max > out.payoff_grid->min &&
              out.payoff_grid->points >= 2)) {
            fail(at, "needs 0 < min < max and at least 2 points");
        }
    }
    return out;
}

Json risk_to_json(const RiskMeasure& r) {
    if (r.kind() == RiskMeasure::Kind::Entropic) return {{"kind", "entropic"}, {"beta", r.beta()}};
    if (r.is_cvar() && r.atoms().front().weight == 1.0) {
        return {{"kind", "cvar"}, {"beta", r.atoms().front().level}};
    }
    Json atoms = Json::array();
    for (const auto& a : r.atoms()) atoms.push_back({{"weight", a.weight}, {"level", a.level}});
    return {{"kind", "spectral"}, {"atoms", atoms}};
}

Json estimate_to_json(const Estimate& e) {
    return {{"estimate", number(e.mean)}, {"std_error", number(e.std_error)}, {"target", number(e.target)},
            {"pass", e.pass}};
}

}  // namespace

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double read_number(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    fail(where, "expected a number");
}

Json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed JSON: " + e.what());
    }
}

Config parse_config(const Json& doc) {
    check_schema(doc, kConfigSchema);
    allow_keys(doc, "$", {"schema", "market", "guarantee", "v0", "risk", "rho0", "utility", "numerics",
                          "outputs"});
    auto market = parse_market(required(doc, "$", "market"));
    ProblemSpec spec{required_number(doc, "$", "v0"),
                     optional_number(doc, "$", "guarantee", 0.0),
                     required_number(doc, "$", "rho0"),
                     std::move(market.density),
                     parse_utility(required(doc, "$", "utility"), "$.utility"),
                     parse_risk(required(doc, "$", "risk"), "$.risk"),
                     market.bs,
                     doc.contains("numerics") ? parse_numerics(doc.at("numerics")) : Numerics{}};
    validate(spec);
    return {std::move(spec), doc.contains("outputs") ? parse_outputs(doc.at("outputs")) : OutputSettings{}};
}

Config load_config(const fs::path& path) { return parse_config(load_json(path)); }

OracleInstance parse_instance(const Json& doc) {
    check_schema(doc, kInstanceSchema);
    allow_keys(doc, "$", {"schema", "states", "utility", "risk", "x0", "rho0"});
    OracleInstance inst{DensityModel::discrete(parse_states(required(doc, "$", "states"), "$.states")),
                        parse_utility(required(doc, "$", "utility"), "$.utility"),
                        parse_risk(required(doc, "$", "risk"), "$.risk"),
                        required_number(doc, "$", "x0"),
                        required_number(doc, "$", "rho0")};
    if (!(inst.x0 >= 0) || !std::isfinite(inst.x0)) fail("$.x0", "must be finite and nonnegative");
    if (!(inst.rho0 >= 0) || !std::isfinite(inst.rho0)) fail("$.rho0", "must be finite and nonnegative");
    return inst;
}

OracleInstance load_instance(const fs::path& path) { return parse_instance(load_json(path)); }

Json plan_to_json(const ProblemSpec& spec, const Plan& plan) {
    const auto& sf = plan.shortfall;
    Json shortfall = {{"kind", sf.kind == RiskMeasure::Kind::Entropic ? "entropic" : "spectral"},
                      {"status", sf.status == ShortfallSolution::Status::Finite ? "finite" : "minus_infinity"},
                      {"c", number(sf.c)},
                      {"alpha", number(sf.alpha)},
                      {"delta", number(sf.delta)},
                      {"delta_envelope", number(sf.delta_envelope)}};
    if (sf.kind == RiskMeasure::Kind::Entropic) {
        shortfall["beta"] = number(sf.beta);
        shortfall["eta"] = number(sf.eta);
    } else {
        shortfall["level"] = number(sf.level);
    }

    Json doc = {{"schema", kSolutionSchema},
                {"classification", to_string(plan.classification)},
                {"reason", plan.reason},
                {"x0", number(plan.x0)},
                {"c_star", number(plan.c_star)},
                {"q_star", number(plan.q_star)},
                {"prob_no_loss", number(plan.q_star)},
                {"lambda_star", number(plan.lambda_star)},
                {"log_lambda_star", number(plan.log_lambda_star)},
                {"x_plus", number(plan.x_plus)},
                {"delta", number(sf.delta)},
                {"value", number(plan.value)},
                {"epsilon", number(plan.epsilon)},
                {"value_supremum", number(plan.v_sup)},
                {"no_risk_benchmark", number(plan.benchmark_value)},
                {"shortfall", shortfall},
                {"has_claim", plan.claim.has_value()},
                {"risk", risk_to_json(spec.risk)}};
    if (sf.kind == RiskMeasure::Kind::Entropic) {
        doc["eta_star"] = number(sf.eta);
    } else {
        doc["shortfall_level"] = number(sf.level);
    }
    if (plan.bs) {
        doc["bs_constants"] = {{"s_star", plan.bs->s_star}, {"L", plan.bs->L}, {"K1", plan.bs->K1},
                               {"K2", plan.bs->K2}};
    }
    if (plan.checks.computed) {
        doc["checks"] = {{"budget", number(plan.checks.budget)},   {"risk", number(plan.checks.risk)},
                         {"value", number(plan.checks.value)},     {"budget_ok", plan.checks.budget_ok},
                         {"risk_ok", plan.checks.risk_ok},         {"value_ok", plan.checks.value_ok}};
    }

    Json grid = {{"q", Json::array()}, {"c", Json::array()}, {"delta_c", Json::array()},
                 {"lambda_c", Json::array()}, {"v_c", Json::array()}};
    for (const auto& g : plan.grid) {
        grid["q"].push_back(number(g.q));
        grid["c"].push_back(number(g.c));
        grid["delta_c"].push_back(number(g.delta));
        grid["lambda_c"].push_back(number(std::exp(g.log_lambda)));
        grid["v_c"].push_back(number(g.value));
    }
    doc["diagnostics"] = {{"grid", grid},
                          {"existence_limit", number(plan.existence_limit)},
                          {"penalty", {{"value", number(plan.penalty.value)}, {"computed", plan.penalty.computed}}},
                          {"local_values", {number(plan.local_left), number(plan.local_right)}},
                          {"warnings", plan.warnings}};
    return doc;
}

Plan plan_from_json(const ProblemSpec& spec, const Json& doc) {
    check_schema(doc, kSolutionSchema);
    Plan plan;
    const auto cls = required_string(doc, "$", "classification");
    if (cls == "OPTIMAL") {
        plan.classification = Plan::Classification::Optimal;
    } else if (cls == "NO_OPTIMUM") {
        plan.classification = Plan::Classification::NoOptimum;
    } else if (cls == "UNBOUNDED") {
        plan.classification = Plan::Classification::Unbounded;
    } else {
        fail("$.classification", "unknown classification \"" + cls + "\"");
    }
    if (doc.contains("reason")) plan.reason = required_string(doc, "$", "reason");
    plan.x0 = required_number(doc, "$", "x0");
    plan.c_star = required_number(doc, "$", "c_star");
    plan.q_star = required_number(doc, "$", "q_star");
    plan.log_lambda_star = required_number(doc, "$", "log_lambda_star");
    plan.lambda_star = required_number(doc, "$", "lambda_star");
    plan.x_plus = required_number(doc, "$", "x_plus");
    plan.value = required_number(doc, "$", "value");
    plan.epsilon = optional_number(doc, "$", "epsilon", 0.0);
    plan.v_sup = optional_number(doc, "$", "value_supremum", plan.value);
    plan.benchmark_value = optional_number(doc, "$", "no_risk_benchmark", 0.0);

    const auto& sj = required(doc, "$", "shortfall");
    const std::string at = "$.shortfall";
    auto& sf = plan.shortfall;
    const auto kind = required_string(sj, at, "kind");
    const bool entropic = kind == "entropic";
    if (entropic != (spec.risk.kind() == RiskMeasure::Kind::Entropic)) {
        fail(at + ".kind", "\"" + kind + "\" does not match the config's risk measure");
    }
    sf.kind = entropic ? RiskMeasure::Kind::Entropic : RiskMeasure::Kind::Spectral;
    sf.status = required_string(sj, at, "status") == "finite" ? ShortfallSolution::Status::Finite
                                                               : ShortfallSolution::Status::MinusInfinity;
    sf.c = required_number(sj, at, "c");
    sf.alpha = required_number(sj, at, "alpha");
    sf.delta = required_number(sj, at, "delta");
    sf.delta_envelope = required_number(sj, at, "delta_envelope");
    if (entropic) {
        sf.beta = required_number(sj, at, "beta");
        sf.eta = required_number(sj, at, "eta");
    } else {
        sf.level = required_number(sj, at, "level");
    }
    const auto& has_claim = required(doc, "$", "has_claim");
    if (!has_claim.is_boolean()) fail("$.has_claim", "expected a boolean");
    if (has_claim.get<bool>()) plan.claim = Claim{plan.c_star, plan.log_lambda_star, spec.utility, sf};
    return plan;
}

Json verification_to_json(const VerificationReport& rep) {
    return {{"result", rep.pass ? "PASS" : "FAIL"},
            {"seed", rep.seed},
            {"paths", rep.paths},
            {"budget", estimate_to_json(rep.budget)},
            {"risk", estimate_to_json(rep.risk)},
            {"value", estimate_to_json(rep.value)}};
}

Json oracle_to_json(const OracleInstance& inst, const OracleResult& res, const std::vector<double>& claim,
                    const ClaimEvaluation& eval) {
    const auto& states = inst.density.states();
    auto members = [&](std::uint32_t mask) {
        Json xs = Json::array();
        for (std::size_t i = 0; i < states.size(); ++i) {
            if ((mask >> i) & 1u) xs.push_back(states[i].xi);
        }
        return xs;
    };
    Json table = Json::array();
    for (const auto& row : res.table) {
        table.push_back({{"mask", row.mask},
                         {"delta", number(row.delta)},
                         {"x_plus", number(row.x_plus)},
                         {"log_lambda", number(row.log_lambda)},
                         {"value", number(row.value)}});
    }
    return {{"best_value", number(res.best_value)},
            {"best_mask", res.best_mask},
            {"best_set_xi", members(res.best_mask)},
            {"best_lower_value", number(res.best_lower_value)},
            {"best_lower_mask", res.best_lower_mask},
            {"lower_set_gap", number(res.lower_set_gap)},
            {"claim", claim},
            {"claim_check", {{"budget", number(eval.budget)}, {"risk", number(eval.risk)}, {"value", number(eval.value)}}},
            {"table", table}};
}

fs::path output_dir(const OutputSettings& outputs) {
    if (const char* env = std::getenv("GUARANTOR_OUTPUT_DIR"); env && *env) return env;
    return outputs.dir;
}

void write_atomic(const fs::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw ConfigError("cannot write " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace guarantor
