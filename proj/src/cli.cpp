#include "guarantor/cli.hpp"

#include "guarantor/config.hpp"
#include "guarantor/errors.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

namespace guarantor::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int report_error(std::ostream& err, const std::string& kind, const std::string& message) {
    err << Json{{"error", kind}, {"message", message}}.dump() << '\n';
    return kError;
}

// Runs a subcommand body, mapping every failure onto exit code 2.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        return report_error(err, e.kind(), e.what());
    } catch (const Json::exception& e) {
        return report_error(err, "ConfigError", e.what());
    } catch (const std::exception& e) {
        return report_error(err, "InternalError", e.what());
    }
}

int exit_code(Plan::Classification c) {
    switch (c) {
        case Plan::Classification::Optimal: return kOk;
        case Plan::Classification::NoOptimum: return kNoOptimum;
        case Plan::Classification::Unbounded: return kUnbounded;
    }
    return kError;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) throw ConfigError("empty entry in --values");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item.substr(first), &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse \"" + item + "\" in --values");
        }
        if (item.find_first_not_of(" \t", first + used) != std::string::npos) {
            throw ConfigError("cannot parse \"" + item + "\" in --values");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--values is empty");
    return out;
}

std::string payoff_csv(const Config& cfg, const Plan& plan) {
    const auto& spec = cfg.spec;
    std::vector<double> points;
    if (cfg.outputs.payoff_grid) {
        const auto& g = *cfg.outputs.payoff_grid;
        for (int i = 0; i < g.points; ++i) points.push_back(g.min + (g.max - g.min) * i / (g.points - 1));
    } else {
        points = default_payoff_grid(spec);
    }
    std::ostringstream os;
    os << (spec.market ? "S_T,x_star,investor_payoff\n" : "xi,x_star\n");
    for (const auto& p : payoff_curve(spec, plan, points)) {
        os << fmt(p.x) << ',' << fmt(p.x_star);
        if (spec.market) os << ',' << fmt(p.investor);
        os << '\n';
    }
    return os.str();
}

}  // namespace

int cmd_solve(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load_config(config);
        const auto plan = solve(cfg.spec);
        const auto dir = output_dir(cfg.outputs);
        write_atomic(dir / "solution.json", plan_to_json(cfg.spec, plan).dump(2) + "\n");
        if (plan.claim) write_atomic(dir / "payoff.csv", payoff_csv(cfg, plan));
        out << to_string(plan.classification) << " c*=" << fmt(plan.c_star) << " v*=" << fmt(plan.value);
        if (!plan.reason.empty()) out << " (" << plan.reason << ")";
        out << '\n';
        return exit_code(plan.classification);
    });
}

int cmd_verify(const fs::path& config, const fs::path& solution, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load_config(config);
        const auto plan = plan_from_json(cfg.spec, load_json(solution));
        VerifyOptions opts;
        opts.paths = cfg.spec.numerics.mc_paths;
        opts.seed = cfg.spec.numerics.seed;
        const auto rep = verify_solution(cfg.spec, plan, opts);
        write_atomic(output_dir(cfg.outputs) / "verification.json", verification_to_json(rep).dump(2) + "\n");
        out << (rep.pass ? "PASS" : "FAIL") << " budget=" << fmt(rep.budget.mean) << " risk=" << fmt(rep.risk.mean)
            << " value=" << fmt(rep.value.mean) << '\n';
        return rep.pass ? kOk : kFail;
    });
}

int cmd_oracle(const fs::path& instance, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto inst = load_instance(instance);
        const auto res = enumerate_solve(inst);
        const auto claim = reconstruct_claim(inst, res);
        const auto eval = evaluate_claim(inst, claim);
        write_atomic(output_dir({}) / "oracle.json", oracle_to_json(inst, res, claim, eval).dump(2) + "\n");
        out << "best=" << fmt(res.best_value) << " mask=" << res.best_mask << " lower_set_gap=" << fmt(res.lower_set_gap)
            << '\n';
        return kOk;
    });
}

int cmd_sweep(const fs::path& config, const std::string& param, const std::string& values, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        if (param != "c-grid" && param != "rho0" && param != "delta" && param != "beta") {
            throw ConfigError("unknown sweep parameter \"" + param + "\"; expected c-grid, rho0, delta or beta");
        }
        const auto xs = parse_values(values);
        const auto cfg = load_config(config);
        std::ostringstream csv;
        if (param == "c-grid") {
            if (!cfg.spec.density.atomless()) throw ConfigError("c-grid sweep needs an atomless density");
            csv << "c,q,delta_c,lambda_c,v_c\n";
            for (double c : xs) {
                const double q = cfg.spec.density.cdf(c);
                if (!(q > 0 && q < 1)) throw ConfigError("threshold " + fmt(c) + " lies outside the support");
                const auto g = evaluate_threshold(cfg.spec, q);
                csv << fmt(g.c) << ',' << fmt(g.q) << ',' << fmt(g.delta) << ',' << fmt(std::exp(g.log_lambda))
                    << ',' << fmt(g.value) << '\n';
            }
        } else {
            csv << "param,classification,c_star,value\n";
            for (double x : xs) {
                ProblemSpec spec = cfg.spec;
                if (param == "rho0") {
                    spec.rho0 = x;
                } else if (param == "delta") {
                    if (spec.utility.kind() != Utility::Kind::Exponential) {
                        throw ConfigError("delta sweep needs exponential utility");
                    }
                    spec.utility = Utility::exponential(x);
                } else if (spec.risk.kind() == RiskMeasure::Kind::Entropic) {
                    spec.risk = RiskMeasure::entropic(x);
                } else if (spec.risk.is_cvar()) {
                    spec.risk = RiskMeasure::cvar(x);
                } else {
                    throw ConfigError("beta sweep needs entropic or CVaR risk");
                }
                const auto plan = solve(spec);
                csv << fmt(x) << ',' << to_string(plan.classification) << ',' << fmt(plan.c_star) << ','
                    << fmt(plan.value) << '\n';
            }
        }
        write_atomic(output_dir(cfg.outputs) / ("sweep_" + param + ".csv"), csv.str());
        out << csv.str();
        return kOk;
    });
}

}  // namespace guarantor::cli
