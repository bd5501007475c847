#include "doctest.h"

#include "guarantor/cli.hpp"
#include "guarantor/config.hpp"
#include "guarantor/errors.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace guarantor;
namespace fs = std::filesystem;

namespace {

fs::path data(const std::string& name) {
    const char* dir = std::getenv("GUARANTOR_DATA");
    REQUIRE(dir != nullptr);
    return fs::path(dir) / name;
}

// Fresh output directory, exported through GUARANTOR_OUTPUT_DIR.
struct OutputDir {
    fs::path path;

    explicit OutputDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("guarantor_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
        ::setenv("GUARANTOR_OUTPUT_DIR", path.c_str(), 1);
    }
    ~OutputDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string line; std::getline(ss, line);) out.push_back(line);
    return out;
}

Json error_json(const std::ostringstream& err) { return Json::parse(lines(err.str()).front()); }

int run_binary(const std::string& args) {
    const char* exe = std::getenv("GUARANTOR_CLI");
    REQUIRE(exe != nullptr);
    const std::string cmd = std::string(exe) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("solve and verify the base configuration") {
    OutputDir out("base");
    std::ostringstream o;
    std::ostringstream e;
    REQUIRE(cli::cmd_solve(data("base.json"), o, e) == cli::kOk);
    CHECK(e.str().empty());

    const auto sol = load_json(out.path / "solution.json");
    CHECK(sol["schema"] == kSolutionSchema);
    CHECK(sol["classification"] == "OPTIMAL");
    CHECK(sol["bs_constants"]["L"].get<double>() == doctest::Approx(0.9375).epsilon(1e-14));
    CHECK(sol.contains("eta_star"));
    CHECK(sol["diagnostics"]["grid"]["v_c"].size() == 256);
    CHECK(sol["diagnostics"]["grid"]["delta_c"].size() == 256);

    const auto csv = lines(slurp(out.path / "payoff.csv"));
    REQUIRE(csv.size() == 201);
    CHECK(csv.front() == "S_T,x_star,investor_payoff");

    std::ostringstream vo;
    std::ostringstream ve;
    CHECK(cli::cmd_verify(data("base.json"), out.path / "solution.json", vo, ve) == cli::kOk);
    CHECK(load_json(out.path / "verification.json")["result"] == "PASS");

    // Corrupt the multiplier: the budget check must fail.
    auto bad = sol;
    bad["lambda_star"] = sol["lambda_star"].get<double>() * 1.1;
    bad["log_lambda_star"] = sol["log_lambda_star"].get<double>() + std::log(1.1);
    write_atomic(out.path / "bad.json", bad.dump());
    CHECK(cli::cmd_verify(data("base.json"), out.path / "bad.json", vo, ve) == cli::kFail);
    CHECK(load_json(out.path / "verification.json")["budget"]["pass"] == false);
}

TEST_CASE("identical inputs give byte-identical solutions") {
    OutputDir out("determinism");
    std::ostringstream o;
    std::ostringstream e;
    REQUIRE(cli::cmd_solve(data("cvar_interior.json"), o, e) == cli::kOk);
    const auto first = slurp(out.path / "solution.json");
    const auto first_csv = slurp(out.path / "payoff.csv");
    REQUIRE(cli::cmd_solve(data("cvar_interior.json"), o, e) == cli::kOk);
    CHECK(slurp(out.path / "solution.json") == first);
    CHECK(slurp(out.path / "payoff.csv") == first_csv);
    CHECK(lines(first_csv).front() == "xi,x_star");
}

TEST_CASE("solution JSON round trip is lossless") {
    const auto cfg = load_config(data("base.json"));
    const auto plan = solve(cfg.spec);
    const auto doc = plan_to_json(cfg.spec, plan);
    const auto back = plan_from_json(cfg.spec, Json::parse(doc.dump()));
    CHECK(back.value == plan.value);
    CHECK(back.c_star == plan.c_star);
    CHECK(back.log_lambda_star == plan.log_lambda_star);
    CHECK(back.shortfall.eta == plan.shortfall.eta);
    REQUIRE(back.claim);
    for (double xi : {0.3, 0.9, 1.4, 2.0, 4.0}) CHECK((*back.claim)(xi) == (*plan.claim)(xi));
    const auto checks = check_claim(cfg.spec, *back.claim, back.value);
    CHECK(checks.value == doctest::Approx(plan.value).epsilon(1e-9));
    CHECK(plan_to_json(cfg.spec, back)["value"] == doc["value"]);
}

TEST_CASE("non-finite numbers survive serialization") {
    CHECK(read_number(number(kInf), "x") == kInf);
    CHECK(read_number(number(-kInf), "x") == -kInf);
    CHECK(std::isnan(read_number(number(std::nan("")), "x")));
    CHECK(read_number(number(0.1), "x") == 0.1);
    CHECK_THROWS_AS(read_number(Json("abc"), "x"), ConfigError);
}

TEST_CASE("classification exit codes") {
    OutputDir out("classes");
    std::ostringstream o;
    std::ostringstream e;
    CHECK(cli::cmd_solve(data("cvar_lognormal.json"), o, e) == cli::kUnbounded);
    const auto unbounded = load_json(out.path / "solution.json");
    CHECK(unbounded["classification"] == "UNBOUNDED");
    CHECK(unbounded["reason"] == "existence limit infinite");
    CHECK(unbounded["diagnostics"]["existence_limit"] == "inf");

    CHECK(cli::cmd_solve(data("cvar_truncated.json"), o, e) == cli::kNoOptimum);
    CHECK(load_json(out.path / "solution.json")["classification"] == "NO_OPTIMUM");
    CHECK(cli::cmd_verify(data("cvar_truncated.json"), out.path / "solution.json", o, e) == cli::kOk);

    CHECK(cli::cmd_solve(data("cvar_interior.json"), o, e) == cli::kOk);
    CHECK(cli::cmd_verify(data("cvar_interior.json"), out.path / "solution.json", o, e) == cli::kOk);
}

TEST_CASE("bad inputs exit with a machine-readable error") {
    OutputDir out("errors");
    std::ostringstream o;
    {
        std::ostringstream e;
        CHECK(cli::cmd_solve(data("arbitrage.json"), o, e) == cli::kError);
        const auto err = error_json(e);
        CHECK(err["error"] == "ConfigError");
        CHECK(err["message"].get<std::string>().find("arbitrage") != std::string::npos);
    }
    {
        std::ostringstream e;
        CHECK(cli::cmd_solve(data("missing.json"), o, e) == cli::kError);
        CHECK(error_json(e)["error"] == "ConfigError");
    }
    {
        write_atomic(out.path / "broken.json", "{\"schema\": ");
        std::ostringstream e;
        CHECK(cli::cmd_solve(out.path / "broken.json", o, e) == cli::kError);
    }
    {
        auto doc = load_json(data("base.json"));
        doc["utilty"] = doc["utility"];
        write_atomic(out.path / "typo.json", doc.dump());
        std::ostringstream e;
        CHECK(cli::cmd_solve(out.path / "typo.json", o, e) == cli::kError);
        CHECK(error_json(e)["message"].get<std::string>().find("$.utilty") != std::string::npos);
    }
    {
        auto doc = load_json(data("base.json"));
        doc["schema"] = "guarantor-config/0";
        write_atomic(out.path / "old.json", doc.dump());
        std::ostringstream e;
        CHECK(cli::cmd_solve(out.path / "old.json", o, e) == cli::kError);
    }
    {
        std::ostringstream e;
        REQUIRE(cli::cmd_solve(data("no_seed.json"), o, e) == cli::kOk);
        CHECK(cli::cmd_verify(data("no_seed.json"), out.path / "solution.json", o, e) == cli::kError);
        CHECK(error_json(e)["error"] == "SeedMissing");
    }
    {
        std::ostringstream e;
        CHECK(cli::cmd_verify(data("base.json"), data("base.json"), o, e) == cli::kError);
    }
}

TEST_CASE("oracle subcommand") {
    OutputDir out("oracle");
    std::ostringstream o;
    std::ostringstream e;
    REQUIRE(cli::cmd_oracle(data("two_state.json"), o, e) == cli::kOk);
    const auto rep = load_json(out.path / "oracle.json");
    CHECK(rep["best_value"].get<double>() == doctest::Approx(0.639454).epsilon(1e-6));
    CHECK(rep["table"].size() == 4);
    CHECK(rep["lower_set_gap"].get<double>() == 0.0);
    CHECK(rep["claim_check"]["budget"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    std::ostringstream e2;
    CHECK(cli::cmd_oracle(data("base.json"), o, e2) == cli::kError);
}

TEST_CASE("sweeps") {
    OutputDir out("sweep");
    {
        std::ostringstream o;
        std::ostringstream e;
        const auto solved = solve(load_config(data("base.json")).spec);
        const std::string cs = "1.0,1.2,1.4," + std::to_string(solved.c_star) + ",1.6,2.0";
        REQUIRE(cli::cmd_sweep(data("base.json"), "c-grid", cs, o, e) == cli::kOk);
        const auto rows = lines(o.str());
        REQUIRE(rows.size() == 7);
        CHECK(rows.front() == "c,q,delta_c,lambda_c,v_c");
        double best = -1.0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            best = std::max(best, std::stod(rows[i].substr(rows[i].rfind(',') + 1)));
        }
        CHECK(best == doctest::Approx(solved.value).epsilon(1e-6));
        CHECK(slurp(out.path / "sweep_c-grid.csv") == o.str());
    }
    {
        std::ostringstream o;
        std::ostringstream e;
        REQUIRE(cli::cmd_sweep(data("base.json"), "rho0", "0,0.75,1.5", o, e) == cli::kOk);
        const auto rows = lines(o.str());
        REQUIRE(rows.size() == 4);
        CHECK(rows.front() == "param,classification,c_star,value");
        double previous = -1.0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double v = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
            CHECK(v >= previous);
            previous = v;
        }
    }
    {
        std::ostringstream o;
        std::ostringstream e;
        CHECK(cli::cmd_sweep(data("base.json"), "delta", "0.3,0.6", o, e) == cli::kOk);
        CHECK(cli::cmd_sweep(data("base.json"), "beta", "0.5,1", o, e) == cli::kOk);
    }
    std::ostringstream o;
    std::ostringstream e;
    CHECK(cli::cmd_sweep(data("base.json"), "rho0", "", o, e) == cli::kError);
    CHECK(cli::cmd_sweep(data("base.json"), "gamma", "1", o, e) == cli::kError);
    CHECK(cli::cmd_sweep(data("base.json"), "rho0", "1,x", o, e) == cli::kError);
    CHECK(cli::cmd_sweep(data("base.json"), "c-grid", "1e9", o, e) == cli::kError);
}

TEST_CASE("binary exit codes") {
    OutputDir out("binary");
    CHECK(run_binary("solve " + data("arbitrage.json").string()) == cli::kError);
    CHECK(run_binary("solve " + data("cvar_lognormal.json").string()) == cli::kUnbounded);
    CHECK(run_binary("solve " + data("cvar_truncated.json").string()) == cli::kNoOptimum);
    CHECK(run_binary("oracle " + data("two_state.json").string()) == cli::kOk);
    CHECK(run_binary("") == cli::kError);
    CHECK(run_binary("frobnicate") == cli::kError);
    CHECK(run_binary("sweep " + data("base.json").string() + " --param rho0 --values ''") == cli::kError);
}
