// SPDX-License-Identifier: MIT
#include <filesystem>
#include <map>
#include <sstream>

#include "doctest.h"
#include "pqvar/cli.hpp"
#include "pqvar/io.hpp"

using namespace pqvar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream o;
    std::ostringstream e;
    const int code = cli::run(args, o, e);
    return {code, o.str(), e.str()};
}

// Fresh scratch directory removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("pqvar_cli_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    [[nodiscard]] std::string str() const { return path.string(); }
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_file(e.path().string());
    return files;
}

void check_reparses(const fs::path& dir) {
    for (const auto& [name, text] : snapshot(dir)) {
        CAPTURE(name);
        if (name.ends_with(".json")) {
            const Json j = Json::parse(text);
            CHECK(j.contains("command"));
            CHECK(j.contains("config"));
        } else if (name.ends_with(".csv")) {
            if (text.rfind("x\\y,", 0) == 0) {
                CHECK_NOTHROW(field_from_csv(text));
            } else {
                CHECK_NOTHROW(path_from_csv(text));
            }
        } else {
            FAIL("unexpected artifact");
        }
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("command list") {
    const auto names = cli::command_names();
    for (const char* c : {"simulate", "variation", "young1d", "young2d", "localtime", "ito-check",
                          "condition-check", "examples"})
        CHECK(std::find(names.begin(), names.end(), c) != names.end());
}

TEST_CASE("condition-check: feasible case prints the alpha interval") {
    TempDir d("cond_ok");
    const auto r = run({"condition-check", "--p", "1.4", "--q", "1", "--out", d.str()});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("(4/7, 5/7)") != std::string::npos);
    CHECK(r.out.find("feasible") != std::string::npos);
    const Json j = Json::parse(read_file((d.path / "condition.json").string()));
    CHECK(j["condition"]["feasible"] == true);
}

TEST_CASE("condition-check: infeasible refuses with exit 2 unless forced") {
    TempDir d("cond_bad");
    const auto r = run({"condition-check", "--p", "2", "--q", "1", "--out", d.str()});
    CHECK(r.code == cli::kExitHypothesis);
    CHECK(r.out.find("infeasible") != std::string::npos);
    const auto f = run({"condition-check", "--p", "2", "--q", "1", "--force", "--out", d.str()});
    CHECK(f.code == cli::kExitOk);
}

TEST_CASE("input errors exit 1") {
    TempDir d("errors");
    CHECK(run({"frobnicate"}).code == cli::kExitInput);
    CHECK(run({"frobnicate"}).err.find("unknown command") != std::string::npos);
    CHECK(run({}).code == cli::kExitInput);
    CHECK(run({"condition-check", "--p", "abc", "--out", d.str()}).code == cli::kExitInput);
    CHECK(run({"condition-check", "--bogus", "1"}).code == cli::kExitInput);

    const auto bad = (d.path / "bad.json").string();
    write_file(bad, "{ not json");
    CHECK(run({"condition-check", "--config", bad, "--out", d.str()}).code == cli::kExitInput);
    write_file(bad, R"({"unknown_key": 3})");
    CHECK(run({"condition-check", "--config", bad, "--out", d.str()}).code == cli::kExitInput);
    write_file(bad, R"({"command": "simulate"})");
    CHECK(run({"condition-check", "--config", bad, "--out", d.str()}).code == cli::kExitInput);
    write_file(bad, R"([1, 2])");
    CHECK(run({"condition-check", "--config", bad, "--out", d.str()}).code == cli::kExitInput);
    CHECK(run({"condition-check", "--config", (d.path / "missing.json").string()}).code == cli::kExitInput);
    CHECK(run({"examples", "--name", "nope", "--out", d.str()}).code == cli::kExitInput);
}

TEST_CASE("config precedence: defaults < file < flags, echoed into artifacts") {
    TempDir d("precedence");
    const auto cfg = (d.path / "cfg.json").string();
    write_file(cfg, R"({"command": "condition-check", "p": 1.2, "q": 1.1})");
    REQUIRE(run({"condition-check", "--config", cfg, "--out", d.str()}).code == 0);
    Json j = Json::parse(read_file((d.path / "condition.json").string()));
    CHECK(j["config"]["p"] == 1.2);
    CHECK(j["config"]["q"] == 1.1);
    CHECK(j["config"]["delta"] == 0.0);  // default
    REQUIRE(run({"condition-check", "--config", cfg, "--p", "1.3", "--out", d.str()}).code == 0);
    j = Json::parse(read_file((d.path / "condition.json").string()));
    CHECK(j["config"]["p"] == 1.3);
    CHECK(j["config"]["q"] == 1.1);
    CHECK(j["command"] == "condition-check");
}

TEST_CASE("examples --name tanaka --seeds 10 writes ten reports") {
    TempDir d("tanaka");
    const auto r = run({"examples", "--name", "tanaka", "--seeds", "10", "--out", d.str()});
    REQUIRE(r.code == 0);
    for (int k = 0; k < 10; ++k) {
        const auto file = d.path / ("ito_" + std::to_string(k) + ".json");
        REQUIRE(fs::exists(file));
        const Json j = Json::parse(read_file(file.string()));
        CHECK(j["report"]["stream"] == k);
        CHECK(j["report"].contains("residual"));
    }
    check_reparses(d.path);
}

TEST_CASE("every command writes re-parsable artifacts and reruns are byte-identical") {
    const std::vector<std::vector<std::string>> runs{
        {"simulate", "--n-steps", "256", "--seeds", "2", "--drift", "linear(0.5,-1)"},
        {"variation", "--function", "x3cos", "--a", "-1", "--b", "1", "--n", "128", "--p", "1.5", "--dyadic-levels", "10"},
        {"variation", "--function", "xysin", "--n", "6", "--p", "2", "--q", "1"},
        {"young1d", "--f", "abs(0.3)", "--g", "polynomial(0,0,1)", "--hi", "10"},
        {"young2d", "--hi", "6", "--orders", "[4,16]"},
        {"localtime", "--n-steps", "1024", "--probe", "[1.5,3]", "--seeds", "2"},
        {"localtime", "--n-steps", "1024", "--estimator", "occupation", "--eps", "0.05"},
        {"ito-check", "--n-steps", "4096", "--schedule", "[256,1024,4096]", "--mollify-orders", "[8,32]"},
        {"ito-check", "--n-steps", "1024", "--schedule", "[256,1024]", "--function", "x3t3cos", "--form",
         "time-dependent"},
        {"condition-check", "--p", "1.1", "--q", "1.2", "--gamma", "1.5"},
    };
    int k = 0;
    for (auto args : runs) {
        CAPTURE(args[0]);
        TempDir d("rerun_" + std::to_string(k++));
        args.push_back("--out");
        args.push_back(d.str());
        const auto first = run(args);
        REQUIRE_MESSAGE(first.code == 0, first.err);
        const auto a = snapshot(d.path);
        CHECK_FALSE(a.empty());
        check_reparses(d.path);
        REQUIRE(run(args).code == 0);
        CHECK(snapshot(d.path) == a);
    }
}

TEST_CASE("variation reads a path file written by simulate") {
    TempDir d("pipe");
    REQUIRE(run({"simulate", "--n-steps", "128", "--out", d.str()}).code == 0);
    const auto r = run({"variation", "--input", (d.path / "X_0.csv").string(), "--p", "2", "--out", d.str()});
    CHECK(r.code == 0);
    const Json j = Json::parse(read_file((d.path / "variation.json").string()));
    CHECK(j["kind"] == "path");
    CHECK(j["report"]["exactness"] == "exact-on-grid");
}

}  // TEST_SUITE
