#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "jetcal/suites.hpp"

using namespace jetcal;
using namespace jetcal::suites;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    std::filesystem::path p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

// Runs the installed driver, returns its exit code, captures stdout.
int run_cli(const std::string& args, std::string* stdout_text = nullptr) {
    static int counter = 0;
    std::filesystem::path out =
        std::filesystem::temp_directory_path() / ("jetcal_out_" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string(JETCAL_BIN) + " " + args + " > " + out.string() + " 2> /dev/null";
    int status = std::system(cmd.c_str());
    if (stdout_text) *stdout_text = slurp(out);
    std::filesystem::remove(out);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing reports positions and validates shapes") {
    // malformed JSON: the error message carries the line/column of the defect
    try {
        parse_config("{ \"schema\": 1, oops }");
        FAIL("malformed config was accepted");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("line") != std::string::npos);
        REQUIRE(msg.find("column") != std::string::npos);
    }

    // schema gate
    REQUIRE_THROWS_AS(parse_config("{}"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("{\"schema\": 2}"), ConfigError);
    REQUIRE_NOTHROW(parse_config("{\"schema\": 1}"));

    // seed round trip
    REQUIRE(parse_config("{\"schema\": 1}").seed == 7);
    REQUIRE(parse_config("{\"schema\": 1, \"seed\": 42}").seed == 42);

    // unusable expressions are flagged with their location in the document
    REQUIRE_THROWS_AS(parse_config(R"({"schema": 1, "metrics": [
        {"name": "m", "vars": ["x1"], "g": [["1 +"]]}]})"),
                      ConfigError);

    // degenerate metric is rejected at parse time
    REQUIRE_THROWS_AS(parse_config(R"({"schema": 1, "metrics": [
        {"name": "m", "vars": ["x1", "x2"], "g": [["1", "0"], ["0", "0"]]}]})"),
                      ConfigError);

    // gauge maps must be unimodular
    REQUIRE_THROWS_AS(parse_config(R"({"schema": 1, "matrix_maps": [
        {"name": "m", "vars": ["x"], "entries": [["2", "0"], ["0", "1"]]}]})"),
                      ConfigError);
    REQUIRE_NOTHROW(parse_config(R"({"schema": 1, "matrix_maps": [
        {"name": "m", "vars": ["x"], "entries": [["1", "x^2"], ["0", "1"]]}]})"));

    // actions are validated for arity
    REQUIRE_THROWS_AS(parse_config(R"({"schema": 1, "actions": [
        {"base": ["x"], "params": ["a"], "motion": ["x", "x"], "identity": [1]}]})"),
                      ConfigError);
}

TEST_CASE("suite dispatch accepts the published names only") {
    SuiteConfig cfg;
    REQUIRE_THROWS_AS(run_suite("nope", cfg), ConfigError);
    REQUIRE_THROWS_AS(run_suites("ALL", cfg), ConfigError);
    REQUIRE(suite_names() == std::vector<std::string>{"mc", "brackets", "chi", "prop31", "adjoint",
                                                      "rigid-body"});
}

TEST_CASE("reports are deterministic for a fixed seed") {
    SuiteConfig cfg;
    cfg.seed = 11;
    std::string a = render_json(run_suites("rigid-body", cfg), cfg.seed);
    std::string b = render_json(run_suites("rigid-body", cfg), cfg.seed);
    REQUIRE(a == b);
    REQUIRE(a.find("\"status\": \"pass\"") != std::string::npos);

    std::string ta = render_table(run_suites("adjoint", cfg));
    std::string tb = render_table(run_suites("adjoint", cfg));
    REQUIRE(ta == tb);
    REQUIRE(ta.find("result PASS") != std::string::npos);
}

TEST_CASE("diagram runner resolves metrics and expectations") {
    // registry names
    REQUIRE_NOTHROW(builtin_metric("euclidean", 2));
    REQUIRE_NOTHROW(builtin_metric("minkowski", 3));
    REQUIRE_THROWS_AS(builtin_metric("hyperbolic", 2), ConfigError);

    // file metrics must match the requested dimension
    std::filesystem::path mfile = temp_file(
        "jetcal_metric.json",
        R"({"schema": 1, "vars": ["x1", "x2"], "g": [["2", "0"], ["0", "3"]]})");
    REQUIRE_NOTHROW(resolve_metric(mfile.string(), 2));
    REQUIRE_THROWS_AS(resolve_metric(mfile.string(), 4), ConfigError);

    DiagramRequest req;
    req.system = "killing";
    req.n = 2;
    DiagramOutcome out = run_diagram(req);
    REQUIRE(out.dims.equation_row == std::vector<int>{3, 6, 3});
    REQUIRE(out.dims.jet_row == std::vector<int>{12, 16, 6});
    REQUIRE(out.dims.quotient_row == std::vector<int>{9, 10, 3});
    REQUIRE(out.additivity);
    REQUIRE(!out.expected_match);

    // the constant-diagonal file metric is flat, so the rows agree with it
    req.metric = mfile.string();
    REQUIRE(run_diagram(req).dims == out.dims);
    std::filesystem::remove(mfile);

    // no tabulated rows away from n = 4
    req.metric = "euclidean";
    req.expect = "paper";
    REQUIRE_THROWS_AS(run_diagram(req), ConfigError);
    req.expect = "folklore";
    REQUIRE_THROWS_AS(run_diagram(req), ConfigError);

    // unknown system
    req.system = "projective";
    req.expect.clear();
    REQUIRE_THROWS_AS(run_diagram(req), ConfigError);

    // rendering carries the row data in both formats
    std::string json = render_diagram_json(out);
    REQUIRE(json.find("\"additivity\": true") != std::string::npos);
    REQUIRE(json.find("\"schema\": 1") != std::string::npos);
    std::string table = render_diagram_table(out);
    REQUIRE(table.find("equation row") != std::string::npos);
}

TEST_CASE("driver binary: exit codes and deterministic output") {
    std::string out;

    SECTION("passing suite exits 0") {
        REQUIRE(run_cli("verify adjoint --seed 7 --format json", &out) == 0);
        REQUIRE(out.find("\"status\": \"pass\"") != std::string::npos);
        REQUIRE(out.find("\"schema\": 1") != std::string::npos);
    }

    SECTION("failing check exits 1") {
        // expectation that contradicts the affine bracket table
        std::filesystem::path bad = temp_file("jetcal_bad_expect.json", R"({
          "schema": 1,
          "actions": [{
            "name": "affine-line",
            "base": ["x"], "params": ["a1", "a2"],
            "motion": ["a1*x + a2"], "identity": [1, 0],
            "expect": {"constants": [{"t": 1, "r": 0, "s": 1, "value": 5}]}
          }]})");
        REQUIRE(run_cli("verify mc --config " + bad.string() + " --format json", &out) == 1);
        REQUIRE(out.find("\"status\": \"fail\"") != std::string::npos);
        std::filesystem::remove(bad);
    }

    SECTION("unusable input exits 2") {
        REQUIRE(run_cli("verify nonsense", &out) == 2);
        std::filesystem::path broken = temp_file("jetcal_broken.json", "{ not json");
        REQUIRE(run_cli("verify mc --config " + broken.string(), &out) == 2);
        std::filesystem::remove(broken);
        REQUIRE(run_cli("diagram euclidean", &out) == 2);          // not a system name
        REQUIRE(run_cli("diagram killing --metric bogus", &out) == 2);
        REQUIRE(run_cli("", &out) == 2);                           // missing subcommand
        REQUIRE(run_cli("--help", &out) == 0);
    }

    SECTION("config fixture passes the coframe suite") {
        std::string fixture = std::string(JETCAL_FIXTURES) + "/affine.json";
        REQUIRE(run_cli("verify mc --config " + fixture, &out) == 0);
        REQUIRE(out.find("result PASS") != std::string::npos);
        REQUIRE(out.find("expected_coframe") != std::string::npos);
    }

    SECTION("same seed, same bytes") {
        std::string first, second;
        REQUIRE(run_cli("verify rigid-body --seed 7 --format json", &first) == 0);
        REQUIRE(run_cli("verify rigid-body --seed 7 --format json", &second) == 0);
        REQUIRE(first == second);
        REQUIRE(!first.empty());
    }

    SECTION("small diagram in json") {
        REQUIRE(run_cli("diagram killing --n 2 --format json", &out) == 0);
        REQUIRE(out.find("\"additivity\": true") != std::string::npos);
        REQUIRE(out.find("\"fiber_dim\": 3") != std::string::npos);
    }
}
