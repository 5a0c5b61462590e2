// Batch verification driver.
//
//   jetcal diagram <killing|weyl|conformal> [--n N] [--metric NAME|FILE]
//                  [--expect paper] [--format table|json]
//   jetcal verify  <mc|brackets|chi|prop31|adjoint|rigid-body|all>
//                  [--config FILE] [--seed N] [--format table|json]
//
// Exit codes: 0 all checks passed, 1 at least one check failed, 2 the input
// could not be used (unknown names, malformed config, shape mismatches).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jetcal/suites.hpp"

namespace {

struct DiagramArgs {
    jetcal::suites::DiagramRequest req;
    std::string format = "table";
};

struct VerifyArgs {
    std::string suite;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string format = "table";
};

int run_diagram_cmd(const DiagramArgs& args) {
    jetcal::suites::DiagramOutcome out = jetcal::suites::run_diagram(args.req);
    if (args.format == "json")
        std::cout << jetcal::suites::render_diagram_json(out);
    else
        std::cout << jetcal::suites::render_diagram_table(out);
    bool ok = out.additivity && (!out.expected_match || *out.expected_match);
    return ok ? 0 : 1;
}

int run_verify_cmd(const VerifyArgs& args) {
    jetcal::suites::SuiteConfig cfg;
    if (!args.config_path.empty()) cfg = jetcal::suites::load_config_file(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    std::vector<jetcal::suites::Report> reports = jetcal::suites::run_suites(args.suite, cfg);
    if (args.format == "json")
        std::cout << jetcal::suites::render_json(reports, cfg.seed);
    else
        std::cout << jetcal::suites::render_table(reports);
    for (const auto& rep : reports)
        if (!rep.ok()) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic checks for jet calculus, group coframes, and adjoints"};
    app.require_subcommand(1);

    DiagramArgs dargs;
    CLI::App* diagram = app.add_subcommand("diagram", "dimension diagram of a metric equation system");
    diagram->add_option("system", dargs.req.system, "killing, weyl, or conformal")->required();
    diagram->add_option("--n", dargs.req.n, "number of base coordinates (default 4)");
    diagram->add_option("--metric", dargs.req.metric,
                        "euclidean, minkowski, curved, scaled, or a metric JSON file");
    diagram->add_option("--expect", dargs.req.expect, "compare against the tabulated rows (value: paper)");
    diagram->add_option("--format", dargs.format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));

    VerifyArgs vargs;
    CLI::App* verify = app.add_subcommand("verify", "run a named check suite");
    verify->add_option("suite", vargs.suite,
                       "mc, brackets, chi, prop31, adjoint, rigid-body, or all")
        ->required();
    verify->add_option("--config", vargs.config_path, "JSON file with extra inputs and a seed");
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = verify->add_option("--seed", seed_value, "seed for randomized checks");
    verify->add_option("--format", vargs.format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is unusable input
    }

    try {
        if (diagram->parsed()) return run_diagram_cmd(dargs);
        if (*seed_opt) vargs.seed = seed_value;
        return run_verify_cmd(vargs);
    } catch (const jetcal::suites::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
