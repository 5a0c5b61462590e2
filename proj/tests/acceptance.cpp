// Acceptance gate: one line per criterion, exit 0 only if every criterion
// holds.  Each body throws with a reason on failure and returns a short
// summary on success.  All arithmetic is exact; "zero" means identically
// zero as a rational function.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "jetcal/suites.hpp"

using namespace jetcal;
using namespace jetcal::suites;

namespace {

int failures = 0;

void check(bool ok, const std::string& why) {
    if (!ok) throw std::runtime_error(why);
}

void criterion(int num, const std::string& label, const std::function<std::string()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string verdict, detail;
    try {
        detail = body();
        verdict = "PASS";
    } catch (const std::exception& e) {
        detail = e.what();
        verdict = "FAIL";
        ++failures;
    }
    auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    std::cout << verdict << "  criterion " << num << " (" << label << "): " << detail << "  ["
              << ms / 1000.0 << " s]\n";
    std::cout.flush();
}

std::string require_suite(const Report& rep) {
    std::string failed;
    for (const Check& c : rep.checks)
        if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name + ": " + c.detail;
    check(failed.empty(), "failed checks — " + failed);
    return std::to_string(rep.checks.size()) + " checks passed";
}

std::string run_binary(const std::string& args, int* exit_code) {
    static int counter = 0;
    std::filesystem::path out = std::filesystem::temp_directory_path() /
                                ("acceptance_out_" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string(JETCAL_BIN) + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    if (!WIFEXITED(status)) throw std::runtime_error("driver did not exit normally");
    *exit_code = WEXITSTATUS(status);
    std::ifstream in(out, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::filesystem::remove(out);
    return ss.str();
}

}  // namespace

int main() {
    SuiteConfig cfg;  // seed 7 throughout

    criterion(1, "conformal diagram at n = 4, both flat signatures", [] {
        auto t0 = std::chrono::steady_clock::now();
        const std::vector<int> want_eq = {15, 60, 90, 60, 15};
        const std::vector<int> want_jet = {60, 160, 180, 96, 20};
        const std::vector<int> want_quot = {45, 100, 90, 36, 5};
        for (const MetricData& md : {euclidean_metric(4), minkowski_metric(4)}) {
            DimensionDiagram d = stable_sequence_dims(conformal_system(md));
            check(d.equation_row == want_eq, "equation row differs");
            check(d.jet_row == want_jet, "full jet row differs");
            check(d.quotient_row == want_quot, "quotient row differs");
        }
        double secs = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count() /
                      1000.0;
        check(secs < 60.0, "diagram computation exceeded sixty seconds");
        return std::string(
            "rows (15,60,90,60,15) / (60,160,180,96,20) / (45,100,90,36,5) for both metrics");
    });

    criterion(2, "parameter counts 10/11/15 and row additivity", [] {
        MetricData md = euclidean_metric(4);
        std::vector<std::pair<std::string, int>> want = {
            {"killing", 10}, {"weyl", 11}, {"conformal", 15}};
        for (const auto& [name, fiber] : want) {
            DimensionDiagram d = stable_sequence_dims(system_by_name(name, md));
            check(d.equation_dim == fiber,
                  name + " fiber dimension is " + std::to_string(d.equation_dim));
            for (int r = 0; r <= 4; ++r)
                check(d.equation_row[r] + d.quotient_row[r] == d.jet_row[r],
                      name + " additivity fails in degree " + std::to_string(r));
        }
        return std::string("fiber dimensions 10/11/15; equation + quotient = jet in every degree");
    });

    criterion(3, "affine coframe end-to-end", [] {
        Vars vars = make_vars({"x", "a1", "a2"});
        GroupAction act;
        act.n = 1;
        act.p = 2;
        act.vars = vars;
        act.motion = {parse_expr("a1*x + a2", vars)};
        act.identity = {Rat(1), Rat(0)};
        MaurerCartanData mc = mc_forms(act);
        Vars gv = make_vars({"a1", "a2"});
        check(mc.omega_matrix.at(0, 0) == parse_expr("1/a1", gv), "first coframe row differs");
        check(mc.omega_matrix.at(0, 1).is_zero(), "first coframe row differs");
        check(mc.omega_matrix.at(1, 0) == parse_expr("-a2/a1", gv), "second coframe row differs");
        check(mc.omega_matrix.at(1, 1) == RatFn::from_int(gv, 1), "second coframe row differs");
        check(maurer_cartan_residual(mc.omega, mc.c).is_zero(), "structure residual is nonzero");
        check(mc.c.at(1, 0, 1) == Rat(-1), "bracket constant differs");
        return std::string("coframe (1/a1)da1, da2 - (a2/a1)da1; residual zero; c(1,0,1) = -1");
    });

    criterion(4, "bracket identities and closure", [&cfg] {
        Report rep = suite_brackets(cfg);
        std::string summary = require_suite(rep);
        // the perturbed counterexample must fail with a nonzero witness
        bool saw = false;
        for (const Check& c : rep.checks)
            if (c.name == "perturbed_closure_fails") saw = c.pass;
        check(saw, "perturbed counterexample did not run");
        return summary + "; 20 random triples; affine closure holds, perturbed system refuted";
    });

    criterion(5, "defect compatibility and composition", [&cfg] {
        Report rep = suite_chi(cfg);
        return require_suite(rep) +
               "; 20 order-two and 10 order-three jets, 10 composable pairs";
    });

    criterion(6, "trace two-form exactness with curvature present", [&cfg] {
        Report rep = suite_prop31(cfg);
        std::string summary = require_suite(rep);
        MetricData md = curved_diagonal_metric(2);
        bool curved = false;
        for (int k = 0; k < md.n && !curved; ++k) curved = !md.gamma[k].is_zero();
        check(curved, "the curved-splitting fixture has vanishing connection coefficients");
        return summary + "; 10 exact closed two-forms; linear chain over a curved splitting";
    });

    criterion(7, "one-dimensional momenta equations", [] {
        Vars v1 = make_vars({"x"});
        MultiIndex z = MultiIndex::zeros(1), e = MultiIndex::unit(1, 0);
        DualSeries1D ds = dual_spencer_1d(2, v1);
        JetChart chart(v1, {{"s", 3}}, 1);
        std::vector<RatFn> rows;
        for (int r = 0; r < 3; ++r) {
            RatFn acc = RatFn::zero(chart.vars());
            for (int c = 0; c < 3; ++c) acc += chart.apply(ds.momenta.at(r, c), 0, c);
            rows.push_back(acc);
        }
        check(rows[0] == chart.jet(0, 0, e), "first momenta equation differs");
        check(rows[1] == chart.jet(0, 1, e) + chart.jet(0, 0, z), "second momenta equation differs");
        check(rows[2] == chart.jet(0, 2, e) + chart.jet(0, 1, z), "third momenta equation differs");
        AdjointResult ar = adjoint(ds.series);
        RatFn want = RatFn::zero(ar.witness.chart.vars());
        for (int r = 0; r < 3; ++r)
            want += ar.witness.chart.jet(0, r, z) * ar.witness.chart.jet(1, r, z);
        check(ar.witness.w.size() == 1 && ar.witness.w[0] == want,
              "divergence witness is not the componentwise pairing");
        check(witness_check(ds.series).is_zero(), "witness identity fails");
        return std::string("rows (s0', s1' + s0, s2' + s1); witness pairs momenta against the argument jet");
    });

    criterion(8, "adjoint algebra, inverse divergence, invariance", [&cfg] {
        Report rep = suite_adjoint(cfg);
        std::string summary = require_suite(rep);
        // witness identity on extra scalar operators beyond the matrix shapes
        Rng rng(0xacce97);
        Vars v2 = standard_chart(2);
        auto mus = multi_indices_up_to(2, 3);
        for (int t = 0; t < 20; ++t) {
            OperatorMatrix D(1, 1, v2);
            DiffOp p(v2);
            for (int k = 0; k < 2; ++k)
                p.add_term(mus[rng.uniform(0, static_cast<long>(mus.size()) - 1)],
                           RatFn(rng.poly(v2, 2, 2, 2)));
            D.at(0, 0) = p;
            check(witness_check(D).is_zero(), "scalar witness identity fails");
        }
        return summary + "; 100 operators, 12 witness matrices plus 20 scalar ops, "
                         "12 inverse pairs, 6 invariance instances";
    });

    criterion(9, "flat gauge potentials and rigid motions", [&cfg] {
        Report rep = suite_rigid_body(cfg);
        return require_suite(rep) +
               "; 5 flat logarithmic derivatives; square-zero operators; skew velocities and half-curl";
    });

    criterion(10, "deterministic full verification run", [] {
        auto t0 = std::chrono::steady_clock::now();
        int code1 = 0, code2 = 0;
        std::string first = run_binary("verify all --seed 7 --format json", &code1);
        std::string second = run_binary("verify all --seed 7 --format json", &code2);
        check(code1 == 0 && code2 == 0, "full verification did not exit 0");
        check(!first.empty() && first == second, "reports are not byte-identical");
        double secs = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count() /
                      1000.0;
        check(secs < 300.0, "full verification exceeded five minutes");
        std::ostringstream ss;
        ss << "two runs byte-identical (" << first.size() << " bytes each), both in "
           << secs << " s";
        return ss.str();
    });

    std::cout << "acceptance: " << (10 - failures) << "/10 criteria passed\n";
    return failures == 0 ? 0 : 1;
}
