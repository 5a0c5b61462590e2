#pragma once

// Named verification suites with deterministic reports, the dimension-diagram
// runner for the three classical metric systems, and JSON fixture ingestion
// for the command-line driver.  Every suite draws its randomness from the
// configured seed, so a report is a pure function of (suite, config, seed).

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jetcal/diff_op.hpp"
#include "jetcal/gauge.hpp"
#include "jetcal/lie_equations.hpp"
#include "jetcal/nonlinear_spencer.hpp"
#include "jetcal/parser.hpp"
#include "jetcal/rng.hpp"

namespace jetcal::suites {

using Json = nlohmann::ordered_json;

// Unusable input: unknown names, malformed files, shape mismatches.  The
// driver maps this (and nothing else) to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- configuration -------------------------------------------------------

struct ActionSpec {
    std::string name;
    GroupAction action;
    std::optional<Matrix<RatFn>> expect_omega;               // over the group chart
    std::vector<std::tuple<int, int, int, Rat>> expect_constants;  // (t, r, s, value)
};

struct MetricSpec {
    std::string name;
    MetricData metric;
};

struct MatrixMapSpec {
    std::string name;
    MatrixMap map;  // 2 x 2, determinant 1
};

struct OperatorSpec {
    std::string name;
    OperatorMatrix op;
};

struct SuiteConfig {
    std::uint64_t seed = 7;
    std::vector<ActionSpec> actions;
    std::vector<MetricSpec> metrics;
    std::vector<MatrixMapSpec> matrix_maps;
    std::vector<OperatorSpec> operators;
};

namespace detail {

inline Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(e.what());  // message carries the byte position
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Vars vars_from_names(const Json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) throw ConfigError(where + ": expected a nonempty array of variable names");
    std::vector<std::string> names;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigError(where + ": variable names must be strings");
        names.push_back(v.get<std::string>());
    }
    try {
        return make_vars(names);
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline RatFn expr_field(const Json& j, const Vars& vars, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected an expression string");
    try {
        return parse_expr(j.get<std::string>(), vars);
    } catch (const ParseError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Rat rat_field(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return Rat(static_cast<long long>(j.get<long long>()));
    if (j.is_string()) {
        static const Vars dummy = make_vars({"t"});
        RatFn f = expr_field(j, dummy, where);
        if (!f.num().is_constant() || !f.den().is_constant())
            throw ConfigError(where + ": expected a constant rational value");
        return f.num().constant_value() / f.den().constant_value();
    }
    throw ConfigError(where + ": expected an integer or a rational literal string");
}

inline Matrix<RatFn> matrix_field(const Json& j, const Vars& vars, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Matrix<RatFn> m = ratfn_matrix(rows, cols, vars);
    for (int r = 0; r < rows; ++r) {
        const Json& row = j.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(where + ": ragged matrix rows");
        for (int c = 0; c < cols; ++c)
            m.at(r, c) = expr_field(row.at(c), vars,
                                    where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

inline DiffOp operator_entry(const Json& j, const Vars& vars, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of terms");
    DiffOp op(vars);
    const int n = static_cast<int>(vars->size());
    for (std::size_t t = 0; t < j.size(); ++t) {
        const Json& term = j.at(t);
        const std::string at = where + ".term[" + std::to_string(t) + "]";
        if (!term.is_object() || !term.contains("mu") || !term.contains("coeff"))
            throw ConfigError(at + ": expected {\"mu\": [...], \"coeff\": \"...\"}");
        const Json& muj = term.at("mu");
        if (!muj.is_array() || static_cast<int>(muj.size()) != n)
            throw ConfigError(at + ": 'mu' must list one exponent per chart variable");
        std::vector<int> e;
        for (const auto& v : muj) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw ConfigError(at + ": 'mu' entries must be nonnegative integers");
            e.push_back(static_cast<int>(v.get<long long>()));
        }
        op.add_term(MultiIndex(e), expr_field(term.at("coeff"), vars, at + ".coeff"));
    }
    return op;
}

}  // namespace detail

// Parses a fixture file: {"schema": 1, "seed"?, "actions"?, "metrics"?,
// "matrix_maps"?, "operators"?}.  Expressions use the calculator grammar of
// the scalar layer; all shape and solvability constraints are validated here
// so the suites only ever see usable definitions.
inline SuiteConfig parse_config(const std::string& text) {
    Json j = detail::parse_json_text(text);
    SuiteConfig cfg;
    try {
        if (!j.is_object()) throw ConfigError("top level must be a JSON object");
        if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
            j.at("schema").get<long long>() != 1)
            throw ConfigError("missing or unsupported \"schema\" (this build reads schema 1)");
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
                throw ConfigError("\"seed\" must be a nonnegative integer");
            cfg.seed = j.at("seed").get<std::uint64_t>();
        }
        for (std::size_t a = 0; j.contains("actions") && a < j.at("actions").size(); ++a) {
            const Json& aj = j.at("actions").at(a);
            const std::string where = "actions[" + std::to_string(a) + "]";
            ActionSpec spec;
            spec.name = aj.contains("name") ? aj.at("name").get<std::string>()
                                            : "action" + std::to_string(a);
            const Json& base = aj.at("base");
            const Json& params = aj.at("params");
            std::vector<std::string> names;
            for (const auto& v : base) names.push_back(v.get<std::string>());
            for (const auto& v : params) names.push_back(v.get<std::string>());
            Vars vars = make_vars(names);
            spec.action.n = static_cast<int>(base.size());
            spec.action.p = static_cast<int>(params.size());
            spec.action.vars = vars;
            for (std::size_t i = 0; i < aj.at("motion").size(); ++i)
                spec.action.motion.push_back(detail::expr_field(
                    aj.at("motion").at(i), vars, where + ".motion[" + std::to_string(i) + "]"));
            for (std::size_t s = 0; s < aj.at("identity").size(); ++s)
                spec.action.identity.push_back(detail::rat_field(
                    aj.at("identity").at(s), where + ".identity[" + std::to_string(s) + "]"));
            try {
                validate_action(spec.action);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where + ": " + e.what());
            }
            if (aj.contains("expect")) {
                const Json& ex = aj.at("expect");
                std::vector<std::string> gnames;
                for (const auto& v : params) gnames.push_back(v.get<std::string>());
                Vars gv = make_vars(gnames);
                if (ex.contains("omega"))
                    spec.expect_omega = detail::matrix_field(ex.at("omega"), gv, where + ".expect.omega");
                for (std::size_t t = 0; ex.contains("constants") && t < ex.at("constants").size(); ++t) {
                    const Json& cj = ex.at("constants").at(t);
                    spec.expect_constants.emplace_back(
                        cj.at("t").get<int>(), cj.at("r").get<int>(), cj.at("s").get<int>(),
                        detail::rat_field(cj.at("value"), where + ".expect.constants"));
                }
            }
            cfg.actions.push_back(std::move(spec));
        }
        for (std::size_t m = 0; j.contains("metrics") && m < j.at("metrics").size(); ++m) {
            const Json& mj = j.at("metrics").at(m);
            const std::string where = "metrics[" + std::to_string(m) + "]";
            Vars vars = detail::vars_from_names(mj.at("vars"), where + ".vars");
            Matrix<RatFn> g = detail::matrix_field(mj.at("g"), vars, where + ".g");
            std::string mname = mj.contains("name") ? mj.at("name").get<std::string>()
                                                    : "metric" + std::to_string(m);
            try {
                cfg.metrics.push_back({std::move(mname), make_metric(g)});
            } catch (const std::exception& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
        for (std::size_t m = 0; j.contains("matrix_maps") && m < j.at("matrix_maps").size(); ++m) {
            const Json& mj = j.at("matrix_maps").at(m);
            const std::string where = "matrix_maps[" + std::to_string(m) + "]";
            Vars vars = detail::vars_from_names(mj.at("vars"), where + ".vars");
            std::string mname = mj.contains("name") ? mj.at("name").get<std::string>()
                                                    : "map" + std::to_string(m);
            MatrixMapSpec spec{std::move(mname),
                               detail::matrix_field(mj.at("entries"), vars, where + ".entries")};
            if (spec.map.rows() != 2 || spec.map.cols() != 2)
                throw ConfigError(where + ": gauge maps must be 2 x 2");
            if (spec.map.det() != RatFn::from_int(vars, 1))
                throw ConfigError(where + ": gauge maps must have determinant 1");
            cfg.matrix_maps.push_back(std::move(spec));
        }
        for (std::size_t m = 0; j.contains("operators") && m < j.at("operators").size(); ++m) {
            const Json& oj = j.at("operators").at(m);
            const std::string where = "operators[" + std::to_string(m) + "]";
            Vars vars = detail::vars_from_names(oj.at("vars"), where + ".vars");
            const Json& rows = oj.at("rows");
            if (!rows.is_array() || rows.empty())
                throw ConfigError(where + ".rows: expected a nonempty array");
            const int R = static_cast<int>(rows.size());
            const int C = static_cast<int>(rows.at(0).size());
            OperatorSpec spec{oj.contains("name") ? oj.at("name").get<std::string>()
                                                  : "operator" + std::to_string(m),
                              OperatorMatrix(R, C, vars)};
            for (int r = 0; r < R; ++r) {
                if (static_cast<int>(rows.at(r).size()) != C)
                    throw ConfigError(where + ".rows: ragged rows");
                for (int c = 0; c < C; ++c)
                    spec.op.at(r, c) = detail::operator_entry(
                        rows.at(r).at(c), vars,
                        where + ".rows[" + std::to_string(r) + "][" + std::to_string(c) + "]");
            }
            cfg.operators.push_back(std::move(spec));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline SuiteConfig load_config_file(const std::string& path) {
    return parse_config(detail::read_text_file(path));
}

// ---- reports ---------------------------------------------------------------

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<Check> checks;

    int passed() const {
        int k = 0;
        for (const auto& c : checks) k += c.pass ? 1 : 0;
        return k;
    }
    bool ok() const { return passed() == static_cast<int>(checks.size()); }
};

namespace detail {

using CheckBody = std::pair<bool, std::string>;

template <typename F>
void run_check(Report& rep, const std::string& name, F&& body) {
    try {
        auto [pass, text] = body();
        rep.checks.push_back({name, pass, std::move(text)});
    } catch (const std::exception& e) {
        rep.checks.push_back({name, false, std::string("exception: ") + e.what()});
    }
}

// ---- built-in definitions ------------------------------------------------

inline GroupAction affine_line_action() {
    Vars vars = make_vars({"x", "a1", "a2"});
    GroupAction act;
    act.n = 1;
    act.p = 2;
    act.vars = vars;
    act.motion = {parse_expr("a1*x + a2", vars)};
    act.identity = {Rat(1), Rat(0)};
    return act;
}

inline GroupAction projective_line_action() {
    Vars vars = make_vars({"x", "a1", "a2", "a3"});
    GroupAction act;
    act.n = 1;
    act.p = 3;
    act.vars = vars;
    act.motion = {parse_expr("(a1*x + a2) / (a3*x + (1 + a2*a3)/a1)", vars)};
    act.identity = {Rat(1), Rat(0), Rat(0)};
    return act;
}

inline ActionSpec builtin_affine_spec() {
    ActionSpec spec;
    spec.name = "affine-line";
    spec.action = affine_line_action();
    Vars gv = make_vars({"a1", "a2"});
    Matrix<RatFn> w = ratfn_matrix(2, 2, gv);
    w.at(0, 0) = parse_expr("1/a1", gv);
    w.at(1, 0) = parse_expr("-a2/a1", gv);
    w.at(1, 1) = RatFn::from_int(gv, 1);
    spec.expect_omega = w;
    spec.expect_constants = {{1, 0, 1, Rat(-1)}, {1, 1, 0, Rat(1)}, {0, 0, 1, Rat(0)}};
    return spec;
}

inline ActionSpec builtin_projective_spec() {
    ActionSpec spec;
    spec.name = "projective-line";
    spec.action = projective_line_action();
    Vars gv = make_vars({"a1", "a2", "a3"});
    Matrix<RatFn> w = ratfn_matrix(3, 3, gv);
    w.at(0, 0) = parse_expr("(1 + a2*a3)/a1", gv);
    w.at(0, 1) = parse_expr("-a3", gv);
    w.at(1, 0) = parse_expr("-a2", gv);
    w.at(1, 1) = parse_expr("a1", gv);
    w.at(2, 0) = parse_expr("a3*(1 + a2*a3)/a1^2", gv);
    w.at(2, 1) = parse_expr("-a3^2/a1", gv);
    w.at(2, 2) = parse_expr("1/a1", gv);
    spec.expect_omega = w;
    spec.expect_constants = {{1, 0, 1, Rat(-2)}, {2, 0, 2, Rat(2)}, {0, 1, 2, Rat(-1)}};
    return spec;
}

inline Matrix<Rat> rat_rows(const std::vector<std::vector<Rat>>& rows) {
    Matrix<Rat> m = rat_matrix(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m.at(i, j) = rows[i][j];
    return m;
}

// Traceless 2 x 2 basis and its bracket table, matching the generators of the
// projective-line action.
inline LieRep traceless_rep() {
    LieRep rep;
    rep.p = 3;
    rep.d = 2;
    rep.basis = {rat_rows({{Rat(1), Rat(0)}, {Rat(0), Rat(-1)}}),
                 rat_rows({{Rat(0), Rat(1)}, {Rat(0), Rat(0)}}),
                 rat_rows({{Rat(0), Rat(0)}, {Rat(1), Rat(0)}})};
    return rep;
}

inline StructureConstants traceless_table() {
    StructureConstants c(3);
    c.set(1, 0, 1, Rat(-2));
    c.set(2, 0, 2, Rat(2));
    c.set(0, 1, 2, Rat(-1));
    return c;
}

inline MatrixMap identity_map(int d, const Vars& vars) {
    MatrixMap m = ratfn_matrix(d, d, vars);
    for (int i = 0; i < d; ++i) m.at(i, i) = RatFn::from_int(vars, 1);
    return m;
}

inline MatrixMap unipotent(const Vars& vars, const RatFn& p, bool upper) {
    MatrixMap m = identity_map(2, vars);
    m.at(upper ? 0 : 1, upper ? 1 : 0) = p;
    return m;
}

inline MatrixMap random_unimodular(Rng& rng, const Vars& vars, int factors) {
    MatrixMap a = identity_map(2, vars);
    for (int k = 0; k < factors; ++k) {
        RatFn p(rng.poly(vars, static_cast<int>(vars->size()), 2, 2));
        a = a * unipotent(vars, p, k % 2 == 0);
    }
    return a;
}

// Identity plus polynomial perturbations: unit-determinant first-order block,
// unconstrained higher layers, so the jet is generically non-holonomic.
inline JetMapSection random_map_jet(Rng& rng, const Vars& vars, int n, int order, int deg = 2) {
    JetMapSection f = JetMapSection::identity(n, order, vars);
    MultiIndex z = MultiIndex::zeros(n);
    for (int k = 0; k < n; ++k) f.set(k, z, f.at(k, z) + RatFn(rng.poly(vars, n, deg)));
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i)
            f.set(k, MultiIndex::unit(n, i), RatFn(rng.poly(vars, n, deg)));
    for (int ord = 2; ord <= order; ++ord)
        for (const MultiIndex& mu : multi_indices_of_order(n, ord))
            for (int k = 0; k < n; ++k) f.set(k, mu, RatFn(rng.poly(vars, n, deg)));
    return f;
}

inline JetSection random_field_jet(Rng& rng, const Vars& vars, int n, int order, int deg = 2) {
    JetSection xi(n, n, order, vars);
    for (const MultiIndex& mu : multi_indices_up_to(n, order))
        for (int k = 0; k < n; ++k) xi.set(k, mu, RatFn(rng.poly(vars, n, deg)));
    return xi;
}

// Map jet over two coordinates whose base is a polynomial shear with a
// closed-form inverse: (x1 + p(x2), x2 + c) inverts to (y1 - p(y2 - c), y2 - c).
struct ShearJet {
    JetMapSection jet;
    std::vector<RatFn> base_inverse;
};

inline ShearJet random_shear_jet(Rng& rng, const Vars& vars, int order) {
    const int n = 2;
    MultiIndex z = MultiIndex::zeros(n);
    JetMapSection f = JetMapSection::identity(n, order, vars);
    Poly p = rng.poly(vars, 1, 2);
    RatFn x1 = RatFn::variable(vars, 0), x2 = RatFn::variable(vars, 1);
    std::vector<RatFn> swap;
    for (std::size_t j = 0; j < vars->size(); ++j)
        swap.push_back(RatFn::variable(vars, static_cast<int>(j)));
    swap[0] = x2;
    RatFn p_of_x2 = RatFn(p).subst(swap);
    Rat c = rng.rat_nonzero(5);

    f.set(0, z, x1 + p_of_x2);
    f.set(1, z, x2 + RatFn::constant(vars, c));
    f.set(0, MultiIndex::unit(n, 1), RatFn(rng.poly(vars, n, 2)));
    for (int ord = 2; ord <= order; ++ord)
        for (const MultiIndex& mu : multi_indices_of_order(n, ord))
            for (int k = 0; k < n; ++k) f.set(k, mu, RatFn(rng.poly(vars, n, 2)));

    std::vector<RatFn> shift;
    for (std::size_t j = 0; j < vars->size(); ++j)
        shift.push_back(RatFn::variable(vars, static_cast<int>(j)));
    shift[1] = x2 - RatFn::constant(vars, c);
    return {f, {x1 - p_of_x2.subst(shift), x2 - RatFn::constant(vars, c)}};
}

inline DiffOp random_op(Rng& rng, const Vars& vars, int max_deg, int n_terms) {
    const int n = static_cast<int>(vars->size());
    auto mus = multi_indices_up_to(n, max_deg);
    DiffOp p(vars);
    for (int t = 0; t < n_terms; ++t) {
        const MultiIndex& mu = mus[rng.uniform(0, static_cast<long>(mus.size()) - 1)];
        p.add_term(mu, RatFn(rng.poly(vars, n, 2, 2)));
    }
    return p;
}

// Triangular map x_i -> x_i + p_i(x_{i+1..n}) + c_i with its back-substitution
// inverse.
inline std::pair<std::vector<RatFn>, std::vector<RatFn>> random_triangular_pair(Rng& rng,
                                                                                const Vars& vars) {
    const int n = static_cast<int>(vars->size());
    std::vector<RatFn> f;
    for (int i = 0; i < n; ++i) {
        Poly p = rng.poly(vars, n, 2);
        Poly kept = Poly::zero(vars);
        for (const auto& [mu, c] : p.terms()) {  // keep monomials in strictly later variables
            bool ok = true;
            for (int j = 0; j <= i; ++j)
                if (mu[j] > 0) ok = false;
            if (ok) kept += Poly::monomial(vars, mu, c);
        }
        f.push_back(RatFn::variable(vars, i) + RatFn(kept) +
                    RatFn::constant(vars, rng.rat(3, 2)));
    }
    std::vector<RatFn> g(n, RatFn::zero(vars));
    std::vector<RatFn> images;
    for (int j = 0; j < n; ++j) images.push_back(RatFn::variable(vars, j));
    for (int i = n - 1; i >= 0; --i) {
        RatFn shift = f[i] - RatFn::variable(vars, i);
        g[i] = RatFn::variable(vars, i) - shift.subst(images);
        images[i] = g[i];
    }
    return {std::move(f), std::move(g)};
}

// Second-order system cutting out the affine fields of the plane.
inline LinearSystem affine_plane_system(const Vars& vars) {
    LinearSystem sys(2, 2, 2, vars);
    for (int k = 0; k < 2; ++k)
        for (const MultiIndex& mu : multi_indices_of_order(2, 2)) {
            LinearEquation eq;
            eq.add_term(k, mu, RatFn::from_int(vars, 1));
            sys.add(eq);
        }
    return sys;
}

inline std::string plural(int k, const std::string& noun) {
    return std::to_string(k) + " " + noun + (k == 1 ? "" : "s");
}

}  // namespace detail

// ---- suite: mc -------------------------------------------------------------

inline Report suite_mc(const SuiteConfig& cfg) {
    Report rep{"mc", cfg.seed, {}};
    std::vector<ActionSpec> actions = cfg.actions;
    if (actions.empty()) {
        actions.push_back(detail::builtin_affine_spec());
        actions.push_back(detail::builtin_projective_spec());
    }
    for (const ActionSpec& spec : actions) {
        std::optional<MaurerCartanData> mc;
        detail::run_check(rep, spec.name + ".coframe", [&]() -> detail::CheckBody {
            mc = mc_forms(spec.action, cfg.seed);
            return {true, "transport equations solved and verified symbolically"};
        });
        if (!mc) continue;
        detail::run_check(rep, spec.name + ".identity_normalization", [&]() -> detail::CheckBody {
            const int p = spec.action.p;
            std::vector<Rat> at_e = spec.action.identity;
            for (int r = 0; r < p; ++r)
                for (int s = 0; s < p; ++s)
                    if (mc->omega_matrix.at(r, s).eval(at_e) != (r == s ? Rat(1) : Rat(0)))
                        return {false, "coframe is not the identity at the trivial parameters"};
            return {true, "coframe reduces to the identity at the trivial parameters"};
        });
        detail::run_check(rep, spec.name + ".structure_residual", [&]() -> detail::CheckBody {
            if (!maurer_cartan_residual(mc->omega, mc->c).is_zero())
                return {false, "structure residual is nonzero"};
            return {true, "structure residual identically zero"};
        });
        detail::run_check(rep, spec.name + ".bracket_table", [&]() -> detail::CheckBody {
            if (!mc->c.is_lie_algebra()) return {false, "bracket table violates antisymmetry or Jacobi"};
            return {true, "bracket table is antisymmetric and satisfies Jacobi"};
        });
        if (spec.expect_omega) {
            detail::run_check(rep, spec.name + ".expected_coframe", [&]() -> detail::CheckBody {
                const Matrix<RatFn>& want = *spec.expect_omega;
                if (want.rows() != mc->omega_matrix.rows() || want.cols() != mc->omega_matrix.cols())
                    return {false, "expected coframe has the wrong shape"};
                for (int r = 0; r < want.rows(); ++r)
                    for (int s = 0; s < want.cols(); ++s)
                        if (mc->omega_matrix.at(r, s) != want.at(r, s))
                            return {false, "entry (" + std::to_string(r) + "," + std::to_string(s) +
                                               ") differs from the expected coframe"};
                return {true, "coframe matches the expected closed form"};
            });
        }
        if (!spec.expect_constants.empty()) {
            detail::run_check(rep, spec.name + ".expected_constants", [&]() -> detail::CheckBody {
                for (const auto& [t, r, s, v] : spec.expect_constants)
                    if (mc->c.at(t, r, s) != v)
                        return {false, "c(" + std::to_string(t) + "," + std::to_string(r) + "," +
                                           std::to_string(s) + ") = " + to_string(mc->c.at(t, r, s)) +
                                           ", expected " + to_string(v)};
                return {true, detail::plural(static_cast<int>(spec.expect_constants.size()),
                                             "tabulated constant") + " matched"};
            });
        }
    }
    return rep;
}

// ---- suite: brackets --------------------------------------------------------

inline Report suite_brackets(const SuiteConfig& cfg) {
    Report rep{"brackets", cfg.seed, {}};

    detail::run_check(rep, "frozen_line_bracket", [&]() -> detail::CheckBody {
        Vars vars = make_vars({"x"});
        JetSection xi(1, 1, 1, vars), eta(1, 1, 1, vars);
        xi.set(0, MultiIndex({0}), parse_expr("x^2", vars));
        xi.set(0, MultiIndex({1}), RatFn::from_int(vars, 1));
        eta.set(0, MultiIndex({0}), RatFn::variable(vars, 0));
        eta.set(0, MultiIndex({1}), RatFn::from_int(vars, 3));
        JetSection br = differential_bracket(xi, eta);
        if (br.at(0, MultiIndex({0})) != parse_expr("-x^2", vars) ||
            !br.at(0, MultiIndex({1})).is_zero())
            return {false, "bracket of the frozen first-order pair is wrong"};
        return {true, "frozen first-order pair reproduced"};
    });

    detail::run_check(rep, "generic_component_formulas", [&]() -> detail::CheckBody {
        std::vector<std::string> names = {"x"};
        for (std::string p : {"a", "b"})
            for (int j = 0; j <= 2; ++j)
                for (int k = 0; k <= 2; ++k) names.push_back(p + std::to_string(j) + std::to_string(k));
        Vars gv = make_vars(names);
        auto generic = [&](const std::string& p) {
            JetSection s(1, 1, 2, gv);
            for (int j = 0; j <= 2; ++j) {
                RatFn comp = RatFn::zero(gv);
                for (int k = 0; k <= 2; ++k)
                    comp += RatFn::variable(gv, p + std::to_string(j) + std::to_string(k)) *
                            RatFn::variable(gv, 0).pow(k);
                s.set(0, MultiIndex({j}), comp);
            }
            return s;
        };
        JetSection X = generic("a"), Y = generic("b");
        JetSection B = differential_bracket(X, Y);
        auto c = [&](const JetSection& s, int j) { return s.at(0, MultiIndex({j})); };
        RatFn e0 = c(X, 0) * c(Y, 0).derive(0) - c(Y, 0) * c(X, 0).derive(0);
        RatFn e1 = c(X, 0) * c(Y, 1).derive(0) - c(Y, 0) * c(X, 1).derive(0);
        RatFn e2 = c(X, 1) * c(Y, 2) - c(Y, 1) * c(X, 2) + c(X, 0) * c(Y, 2).derive(0) -
                   c(Y, 0) * c(X, 2).derive(0);
        if (c(B, 0) != e0 || c(B, 1) != e1 || c(B, 2) != e2)
            return {false, "a displayed component formula does not match"};
        return {true, "all three displayed component formulas match with free coefficients"};
    });

    detail::run_check(rep, "jacobi_and_lift_independence", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xb2ac);
        int done = 0;
        for (int t = 0; t < 20; ++t) {
            const int n = 1 + t % 2;
            const int q = 2;
            Vars vars = standard_chart(n);
            JetSection X = detail::random_field_jet(rng, vars, n, q);
            JetSection Y = detail::random_field_jet(rng, vars, n, q);
            JetSection Z = detail::random_field_jet(rng, vars, n, q);
            JetSection lx = X.lift_zero(q + 1), ly = Y.lift_zero(q + 1);
            for (const MultiIndex& mu : multi_indices_of_order(n, q + 1))
                for (int k = 0; k < n; ++k) {
                    lx.set(k, mu, RatFn(rng.poly(vars, n, 2)));
                    ly.set(k, mu, RatFn(rng.poly(vars, n, 2)));
                }
            JetSection base = differential_bracket(X, Y);
            if (differential_bracket(X, Y, lx, ly) != base)
                return {false, "bracket depends on the choice of lifts"};
            if (base != differential_bracket(Y, X) * Rat(-1))
                return {false, "bracket is not antisymmetric"};
            JetSection j1 = differential_bracket(base, Z);
            JetSection j2 = differential_bracket(differential_bracket(Y, Z), X);
            JetSection j3 = differential_bracket(differential_bracket(Z, X), Y);
            if (!(j1 + j2 + j3).is_zero()) return {false, "Jacobi residual is nonzero"};
            ++done;
        }
        return {true, detail::plural(done, "random order-two triple") +
                          ": lift independence, antisymmetry, Jacobi"};
    });

    detail::run_check(rep, "affine_closure", [&]() -> detail::CheckBody {
        ClosureReport cr = bracket_closure(detail::affine_plane_system(standard_chart(2)));
        if (!cr.closed) return {false, "affine system is not bracket-closed"};
        if (cr.basis.size() != 6)
            return {false, "affine kernel has dimension " + std::to_string(cr.basis.size())};
        return {true, "six-parameter affine kernel closes under the bracket"};
    });

    detail::run_check(rep, "rigid_closure", [&]() -> detail::CheckBody {
        ClosureReport cr = bracket_closure(killing_system(euclidean_metric(2)));
        if (!cr.closed || cr.basis.size() != 3)
            return {false, "flat rigid kernel is not a three-parameter closed family"};
        return {true, "three-parameter rigid kernel closes under the bracket"};
    });

    detail::run_check(rep, "perturbed_closure_fails", [&]() -> detail::CheckBody {
        MetricData e2 = euclidean_metric(2);
        LinearSystem kil = killing_system(e2);
        LinearSystem bent(2, 2, 2, e2.vars);
        MultiIndex xx = MultiIndex::unit(2, 0).inc(0);
        for (const auto& eq : kil.equations()) {
            LinearEquation copy = eq;
            if (eq.terms().size() == 1 && eq.terms().count({0, xx}) == 1)
                copy.add_term(1, MultiIndex::zeros(2), RatFn::from_int(e2.vars, -1));
            bent.add(copy);
        }
        ClosureReport cr = bracket_closure(bent);
        if (cr.closed) return {false, "perturbed system still closes"};
        if (cr.violations.empty()) return {false, "no violation witnesses produced"};
        for (const auto& v : cr.violations)
            if (v.residual.is_zero()) return {false, "violation carries a zero witness"};
        if (is_algebroid(bent) || !is_algebroid(kil))
            return {false, "closure predicate disagrees with the reports"};
        return {true, std::to_string(cr.violations.size()) +
                          " violations with nonzero witnesses on the perturbed system"};
    });

    return rep;
}

// ---- suite: chi --------------------------------------------------------------

inline Report suite_chi(const SuiteConfig& cfg) {
    Report rep{"chi", cfg.seed, {}};

    detail::run_check(rep, "holonomic_vanishing", [&]() -> detail::CheckBody {
        Vars v2 = standard_chart(2);
        std::vector<RatFn> f = {parse_expr("x1 + x2^2", v2), parse_expr("x2 + x1^3", v2)};
        if (!spencer_chi(jet_prolong_map(f, 2)).is_zero() ||
            !spencer_chi(jet_prolong_map(f, 3)).is_zero())
            return {false, "defect of a holonomic jet is nonzero"};
        return {true, "prolonged maps at orders two and three have zero defect"};
    });

    detail::run_check(rep, "frozen_defect", [&]() -> detail::CheckBody {
        Vars v1 = make_vars({"x"});
        MultiIndex z = MultiIndex::zeros(1), e = MultiIndex::unit(1, 0);
        RatFn h = parse_expr("x^3 + 2*x", v1);
        JetMapSection f = JetMapSection::identity(1, 2, v1);
        f.set(0, e.inc(0), h);
        SpencerChi chi = spencer_chi(f);
        if (!chi.at(0, z, 0).is_zero() || chi.at(0, e, 0) != -h)
            return {false, "frozen one-coordinate defect is wrong"};
        return {true, "single second-order defect recovered exactly"};
    });

    detail::run_check(rep, "first_identity_order_one", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xc41a);
        int done = 0;
        for (int t = 0; t < 20; ++t) {
            const int n = 1 + t % 2;
            Vars vars = standard_chart(n);
            SpencerChi chi = spencer_chi(detail::random_map_jet(rng, vars, n, 2));
            if (chi.is_zero()) return {false, "random jet came out holonomic"};
            if (!chi_cc_residual(chi).is_zero() || !chi_cc_residual_via_a(chi).is_zero())
                return {false, "compatibility residual is nonzero at order one"};
            ++done;
        }
        return {true, detail::plural(done, "random non-holonomic order-two jet") +
                          ": both residual forms vanish"};
    });

    detail::run_check(rep, "second_identity_order_two", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xc42b);
        int done = 0;
        for (int t = 0; t < 10; ++t) {
            const int n = 1 + t % 2;
            const int deg = n == 1 ? 2 : 1;
            Vars vars = standard_chart(n);
            SpencerChi chi = spencer_chi(detail::random_map_jet(rng, vars, n, 3, deg));
            if (chi.is_zero()) return {false, "random jet came out holonomic"};
            if (!chi_cc_residual(chi).is_zero() || !chi_cc_residual_via_a(chi).is_zero())
                return {false, "compatibility residual is nonzero at order two"};
            ++done;
        }
        return {true, detail::plural(done, "random non-holonomic order-three jet") +
                          ": both residual forms vanish"};
    });

    detail::run_check(rep, "cocycle_rule", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xc43c);
        Vars vars = standard_chart(2);
        int done = 0;
        for (int t = 0; t < 10; ++t) {
            const int order = t < 6 ? 2 : 3;
            detail::ShearJet f = detail::random_shear_jet(rng, vars, order);
            JetMapSection g = detail::random_map_jet(rng, vars, 2, order, 1);
            if (!dbar_cocycle_residual(g, f.jet, f.base_inverse).is_zero())
                return {false, "composition rule residual is nonzero"};
            ++done;
        }
        return {true, detail::plural(done, "composable pair") + ": defect of the composite equals "
                                                                "transported defect plus inner defect"};
    });

    detail::run_check(rep, "gauge_round_trip", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xc44d);
        Vars vars = standard_chart(2);
        for (int t = 0; t < 2; ++t) {
            SpencerChi chibar = spencer_chi(detail::random_map_jet(rng, vars, 2, 2, 1));
            detail::ShearJet f = detail::random_shear_jet(rng, vars, 2);
            SpencerChi moved = nl_gauge_transform(chibar, f.jet, f.base_inverse);
            if (!chi_cc_residual(moved).is_zero())
                return {false, "transported defect violates the compatibility identity"};
            JetMapSection finv = jet_invert(f.jet, f.base_inverse);
            std::vector<RatFn> fb = f.jet.base_part();
            SpencerChi back = nl_gauge_transform(moved, finv, fb);
            if (!(back == chibar)) return {false, "gauge action does not invert"};
        }
        return {true, "2 round trips: action by a map then its inverse restores the defect"};
    });

    return rep;
}

// ---- suite: prop31 -----------------------------------------------------------

inline Report suite_prop31(const SuiteConfig& cfg) {
    Report rep{"prop31", cfg.seed, {}};

    detail::run_check(rep, "trace_exactness", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0x9e31);
        int done = 0, nonzero = 0;
        for (int t = 0; t < 10; ++t) {
            const int n = t < 8 ? 2 : 3;
            const int deg = n == 2 ? 2 : 1;
            Vars vars = standard_chart(n);
            SpencerChi chi = spencer_chi(detail::random_map_jet(rng, vars, n, 3, deg));
            auto [phi, residual] = phi_2form(chi);
            if (!residual.is_zero()) return {false, "trace two-form differs from the exact one"};
            if (!phi.ext_d().is_zero()) return {false, "trace two-form is not closed"};
            if (!phi.is_zero()) ++nonzero;
            ++done;
        }
        if (nonzero == 0) return {false, "every sampled two-form vanished"};
        return {true, detail::plural(done, "random order-three jet") + ": trace two-form exact and closed (" +
                          std::to_string(nonzero) + " nonzero)"};
    });

    detail::run_check(rep, "holonomic_trace_zero", [&]() -> detail::CheckBody {
        Vars v2 = standard_chart(2);
        std::vector<RatFn> f = {parse_expr("x1 + x2^2", v2), parse_expr("x2 + x1*x2", v2)};
        auto [phi, residual] = phi_2form(spencer_chi(jet_prolong_map(f, 3)));
        if (!phi.is_zero() || !residual.is_zero())
            return {false, "holonomic jet has a nonzero trace two-form"};
        return {true, "holonomic jet: trace two-form vanishes"};
    });

    auto linear_chain = [&](const std::string& name, const MetricData& md, int reps) {
        detail::run_check(rep, name, [&]() -> detail::CheckBody {
            bool curved = false;
            for (int k = 0; k < md.n && !curved; ++k) curved = !md.gamma[k].is_zero();
            Rng rng(cfg.seed ^ 0x9e32);
            for (int t = 0; t < reps; ++t) {
                JetSection xi = detail::random_field_jet(rng, md.vars, md.n, 3, 1);
                LinearContraction lc = linear_F_2form(xi, md);
                if (!lc.dd_residual.is_zero()) return {false, "square of the first-order operator is nonzero"};
                if (!lc.chain_residual.is_zero()) return {false, "trace two-form differs from the exact one"};
                if (!(lc.f2 == lc.a_trace.ext_d())) return {false, "exactness identity fails"};
            }
            return {true, detail::plural(reps, "random order-three section") +
                              (curved ? " through a curved splitting" : " through the flat splitting")};
        });
    };
    linear_chain("linear_chain_flat", euclidean_metric(2), 2);
    linear_chain("linear_chain_curved", curved_diagonal_metric(2), 3);
    linear_chain("linear_chain_conformal", scaled_flat_metric(2), 2);
    for (const MetricSpec& ms : cfg.metrics) linear_chain(ms.name + ".linear_chain", ms.metric, 2);

    detail::run_check(rep, "holonomic_linear_zero", [&]() -> detail::CheckBody {
        MetricData md = curved_diagonal_metric(2);
        Vars vars = md.vars;
        std::vector<RatFn> comp = {parse_expr("x1^2 - x2", vars), parse_expr("x1*x2", vars)};
        LinearContraction lc = linear_F_2form(jet_prolong_section(comp, 2, 3), md);
        if (!lc.x.is_zero() || !lc.f2.is_zero() || !lc.a_trace.is_zero())
            return {false, "holonomic section leaves a nonzero linear defect"};
        return {true, "holonomic section: linear defect and trace forms vanish"};
    });

    return rep;
}

// ---- suite: adjoint ----------------------------------------------------------

inline Report suite_adjoint(const SuiteConfig& cfg) {
    Report rep{"adjoint", cfg.seed, {}};

    detail::run_check(rep, "involution_and_contravariance", [&]() -> detail::CheckBody {
        std::vector<Vars> charts = {make_vars({"x"}), make_vars({"x1", "x2"}),
                                    make_vars({"x1", "x2", "x3"})};
        Rng rng(cfg.seed ^ 0xad01);
        int count = 0;
        for (int rep_i = 0; rep_i < 50; ++rep_i) {
            const Vars& vars = charts[rep_i % 3];
            DiffOp p = detail::random_op(rng, vars, 3, 2);
            DiffOp q = detail::random_op(rng, vars, 2, 2);
            if (adjoint_op(adjoint_op(p)) != p || adjoint_op(adjoint_op(q)) != q)
                return {false, "double adjoint differs from the original"};
            if (adjoint_op(op_mul(p, q)) != op_mul(adjoint_op(q), adjoint_op(p)))
                return {false, "adjoint of a product is not the reversed product of adjoints"};
            count += 2;
        }
        return {true, detail::plural(count, "random operator") +
                          ": double adjoint and product reversal"};
    });

    detail::run_check(rep, "witness_random_matrices", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0xad02);
        struct Shape {
            int rows, cols, nvars, deg;
        };
        std::vector<Shape> shapes = {{1, 1, 1, 3}, {2, 2, 2, 2}, {2, 3, 2, 1}, {1, 1, 3, 2}};
        std::vector<Vars> charts = {make_vars({"x"}), make_vars({"x1", "x2"}),
                                    make_vars({"x1", "x2", "x3"})};
        int done = 0;
        for (const Shape& s : shapes)
            for (int rep_i = 0; rep_i < 3; ++rep_i) {
                const Vars& vars = charts[s.nvars - 1];
                OperatorMatrix D(s.rows, s.cols, vars);
                for (int r = 0; r < s.rows; ++r)
                    for (int c = 0; c < s.cols; ++c) D.at(r, c) = detail::random_op(rng, vars, s.deg, 2);
                if (!witness_check(D).is_zero())
                    return {false, "pairing minus adjoint pairing is not the stored divergence"};
                ++done;
            }
        return {true, std::to_string(done) +
                          " random operator matrices: divergence witness certifies the adjoint"};
    });

    detail::run_check(rep, "dual_series_rows", [&]() -> detail::CheckBody {
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
        if (rows[0] != chart.jet(0, 0, e) || rows[1] != chart.jet(0, 1, e) + chart.jet(0, 0, z) ||
            rows[2] != chart.jet(0, 2, e) + chart.jet(0, 1, z))
            return {false, "momenta equations differ from the displayed forms"};
        if (!(ds.raw_adjoint == om_adjoint(ds.series)))
            return {false, "raw adjoint disagrees with the adjoint of the series operator"};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if (ds.raw_adjoint.at(r, c) != ds.momenta.at(r, c) * RatFn::from_int(v1, -1))
                    return {false, "momenta are not the sign-flipped raw adjoint"};
        return {true, "order-two momenta rows match the displayed equations exactly"};
    });

    detail::run_check(rep, "dual_series_witness", [&]() -> detail::CheckBody {
        Vars v1 = make_vars({"x"});
        MultiIndex z = MultiIndex::zeros(1);
        DualSeries1D ds = dual_spencer_1d(2, v1);
        AdjointResult ar = adjoint(ds.series);
        RatFn want = RatFn::zero(ar.witness.chart.vars());
        for (int r = 0; r < 3; ++r)
            want += ar.witness.chart.jet(0, r, z) * ar.witness.chart.jet(1, r, z);
        if (ar.witness.w[0] != want)
            return {false, "boundary term is not the componentwise pairing"};
        if (!witness_check(ds.series).is_zero()) return {false, "witness identity fails"};
        return {true, "boundary term pairs the three test functions against the three components"};
    });

    detail::run_check(rep, "inverse_divergence", [&]() -> detail::CheckBody {
        Vars v2 = standard_chart(2);
        int done = 0;
        {
            std::vector<RatFn> f = {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)};
            std::vector<RatFn> g = {parse_expr("x1 - x2^2", v2), parse_expr("x2", v2)};
            for (const RatFn& r : lemma45_residual(f, g))
                if (!r.is_zero()) return {false, "fixed shear pair has a nonzero residual"};
            ++done;
        }
        {
            std::vector<RatFn> f = {parse_expr("3*x1 + x2", v2), parse_expr("x1 + x2", v2)};
            std::vector<RatFn> g = {parse_expr("x1/2 - x2/2", v2), parse_expr("-x1/2 + 3*x2/2", v2)};
            for (const RatFn& r : lemma45_residual(f, g))
                if (!r.is_zero()) return {false, "determinant-two linear pair has a nonzero residual"};
            ++done;
        }
        Rng rng(cfg.seed ^ 0xad03);
        for (int t = 0; t < 10; ++t) {
            Vars vars = t % 2 == 0 ? standard_chart(2) : standard_chart(3);
            auto [f, g] = detail::random_triangular_pair(rng, vars);
            for (const RatFn& r : lemma45_residual(f, g))
                if (!r.is_zero()) return {false, "random triangular pair has a nonzero residual"};
            ++done;
        }
        return {true, detail::plural(done, "mutually inverse pair") +
                          ": divergence of the normalized cofactor columns vanishes"};
    });

    detail::run_check(rep, "invariance_residual", [&]() -> detail::CheckBody {
        Vars v2 = standard_chart(2);
        Rng rng(cfg.seed ^ 0xad04);
        auto antisym2 = [&](const RatFn& w) {
            Matrix<RatFn> F = ratfn_matrix(2, 2, v2);
            F.at(0, 1) = w;
            F.at(1, 0) = -w;
            return F;
        };
        int done = 0;
        std::vector<std::vector<RatFn>> maps = {
            {RatFn::variable(v2, 0), RatFn::variable(v2, 1)},
            {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)},
            {parse_expr("x1 + x2^3", v2), parse_expr("2*x2 - 1", v2)},
            {parse_expr("x1 + x2^2", v2), parse_expr("x2 + x1^3", v2)},
        };
        for (const auto& f : maps) {
            InvarianceResidual res = em_invariance_residual(f, antisym2(RatFn(rng.poly(v2, 2, 2))));
            for (const RatFn& r : res.residual)
                if (!r.is_zero()) return {false, "invariance residual is nonzero"};
            for (const RatFn& h : res.hessian_contraction)
                if (!h.is_zero()) return {false, "hessian contraction against the alternating matrix is nonzero"};
            ++done;
        }
        Vars v3 = standard_chart(3);
        for (int t = 0; t < 2; ++t) {
            auto [f, g] = detail::random_triangular_pair(rng, v3);
            Matrix<RatFn> F = ratfn_matrix(3, 3, v3);
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    RatFn w = RatFn(rng.poly(v3, 3, 2, 2));
                    F.at(i, j) = w;
                    F.at(j, i) = -w;
                }
            InvarianceResidual res = em_invariance_residual(f, F);
            for (const RatFn& r : res.residual)
                if (!r.is_zero()) return {false, "three-coordinate invariance residual is nonzero"};
            ++done;
        }
        return {true, detail::plural(done, "instance") +
                          " including the identity map: transformed divergence matches"};
    });

    for (const OperatorSpec& spec : cfg.operators) {
        detail::run_check(rep, spec.name + ".witness", [&]() -> detail::CheckBody {
            if (!witness_check(spec.op).is_zero())
                return {false, "divergence witness does not certify the adjoint"};
            return {true, "divergence witness certifies the adjoint"};
        });
        detail::run_check(rep, spec.name + ".involution", [&]() -> detail::CheckBody {
            if (!(om_adjoint(om_adjoint(spec.op)) == spec.op))
                return {false, "double adjoint differs from the original"};
            return {true, "double adjoint restores the matrix"};
        });
    }

    return rep;
}

// ---- suite: rigid-body -------------------------------------------------------

inline Report suite_rigid_body(const SuiteConfig& cfg) {
    Report rep{"rigid-body", cfg.seed, {}};

    detail::run_check(rep, "pure_gauge_flat", [&]() -> detail::CheckBody {
        Vars vars = make_vars({"x", "y"});
        LieRep rp = detail::traceless_rep();
        StructureConstants c = detail::traceless_table();
        Rng rng(cfg.seed ^ 0x4b01);
        std::vector<MatrixMap> maps;
        maps.push_back(detail::unipotent(vars, parse_expr("x*y + 2", vars), true));
        maps.push_back(detail::unipotent(vars, parse_expr("x - y^2", vars), false));
        {
            MatrixMap S = ratfn_matrix(2, 2, vars);
            RatFn p = parse_expr("x*y", vars);
            S.at(0, 1) = -p;
            S.at(1, 0) = p;
            maps.push_back(cayley(S));
        }
        maps.push_back(detail::random_unimodular(rng, vars, 2));
        maps.push_back(detail::random_unimodular(rng, vars, 3));
        for (const MatrixMap& a : maps) {
            Form A = potential_form(rp, a, 2);
            if (!curvature(A, c).is_zero()) return {false, "a logarithmic derivative is not flat"};
        }
        return {true, detail::plural(static_cast<int>(maps.size()), "gauge map") +
                          " (shears, a rational rotation, random products): zero curvature"};
    });

    for (const MatrixMapSpec& spec : cfg.matrix_maps) {
        detail::run_check(rep, spec.name + ".pure_gauge_flat", [&]() -> detail::CheckBody {
            const int nv = static_cast<int>(spec.map.at(0, 0).vars()->size());
            Form A = potential_form(detail::traceless_rep(), spec.map, nv);
            if (!curvature(A, detail::traceless_table()).is_zero())
                return {false, "logarithmic derivative is not flat"};
            return {true, "zero curvature over " + detail::plural(nv, "coordinate")};
        });
    }

    detail::run_check(rep, "exterior_square_zero", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0x4b02);
        Vars vars = standard_chart(3);
        for (int t = 0; t < 4; ++t) {
            Form w(vars, 3, t % 2, t < 2 ? ValueSpace::scalar() : ValueSpace::lie(2));
            for (int v = 0; v < w.values().dim(); ++v)
                for (const auto& I : index_tuples(3, t % 2))
                    if (rng.chance(3, 4)) w.add(v, I, rng.ratfn_poly(vars, 3, 2, 2));
            if (!w.ext_d().ext_d().is_zero()) return {false, "exterior square is nonzero"};
        }
        return {true, "4 random forms: applying the differential twice gives zero"};
    });

    detail::run_check(rep, "series_square_zero", [&]() -> detail::CheckBody {
        Rng rng(cfg.seed ^ 0x4b03);
        Vars vars = standard_chart(3);
        for (int t = 0; t < 4; ++t) {
            Form w(vars, 3, 1, ValueSpace::symbols(3, 2, 3));
            for (int v = 0; v < w.values().dim(); ++v)
                for (const auto& I : index_tuples(3, 1))
                    if (rng.chance(1, 2)) w.add(v, I, rng.ratfn_poly(vars, 3, 2, 2));
            if (!spencer_delta(spencer_delta(w)).is_zero())
                return {false, "algebraic shift squared is nonzero"};
        }
        return {true, "4 random symbol-valued forms: the algebraic shift squares to zero"};
    });

    detail::run_check(rep, "frame_velocity_skew", [&]() -> detail::CheckBody {
        Vars vars = make_vars({"x1", "x2", "x3", "t"});
        const int t = 3;
        auto e = [&](const char* src) { return parse_expr(src, vars); };
        MatrixMap S = ratfn_matrix(3, 3, vars);
        S.at(0, 1) = -RatFn::variable(vars, t);
        S.at(1, 0) = RatFn::variable(vars, t);
        RigidMotion m1{cayley(S), {e("t"), e("2*t^2"), e("1 - t")}};
        validate_rigid(m1);

        Rng rng(cfg.seed ^ 0x4b04);
        MatrixMap S2 = ratfn_matrix(3, 3, vars);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                RatFn p(rng.poly(vars, 1, 2, 2));
                std::vector<RatFn> tmap = {e("t"), e("0"), e("0"), e("0")};
                p = p.subst(tmap);
                S2.at(i, j) = p;
                S2.at(j, i) = -p;
            }
        RigidMotion m2{cayley(S2), {e("t^2"), e("t"), e("3 - t")}};
        validate_rigid(m2);

        for (const RigidMotion& m : {m1, m2}) {
            auto [Wb, ub] = body_velocity(m, t);
            auto [Ws, us] = space_velocity(m, t);
            if (!is_skew(Wb) || !is_skew(Ws))
                return {false, "a frame velocity matrix is not skew"};
            if (!(Ws == m.rot * Wb * m.rot.transpose()))
                return {false, "frame velocities are not conjugate"};
        }
        return {true, "2 motions: both logarithmic time derivatives are skew and conjugate"};
    });

    detail::run_check(rep, "half_curl", [&]() -> detail::CheckBody {
        Vars vars = make_vars({"x1", "x2", "x3", "t"});
        const int t = 3;
        auto e = [&](const char* src) { return parse_expr(src, vars); };
        Rng rng(cfg.seed ^ 0x4b05);
        for (int trial = 0; trial < 2; ++trial) {
            MatrixMap S = ratfn_matrix(3, 3, vars);
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    RatFn p(rng.poly(vars, 1, 2, 2));
                    std::vector<RatFn> tmap = {e("t"), e("0"), e("0"), e("0")};
                    p = p.subst(tmap);
                    S.at(i, j) = p;
                    S.at(j, i) = -p;
                }
            RigidMotion m{cayley(S), {e("t^2 - 1"), e("2*t"), e("t^3")}};
            auto [Ws, us] = space_velocity(m, t);
            VecField ax = axial(Ws);
            VecField curl = curl3(velocity_field(m, t));
            for (int i = 0; i < 3; ++i)
                if (curl[i] != ax[i] * Rat(2))
                    return {false, "curl of the velocity field is not twice the axial vector"};
        }
        return {true, "2 motions: angular velocity is half the curl of the velocity field"};
    });

    detail::run_check(rep, "momentum_divergence", [&]() -> detail::CheckBody {
        Vars vars = make_vars({"x", "y"});
        LieRep rp = detail::traceless_rep();
        StructureConstants c = detail::traceless_table();
        Rng rng(cfg.seed ^ 0x4b06);
        for (int trial = 0; trial < 2; ++trial) {
            MatrixMap a = detail::random_unimodular(rng, vars, 2);
            Matrix<RatFn> P = ratfn_matrix(2, 3, vars);
            for (int i = 0; i < 2; ++i)
                for (int s = 0; s < 3; ++s) P.at(i, s) = RatFn(rng.poly(vars, 2, 2, 2));
            for (const RatFn& r : divergence_identity_residual(rp, c, a, P, 2))
                if (!r.is_zero()) return {false, "conjugated momentum divergence identity fails"};
        }
        return {true, "2 random momenta: conjugation intertwines divergence and variational residual"};
    });

    return rep;
}

// ---- dispatch ----------------------------------------------------------------

inline std::vector<std::string> suite_names() {
    return {"mc", "brackets", "chi", "prop31", "adjoint", "rigid-body"};
}

inline Report run_suite(const std::string& name, const SuiteConfig& cfg) {
    if (name == "mc") return suite_mc(cfg);
    if (name == "brackets") return suite_brackets(cfg);
    if (name == "chi") return suite_chi(cfg);
    if (name == "prop31") return suite_prop31(cfg);
    if (name == "adjoint") return suite_adjoint(cfg);
    if (name == "rigid-body") return suite_rigid_body(cfg);
    throw ConfigError("unknown suite '" + name + "' (use mc, brackets, chi, prop31, adjoint, rigid-body, or all)");
}

inline std::vector<Report> run_suites(const std::string& name, const SuiteConfig& cfg) {
    if (name != "all") return {run_suite(name, cfg)};
    std::vector<Report> out;
    for (const std::string& s : suite_names()) out.push_back(run_suite(s, cfg));
    return out;
}

// ---- rendering ---------------------------------------------------------------

inline std::string render_table(const std::vector<Report>& reports) {
    std::ostringstream out;
    int passed = 0, total = 0;
    for (const Report& rep : reports) {
        out << "suite " << rep.suite << "   seed " << rep.seed << "\n";
        std::size_t width = 0;
        for (const Check& c : rep.checks) width = std::max(width, c.name.size());
        for (const Check& c : rep.checks) {
            out << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name
                << std::string(width - c.name.size() + 2, ' ') << c.detail << "\n";
        }
        out << "  " << rep.passed() << "/" << rep.checks.size() << " checks passed\n";
        passed += rep.passed();
        total += static_cast<int>(rep.checks.size());
    }
    const bool ok = passed == total;
    out << "result " << (ok ? "PASS" : "FAIL") << " (" << passed << "/" << total << " checks)\n";
    return out.str();
}

inline std::string render_json(const std::vector<Report>& reports, std::uint64_t seed) {
    Json j;
    j["schema"] = 1;
    j["command"] = "verify";
    j["seed"] = seed;
    j["suites"] = Json::array();
    int passed = 0, total = 0;
    for (const Report& rep : reports) {
        Json sj;
        sj["name"] = rep.suite;
        sj["checks"] = Json::array();
        for (const Check& c : rep.checks) {
            Json cj;
            cj["name"] = c.name;
            cj["status"] = c.pass ? "pass" : "fail";
            cj["detail"] = c.detail;
            sj["checks"].push_back(std::move(cj));
        }
        sj["passed"] = rep.passed();
        sj["total"] = rep.checks.size();
        j["suites"].push_back(std::move(sj));
        passed += rep.passed();
        total += static_cast<int>(rep.checks.size());
    }
    j["passed"] = passed;
    j["total"] = total;
    j["status"] = passed == total ? "pass" : "fail";
    return j.dump(2) + "\n";
}

// ---- dimension diagrams ------------------------------------------------------

struct DiagramRequest {
    std::string system = "killing";  // killing | weyl | conformal
    int n = 4;
    std::string metric = "euclidean";  // registry name or JSON file path
    std::string expect;                // empty or "paper"
};

struct ExpectedRows {
    std::vector<int> equation, jet, quotient;
};

inline std::optional<ExpectedRows> expected_rows(const std::string& system, int n) {
    if (n != 4) return std::nullopt;
    static const std::vector<int> jet = {60, 160, 180, 96, 20};
    if (system == "killing") return ExpectedRows{{10, 40, 60, 40, 10}, jet, {50, 120, 120, 56, 10}};
    if (system == "weyl") return ExpectedRows{{11, 44, 66, 44, 11}, jet, {49, 116, 114, 52, 9}};
    if (system == "conformal") return ExpectedRows{{15, 60, 90, 60, 15}, jet, {45, 100, 90, 36, 5}};
    return std::nullopt;
}

inline MetricData builtin_metric(const std::string& name, int n) {
    if (n < 2) throw ConfigError("--n must be at least 2");
    if (name == "euclidean") return euclidean_metric(n);
    if (name == "minkowski") return minkowski_metric(n);
    if (name == "curved") return curved_diagonal_metric(n);
    if (name == "scaled") return scaled_flat_metric(n);
    throw ConfigError("unknown metric '" + name +
                      "' (use euclidean, minkowski, curved, scaled, or a JSON file path)");
}

// A registry name, or a path to {"schema": 1, "vars": [...], "g": [[...]]}.
inline MetricData resolve_metric(const std::string& spec, int n) {
    std::ifstream probe(spec);
    if (!probe) return builtin_metric(spec, n);
    probe.close();
    Json j = detail::parse_json_text(detail::read_text_file(spec));
    try {
        if (!j.is_object() || !j.contains("schema") || j.at("schema").get<long long>() != 1)
            throw ConfigError("metric file: missing or unsupported \"schema\"");
        Vars vars = detail::vars_from_names(j.at("vars"), "metric file vars");
        Matrix<RatFn> g = detail::matrix_field(j.at("g"), vars, "metric file g");
        MetricData md = make_metric(g);
        if (md.n != n)
            throw ConfigError("metric file is " + std::to_string(md.n) +
                              "-dimensional but --n is " + std::to_string(n));
        return md;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("metric file: ") + e.what());
    }
}

inline LinearSystem system_by_name(const std::string& name, const MetricData& md) {
    if (name == "killing") return killing_system(md);
    if (name == "weyl") return weyl_system(md);
    if (name == "conformal") return conformal_system(md);
    throw ConfigError("unknown system '" + name + "' (use killing, weyl, or conformal)");
}

struct DiagramOutcome {
    std::string system;
    int n = 0;
    std::string metric;
    DimensionDiagram dims;
    bool additivity = false;
    std::optional<bool> expected_match;
    std::optional<ExpectedRows> expected;
};

inline DiagramOutcome run_diagram(const DiagramRequest& req) {
    if (!req.expect.empty() && req.expect != "paper")
        throw ConfigError("unknown --expect value '" + req.expect + "' (only: paper)");
    MetricData md = resolve_metric(req.metric, req.n);
    LinearSystem sys = system_by_name(req.system, md);
    DiagramOutcome out;
    out.system = req.system;
    out.n = req.n;
    out.metric = req.metric;
    out.dims = stable_sequence_dims(sys);  // throws on rank instability
    out.additivity = true;
    for (int r = 0; r <= req.n; ++r)
        if (out.dims.equation_row[r] + out.dims.quotient_row[r] != out.dims.jet_row[r])
            out.additivity = false;
    if (!req.expect.empty()) {
        auto exp = expected_rows(req.system, req.n);
        if (!exp)
            throw ConfigError("no tabulated expectation for system '" + req.system + "' at n = " +
                              std::to_string(req.n));
        out.expected = exp;
        out.expected_match = out.dims.equation_row == exp->equation && out.dims.jet_row == exp->jet &&
                             out.dims.quotient_row == exp->quotient;
    }
    return out;
}

inline std::string render_diagram_table(const DiagramOutcome& o) {
    std::ostringstream out;
    out << "system " << o.system << "   n " << o.n << "   metric " << o.metric << "\n";
    out << "order " << o.dims.order << "   fiber dimension " << o.dims.equation_dim
        << "   prolonged symbol " << o.dims.symbol_next << "\n\n";
    auto row = [&](const std::string& label, const std::vector<int>& v) {
        out << "  " << label;
        for (int x : v) {
            std::string s = std::to_string(x);
            out << std::string(7 - s.size(), ' ') << s;
        }
        out << "\n";
    };
    std::vector<int> degrees;
    for (int r = 0; r <= o.n; ++r) degrees.push_back(r);
    row("degree        ", degrees);
    row("equation row  ", o.dims.equation_row);
    row("full jet row  ", o.dims.jet_row);
    row("quotient row  ", o.dims.quotient_row);
    out << "  additivity    " << (o.additivity ? "ok (equation + quotient = jet in every degree)"
                                               : "VIOLATED")
        << "\n";
    if (o.expected_match)
        out << "  expected      " << (*o.expected_match ? "match" : "MISMATCH") << "\n";
    return out.str();
}

inline std::string render_diagram_json(const DiagramOutcome& o) {
    Json j;
    j["schema"] = 1;
    j["command"] = "diagram";
    j["system"] = o.system;
    j["n"] = o.n;
    j["metric"] = o.metric;
    j["order"] = o.dims.order;
    j["fiber_dim"] = o.dims.equation_dim;
    j["prolonged_symbol"] = o.dims.symbol_next;
    j["rows"] = Json::object();
    j["rows"]["equation"] = o.dims.equation_row;
    j["rows"]["jet"] = o.dims.jet_row;
    j["rows"]["quotient"] = o.dims.quotient_row;
    j["additivity"] = o.additivity;
    if (o.expected_match) {
        j["expected"] = Json::object();
        j["expected"]["equation"] = o.expected->equation;
        j["expected"]["jet"] = o.expected->jet;
        j["expected"]["quotient"] = o.expected->quotient;
        j["expected"]["match"] = *o.expected_match;
    }
    return j.dump(2) + "\n";
}

}  // namespace jetcal::suites
