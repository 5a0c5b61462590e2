#include <catch2/catch_amalgamated.hpp>

#include "jetcal/forms.hpp"
#include "jetcal/parser.hpp"
#include "jetcal/rng.hpp"

using namespace jetcal;

namespace {

Form random_scalar_form(Rng& rng, const Vars& vars, int n, int deg) {
    Form w(vars, n, deg);
    for (const auto& I : index_tuples(n, deg))
        if (rng.chance(3, 4)) w.add(0, I, rng.ratfn_poly(vars, n, 2, 2));
    return w;
}

}  // namespace

TEST_CASE("exterior derivative: hand values and square zero") {
    Vars vars = make_vars({"x", "y", "z"});
    const int n = 3;

    // d(x dy) = dx ^ dy
    Form w(vars, n, 1);
    w.add(0, {1}, RatFn::variable(vars, 0));
    Form dw = w.ext_d();
    REQUIRE(dw.get(0, {0, 1}) == RatFn::from_int(vars, 1));
    REQUIRE(dw.components().size() == 1);

    // d(f) = sum_i (d_i f) dx^i on a 0-form
    Form f(vars, n, 0);
    RatFn fe = parse_expr("x^2*y + z", vars);
    f.add(0, {}, fe);
    Form df = f.ext_d();
    for (int i = 0; i < n; ++i) REQUIRE(df.get(0, {i}) == fe.derive(i));

    Rng rng(2024);
    for (int t = 0; t < 12; ++t) {
        Form a = random_scalar_form(rng, vars, n, t % 2);
        REQUIRE(a.ext_d().ext_d().is_zero());
    }
}

TEST_CASE("wedge: graded commutativity, associativity, Leibniz, overflow") {
    Vars vars = make_vars({"x", "y", "z"});
    const int n = 3;
    Rng rng(77);

    for (int t = 0; t < 8; ++t) {
        Form a1 = random_scalar_form(rng, vars, n, 1);
        Form b1 = random_scalar_form(rng, vars, n, 1);
        Form b2 = random_scalar_form(rng, vars, n, 2);

        // a ^ b = (-1)^{rs} b ^ a
        REQUIRE(wedge(a1, b1) == wedge(b1, a1) * RatFn::from_int(vars, -1));
        REQUIRE(wedge(a1, b2) == wedge(b2, a1));

        // associativity
        Form c1 = random_scalar_form(rng, vars, n, 1);
        REQUIRE(wedge(wedge(a1, b1), c1) == wedge(a1, wedge(b1, c1)));

        // d(a ^ b) = da ^ b - a ^ db for 1-forms
        REQUIRE(wedge(a1, b1).ext_d() ==
                wedge(a1.ext_d(), b1) - wedge(a1, b1.ext_d()));

        // degree past the base dimension collapses to zero
        REQUIRE(wedge(b2, b2).is_zero());
        REQUIRE(wedge(wedge(a1, b1), b2).is_zero());
    }
}

TEST_CASE("interior product: hand value, nilpotence, antiderivation") {
    Vars vars = make_vars({"x", "y", "z"});
    const int n = 3;
    Rng rng(31);

    // i(v)(dx ^ dy) = v^x dy - v^y dx
    Form w(vars, n, 2);
    w.add(0, {0, 1}, RatFn::from_int(vars, 1));
    VecField v = {parse_expr("x*y", vars), parse_expr("z - 1", vars), parse_expr("y^2", vars)};
    Form iv = w.contract(v);
    REQUIRE(iv.get(0, {1}) == v[0]);
    REQUIRE(iv.get(0, {0}) == -v[1]);
    REQUIRE(iv.get(0, {2}).is_zero());

    for (int t = 0; t < 8; ++t) {
        Form a = random_scalar_form(rng, vars, n, 2);
        Form b = random_scalar_form(rng, vars, n, 1);
        REQUIRE(a.contract(v).contract(v).is_zero());
        // i(v)(a ^ b) = i(v)a ^ b + (-1)^deg(a) a ^ i(v)b
        REQUIRE(wedge(a, b).contract(v) ==
                wedge(a.contract(v), b) + wedge(a, b.contract(v)));
    }
}

TEST_CASE("structure constants: antisymmetry bookkeeping and Jacobi check") {
    // scaling + translation + quadratic flow on the line
    StructureConstants c(3);
    c.set(0, 0, 1, Rat(1));   // [g0,g1] = g0
    c.set(1, 0, 2, Rat(2));   // [g0,g2] = 2 g1
    c.set(2, 1, 2, Rat(1));   // [g1,g2] = g2
    REQUIRE(c.at(0, 1, 0) == Rat(-1));
    REQUIRE(check_lie_algebra(c));

    // [g0,g1] = g2, [g0,g2] = g0, [g1,g2] = 0 fails Jacobi:
    // the cyclic sum on (g0,g1,g2) is -g2
    StructureConstants broken(3);
    broken.set(2, 0, 1, Rat(1));
    broken.set(0, 0, 2, Rat(1));
    REQUIRE(!check_lie_algebra(broken));
    REQUIRE(broken.jacobi_violations().size() == 1);

    REQUIRE_THROWS_AS(c.set(0, 1, 1, Rat(5)), std::invalid_argument);
}

TEST_CASE("vector field generators determine their bracket table") {
    Vars vars = make_vars({"x"});
    auto vf = [&](const std::string& e) { return VecField{parse_expr(e, vars)}; };

    std::vector<VecField> theta = {vf("1"), vf("x"), vf("x^2")};
    StructureConstants c = infer_structure_constants(theta, 1);
    REQUIRE(c.at(0, 0, 1) == Rat(1));
    REQUIRE(c.at(1, 0, 2) == Rat(2));
    REQUIRE(c.at(2, 1, 2) == Rat(1));
    REQUIRE(c.at(2, 0, 1) == Rat(0));
    REQUIRE(check_lie_algebra(c));

    // bracket escapes the span
    std::vector<VecField> open_span = {vf("1"), vf("x^2")};
    REQUIRE_THROWS_AS(infer_structure_constants(open_span, 1), std::runtime_error);

    // dependent generators
    std::vector<VecField> dep = {vf("x"), vf("3*x")};
    REQUIRE_THROWS_AS(infer_structure_constants(dep, 1), std::runtime_error);
}

TEST_CASE("affine group on the line: structure equations of both invariant coframes") {
    // chart (a1, a2) on the group {y = a1*x + a2, a1 != 0}
    Vars vars = make_vars({"a1", "a2"});
    const int n = 2;

    // generator bracket table: [scaling, translation] = -translation
    StructureConstants c(2);
    c.set(1, 0, 1, Rat(-1));
    REQUIRE(check_lie_algebra(c));

    // coframe adapted to the generators (solves the transport equations)
    Form w(vars, n, 1, ValueSpace::lie(2));
    w.add(0, {0}, parse_expr("1/a1", vars));
    w.add(1, {0}, parse_expr("-a2/a1", vars));
    w.add(1, {1}, parse_expr("1", vars));
    REQUIRE(maurer_cartan_residual(w, c).is_zero());

    // negative control: breaking one component breaks the equations
    Form bad = w;
    bad.add(1, {0}, parse_expr("a2/a1", vars));  // cancels the -a2/a1 term
    REQUIRE(!maurer_cartan_residual(bad, c).is_zero());

    // the other invariant coframe is flat for the curvature normalization
    Form a(vars, n, 1, ValueSpace::lie(2));
    a.add(0, {0}, parse_expr("1/a1", vars));
    a.add(1, {1}, parse_expr("1/a1", vars));
    REQUIRE(curvature(a, c).is_zero());
    REQUIRE(!maurer_cartan_residual(a, c).is_zero());
}

TEST_CASE("series differential: square zero and three-term exactness") {
    for (int n : {2, 3, 4}) {
        std::vector<std::string> names;
        for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
        Vars vars = make_vars(names);

        Matrix<Rat> d0 = spencer_delta_matrix(n, 1, 2, 0, vars);
        Matrix<Rat> d1 = spencer_delta_matrix(n, 1, 1, 1, vars);

        const int s2 = static_cast<int>(binomial(n + 1, 2));
        const int wedge2 = static_cast<int>(binomial(n, 2));

        REQUIRE(d0.cols() == s2);
        REQUIRE(d1.cols() == n * n);
        REQUIRE(rank_bareiss(d0) == s2);                 // injective on symmetric slice
        REQUIRE(rank_bareiss(d1) == wedge2);             // surjective onto top degree
        REQUIRE(rank_bareiss(d0) + rank_bareiss(d1) == n * n);  // exact in the middle

        // composite vanishes as matrices
        Matrix<Rat> dd = d1 * d0;
        REQUIRE(dd.is_zero());
    }

    // square zero on random vector-valued input, away from the matrix route
    Vars vars = make_vars({"x1", "x2", "x3"});
    Rng rng(919);
    for (int t = 0; t < 6; ++t) {
        Form w(vars, 3, 1, ValueSpace::symbols(3, 2, 3));
        for (int v = 0; v < w.values().dim(); ++v)
            for (const auto& I : index_tuples(3, 1))
                if (rng.chance(1, 2)) w.add(v, I, rng.ratfn_poly(vars, 3, 2, 2));
        REQUIRE(spencer_delta(spencer_delta(w)).is_zero());
    }
}
