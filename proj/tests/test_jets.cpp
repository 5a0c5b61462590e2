#include <catch2/catch_amalgamated.hpp>

#include "jetcal/jets.hpp"
#include "jetcal/parser.hpp"
#include "jetcal/rng.hpp"

#include <string>
#include <vector>

using namespace jetcal;

namespace {

// Random vector-field jet section (m == n) with small polynomial components.
JetSection random_section(Rng& rng, const Vars& vars, int n, int q) {
    JetSection s(n, n, q, vars);
    for (const MultiIndex& mu : multi_indices_up_to(n, q))
        for (int k = 0; k < n; ++k)
            if (rng.chance(3, 4)) s.set(k, mu, rng.ratfn_poly(vars, n, 2, 2));
    return s;
}

// Random polynomial automorphism of the chart together with its closed-form
// inverse: an invertible diagonal-affine layer followed by `shears` triangular
// layers x_j += p(x_{j'}), j' != j.
std::pair<std::vector<RatFn>, std::vector<RatFn>> random_poly_auto(Rng& rng, const Vars& vars,
                                                                   int n, int shears) {
    auto full_identity = [&]() {
        std::vector<RatFn> im;
        for (std::size_t j = 0; j < vars->size(); ++j)
            im.push_back(RatFn::variable(vars, static_cast<int>(j)));
        return im;
    };
    std::vector<RatFn> f = full_identity(), g = full_identity();

    auto apply_layer = [&](const std::vector<RatFn>& layer, const std::vector<RatFn>& layer_inv) {
        std::vector<RatFn> nf, ng;
        for (std::size_t j = 0; j < vars->size(); ++j) {
            nf.push_back(layer[j].subst(f));
            ng.push_back(g[j].subst(layer_inv));
        }
        f = std::move(nf);
        g = std::move(ng);
    };

    // diagonal-affine layer
    {
        std::vector<RatFn> lay = full_identity(), inv = full_identity();
        for (int j = 0; j < n; ++j) {
            Rat c = rng.rat_nonzero(3, 2), d = rng.rat(2, 1);
            lay[j] = RatFn::variable(vars, j) * c + RatFn::constant(vars, d);
            inv[j] = (RatFn::variable(vars, j) - RatFn::constant(vars, d)) * (Rat(1) / c);
        }
        apply_layer(lay, inv);
    }
    for (int s = 0; s < shears && n >= 2; ++s) {
        int j = rng.uniform(0, n - 1);
        int o = (j + 1 + rng.uniform(0, n - 2)) % n;  // some other coordinate
        // polynomial in x_o alone, degree <= 2
        RatFn xo = RatFn::variable(vars, o);
        RatFn p = RatFn::constant(vars, rng.rat(2, 1)) * xo +
                  RatFn::constant(vars, rng.rat(1, 1)) * xo * xo;
        std::vector<RatFn> lay = full_identity(), inv = full_identity();
        lay[j] = RatFn::variable(vars, j) + p;
        inv[j] = RatFn::variable(vars, j) - p;
        apply_layer(lay, inv);
    }
    return {std::vector<RatFn>(f.begin(), f.begin() + n),
            std::vector<RatFn>(g.begin(), g.begin() + n)};
}

std::vector<RatFn> full_images(const std::vector<RatFn>& base, const Vars& vars) {
    std::vector<RatFn> im;
    for (std::size_t j = 0; j < vars->size(); ++j)
        im.push_back(j < base.size() ? base[j] : RatFn::variable(vars, static_cast<int>(j)));
    return im;
}

Vars chart(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return make_vars(names);
}

}  // namespace

TEST_CASE("jet fiber dimensions") {
    REQUIRE(jet_fiber_dim(4, 1, 2) == 15);
    REQUIRE(jet_fiber_dim(4, 4, 1) == 20);
    REQUIRE(jet_fiber_dim(2, 2, 3) == 20);
    REQUIRE(symbol_fiber_dim(4, 4, 2) == 40);
    REQUIRE(symbol_fiber_dim(4, 4, 3) == 80);
    REQUIRE(symbol_fiber_dim(3, 1, 5) == 21);
}

TEST_CASE("jet section bookkeeping: projection, lift, bounds") {
    Vars vars = chart(2);
    Rng rng(5);
    JetSection s = random_section(rng, vars, 2, 2);

    REQUIRE(s.project(2) == s);
    REQUIRE(s.project(1).lift_zero(2).project(1) == s.project(1));
    REQUIRE(s.lift_zero(3).project(2) == s);
    REQUIRE_THROWS_AS(s.at(0, MultiIndex({1, 2})), std::out_of_range);
    REQUIRE_THROWS_AS(s.at(2, MultiIndex({0, 0})), std::out_of_range);
    REQUIRE_THROWS_AS(s.at(0, MultiIndex({1})), std::invalid_argument);
    REQUIRE_THROWS_AS(s.project(3), std::invalid_argument);

    // arithmetic is componentwise
    JetSection t = random_section(rng, vars, 2, 2);
    REQUIRE((s + t) - t == s);
    REQUIRE((s * Rat(0)).is_zero());
}

TEST_CASE("first-order compatibility operator vanishes exactly on holonomic jets") {
    Vars vars = chart(2);
    Rng rng(42);
    for (int t = 0; t < 6; ++t) {
        std::vector<RatFn> field = {rng.ratfn_poly(vars, 2, 3, 3), rng.ratfn_poly(vars, 2, 3, 3)};
        JetSection hol = jet_prolong_section(field, 2, 2);
        REQUIRE(spencer_D(hol).is_zero());

        // breaking one top component is detected
        JetSection bent = hol;
        bent.set(0, MultiIndex({1, 1}), hol.at(0, MultiIndex({1, 1})) + RatFn::from_int(vars, 1));
        REQUIRE(!spencer_D(bent).is_zero());
    }

    // component formula on a generic section: (k, mu, i) entry is
    // d_i of the mu component minus the (mu + 1_i) component
    JetSection xi = random_section(rng, vars, 2, 2);
    Form D = spencer_D(xi);
    for (const MultiIndex& mu : multi_indices_up_to(2, 1))
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                REQUIRE(D.get(k, mu, {i}) == xi.at(k, mu).derive(i) - xi.at(k, mu.inc(i)));
}

TEST_CASE("bracket on the line: frozen example and generic second-order identities") {
    Vars vars = make_vars({"x"});

    // frozen first-order example: [(x^2, 1), (x, 3)] = (-x^2, 0)
    JetSection xi(1, 1, 1, vars), eta(1, 1, 1, vars);
    xi.set(0, MultiIndex({0}), parse_expr("x^2", vars));
    xi.set(0, MultiIndex({1}), parse_expr("1", vars));
    eta.set(0, MultiIndex({0}), parse_expr("x", vars));
    eta.set(0, MultiIndex({1}), parse_expr("3", vars));
    JetSection br = differential_bracket(xi, eta);
    REQUIRE(br.at(0, MultiIndex({0})) == parse_expr("-x^2", vars));
    REQUIRE(br.at(0, MultiIndex({1})).is_zero());

    // generic order-2 sections with free coefficients: all components of the
    // zero-lift bracket against independently written formulas
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
    RatFn expected0 = c(X, 0) * c(Y, 0).derive(0) - c(Y, 0) * c(X, 0).derive(0);
    RatFn expected1 = c(X, 0) * c(Y, 1).derive(0) - c(Y, 0) * c(X, 1).derive(0);
    RatFn expected2 = c(X, 1) * c(Y, 2) - c(Y, 1) * c(X, 2) + c(X, 0) * c(Y, 2).derive(0) -
                      c(Y, 0) * c(X, 2).derive(0);
    REQUIRE(c(B, 0) == expected0);
    REQUIRE(c(B, 1) == expected1);
    REQUIRE(c(B, 2) == expected2);

    // pointwise-bracket formula on the same generic data, order-1 output
    // (the lam = (1) split contributes X_x Y_x - Y_x X_x = 0 at mu = (1))
    JetSection A = algebraic_bracket(X, Y);
    REQUIRE(c(A, 0) == c(X, 0) * c(Y, 1) - c(Y, 0) * c(X, 1));
    REQUIRE(c(A, 1) == c(X, 0) * c(Y, 2) - c(Y, 0) * c(X, 2));
}

TEST_CASE("bracket is lift independent and satisfies the Jacobi identity") {
    Rng rng(271828);
    int jacobi_cases = 0;
    for (int t = 0; t < 10; ++t) {
        int n = 1 + t % 2;
        int q = 1 + (t / 2) % 2;
        Vars vars = chart(n);
        JetSection X = random_section(rng, vars, n, q);
        JetSection Y = random_section(rng, vars, n, q);
        JetSection Z = random_section(rng, vars, n, q);

        // arbitrary lifts give the same bracket as zero-filled lifts
        JetSection lx = X.lift_zero(q + 1), ly = Y.lift_zero(q + 1);
        for (const MultiIndex& mu : multi_indices_of_order(n, q + 1))
            for (int k = 0; k < n; ++k) {
                lx.set(k, mu, rng.ratfn_poly(vars, n, 2, 2));
                ly.set(k, mu, rng.ratfn_poly(vars, n, 2, 2));
            }
        REQUIRE(differential_bracket(X, Y, lx, ly) == differential_bracket(X, Y));
        REQUIRE(differential_bracket(X, Y, lx, std::nullopt) == differential_bracket(X, Y));

        // antisymmetry
        REQUIRE(differential_bracket(X, Y) == differential_bracket(Y, X) * Rat(-1));

        // Jacobi: [[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y] = 0
        JetSection j1 = differential_bracket(differential_bracket(X, Y), Z);
        JetSection j2 = differential_bracket(differential_bracket(Y, Z), X);
        JetSection j3 = differential_bracket(differential_bracket(Z, X), Y);
        REQUIRE((j1 + j2 + j3).is_zero());
        ++jacobi_cases;

        // a lift that fails to project is rejected
        JetSection badlift = lx;
        badlift.set(0, MultiIndex::zeros(n), lx.at(0, MultiIndex::zeros(n)) + RatFn::from_int(vars, 1));
        REQUIRE_THROWS_AS(differential_bracket(X, Y, badlift, std::nullopt), std::invalid_argument);
    }
    REQUIRE(jacobi_cases == 10);
}

TEST_CASE("jet composition agrees with composing the underlying maps") {
    Rng rng(1618);
    for (int t = 0; t < 5; ++t) {
        int n = 2 + t % 2;
        int q = 1 + t % 3;
        Vars vars = chart(n);
        auto [f, finv] = random_poly_auto(rng, vars, n, 2);
        auto [g, ginv] = random_poly_auto(rng, vars, n, 2);

        // closed-form composite
        std::vector<RatFn> h;
        auto fim = full_images(f, vars);
        for (int k = 0; k < n; ++k) h.push_back(g[k].subst(fim));

        JetMapSection jf = jet_prolong_map(f, q), jg = jet_prolong_map(g, q);
        REQUIRE(jet_compose(jg, jf) == jet_prolong_map(h, q));

        // identity laws and associativity
        JetMapSection id = JetMapSection::identity(n, q, vars);
        REQUIRE(jet_compose(jf, id) == jf);
        REQUIRE(jet_compose(id, jf) == jf);
        JetMapSection je = jet_prolong_map(finv, q);
        REQUIRE(jet_compose(jet_compose(jg, jf), je) == jet_compose(jg, jet_compose(jf, je)));
    }
}

TEST_CASE("jet inversion matches the prolonged closed-form inverse") {
    Rng rng(3141);
    for (int t = 0; t < 5; ++t) {
        int n = 2 + t % 2;
        int q = 1 + t % 3;
        Vars vars = chart(n);
        auto [f, finv] = random_poly_auto(rng, vars, n, 2);

        JetMapSection jf = jet_prolong_map(f, q);
        JetMapSection jg = jet_invert(jf, finv);
        REQUIRE(jg == jet_prolong_map(finv, q));
        REQUIRE(jet_compose(jf, jg) == JetMapSection::identity(n, q, vars));
        REQUIRE(jet_compose(jg, jf) == JetMapSection::identity(n, q, vars));

        // inverting twice returns the original jet
        REQUIRE(jet_invert(jg, f) == jf);

        // a wrong base inverse is rejected
        std::vector<RatFn> wrong = finv;
        wrong[0] = wrong[0] + RatFn::from_int(vars, 1);
        REQUIRE_THROWS_AS(jet_invert(jf, wrong), std::invalid_argument);
    }

    // the singular jacobian invariant is enforced
    Vars vars = chart(2);
    JetMapSection sing(2, 1, vars);
    sing.set(0, MultiIndex({0, 0}), RatFn::variable(vars, 0));
    sing.set(0, MultiIndex({1, 0}), RatFn::from_int(vars, 1));
    sing.set(1, MultiIndex({0, 0}), RatFn::variable(vars, 0));
    sing.set(1, MultiIndex({1, 0}), RatFn::from_int(vars, 1));
    REQUIRE_THROWS_AS(sing.validate(), std::invalid_argument);
}

TEST_CASE("jet transport of sections: naturality, identity, equivariance") {
    Rng rng(9001);

    // transporting the prolongation of a field gives the prolongation of the
    // pushforward field, at every order
    for (int t = 0; t < 4; ++t) {
        int n = 2;
        int q = t % 3;  // includes the order-0 pushforward case
        Vars vars = chart(n);
        auto [f, finv] = random_poly_auto(rng, vars, n, 2);
        auto gim = full_images(finv, vars);

        std::vector<RatFn> v = {rng.ratfn_poly(vars, n, 2, 2), rng.ratfn_poly(vars, n, 2, 2)};
        std::vector<RatFn> w;  // pushforward: (df . v) at the inverse point
        for (int k = 0; k < n; ++k) {
            RatFn acc = RatFn::zero(vars);
            for (int r = 0; r < n; ++r) acc += f[k].derive(r) * v[r];
            w.push_back(acc.subst(gim));
        }

        JetMapSection jf = jet_prolong_map(f, q + 1);
        JetSection jv = jet_prolong_section(v, n, q);
        REQUIRE(jet_act(jf, jv, finv) == jet_prolong_section(w, n, q));

        // identity acts trivially on arbitrary sections
        JetSection any = random_section(rng, vars, n, q);
        std::vector<RatFn> idv = {RatFn::variable(vars, 0), RatFn::variable(vars, 1)};
        REQUIRE(jet_act(JetMapSection::identity(n, q + 1, vars), any, idv) == any);
    }

    // composite transport equals transport by the composite jet
    for (int t = 0; t < 3; ++t) {
        int n = 2;
        int q = 1 + t % 2;
        Vars vars = chart(n);
        auto [f, finv] = random_poly_auto(rng, vars, n, 1);
        auto [g, ginv] = random_poly_auto(rng, vars, n, 1);
        auto fim = full_images(f, vars), gin = full_images(ginv, vars);

        std::vector<RatFn> gf, gf_inv;
        for (int k = 0; k < n; ++k) gf.push_back(g[k].subst(fim));
        for (int k = 0; k < n; ++k) gf_inv.push_back(finv[k].subst(gin));

        JetSection xi = random_section(rng, vars, n, q);
        JetSection lhs = jet_act(jet_prolong_map(gf, q + 1), xi, gf_inv);
        JetSection rhs =
            jet_act(jet_prolong_map(g, q + 1), jet_act(jet_prolong_map(f, q + 1), xi, finv), ginv);
        REQUIRE(lhs == rhs);
    }

    // transport is a bracket morphism
    {
        int n = 2, q = 1;
        Vars vars = chart(n);
        auto [f, finv] = random_poly_auto(rng, vars, n, 1);
        JetSection X = random_section(rng, vars, n, q);
        JetSection Y = random_section(rng, vars, n, q);
        JetMapSection jf = jet_prolong_map(f, q + 1);
        JetSection aX = jet_act(jf, X, finv);
        JetSection aY = jet_act(jf, Y, finv);
        JetSection lhs = differential_bracket(aX, aY);
        JetSection rhs = jet_act(jf, differential_bracket(X, Y), finv);
        REQUIRE(lhs == rhs);
    }
}
