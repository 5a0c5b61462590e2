#include <catch2/catch_amalgamated.hpp>

#include "jetcal/diff_op.hpp"
#include "jetcal/parser.hpp"
#include "jetcal/rng.hpp"

#include <vector>

using namespace jetcal;

namespace {

DiffOp random_op(Rng& rng, const Vars& vars, int max_deg, int n_terms) {
    const int n = static_cast<int>(vars->size());
    auto mus = multi_indices_up_to(n, max_deg);
    DiffOp p(vars);
    for (int t = 0; t < n_terms; ++t) {
        const MultiIndex& mu = mus[rng.uniform(0, static_cast<long>(mus.size()) - 1)];
        p.add_term(mu, RatFn(rng.poly(vars, n, 2, 2)));
    }
    return p;
}

// Triangular polynomial map x_i -> x_i + p_i(x_{i+1..n}) + c_i with its exact
// inverse built by back-substitution.
struct InversePair {
    std::vector<RatFn> f, g;
};

InversePair random_triangular_pair(Rng& rng, const Vars& vars) {
    const int n = static_cast<int>(vars->size());
    std::vector<RatFn> f;
    for (int i = 0; i < n; ++i) {
        RatFn tail = RatFn::constant(vars, rng.rat(3, 2));
        Poly p = rng.poly(vars, n, 2);
        // keep only monomials in variables strictly after i
        Poly kept(vars);
        for (const auto& [mu, c] : p.terms()) {
            bool ok = true;
            for (int j = 0; j <= i; ++j)
                if (mu[j] > 0) ok = false;
            if (ok) kept += Poly::monomial(vars, mu, c);
        }
        f.push_back(RatFn::variable(vars, i) + RatFn(kept) + tail);
    }
    std::vector<RatFn> g(n, RatFn::zero(vars));
    std::vector<RatFn> images;
    for (int j = 0; j < n; ++j) images.push_back(RatFn::variable(vars, j));
    for (int i = n - 1; i >= 0; --i) {
        // g_i = x_i - (f_i - x_i) evaluated at (.., g_{i+1}, ..)
        RatFn shift = f[i] - RatFn::variable(vars, i);
        g[i] = RatFn::variable(vars, i) - shift.subst(images);
        images[i] = g[i];
    }
    return {f, g};
}

Form volume(const Vars& vars, int n, const RatFn& a) {
    Form out(vars, n, n, ValueSpace::scalar());
    std::vector<int> I;
    for (int i = 0; i < n; ++i) I.push_back(i);
    out.add(0, I, a);
    return out;
}

// Exterior-derivative operator matrices over a chart: degree r -> r + 1.
OperatorMatrix ext_d_matrix(const Vars& vars, int r) {
    const int n = static_cast<int>(vars->size());
    auto rows = index_tuples(n, r + 1);
    auto cols = index_tuples(n, r);
    auto col_of = [&](const std::vector<int>& I) {
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (cols[c] == I) return static_cast<int>(c);
        return -1;
    };
    OperatorMatrix D(static_cast<int>(rows.size()), static_cast<int>(cols.size()), vars);
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        const std::vector<int>& J = rows[ri];
        for (std::size_t pos = 0; pos < J.size(); ++pos) {
            std::vector<int> I;
            for (std::size_t s = 0; s < J.size(); ++s)
                if (s != pos) I.push_back(J[s]);
            int c = col_of(I);
            RatFn sign = RatFn::from_int(vars, pos % 2 == 0 ? 1 : -1);
            D.at(static_cast<int>(ri), c) =
                D.at(static_cast<int>(ri), c) + DiffOp::derivation(vars, J[pos]) * sign;
        }
    }
    return D;
}

}  // namespace

TEST_CASE("normal form arithmetic in the operator ring") {
    Vars v1 = make_vars({"x"});
    MultiIndex z1 = MultiIndex::zeros(1), e1 = MultiIndex::unit(1, 0);

    SECTION("commutation rule") {
        DiffOp d = DiffOp::derivation(v1, 0);
        DiffOp x = DiffOp::constant(v1, RatFn::variable(v1, 0));
        DiffOp prod = op_mul(d, x);
        DiffOp want(v1);
        want.add_term(e1, RatFn::variable(v1, 0));
        want.add_term(z1, RatFn::from_int(v1, 1));
        REQUIRE(prod == want);
    }

    SECTION("multiplicative unit") {
        Rng rng(0xabc);
        DiffOp one = DiffOp::constant(v1, RatFn::from_int(v1, 1));
        for (int rep = 0; rep < 3; ++rep) {
            DiffOp p = random_op(rng, v1, 3, 3);
            REQUIRE(op_mul(p, one) == p);
            REQUIRE(op_mul(one, p) == p);
        }
    }

    SECTION("associativity on the displayed product") {
        DiffOp d = DiffOp::derivation(v1, 0);
        DiffOp x = DiffOp::constant(v1, RatFn::variable(v1, 0));
        DiffOp lhs = op_mul(op_mul(d, x), d);
        DiffOp rhs = op_mul(d, op_mul(x, d));
        DiffOp want(v1);
        want.add_term(e1.inc(0), RatFn::variable(v1, 0));
        want.add_term(e1, RatFn::from_int(v1, 1));
        REQUIRE(lhs == want);
        REQUIRE(rhs == want);
    }

    SECTION("associativity and application on random operators") {
        Vars v2 = make_vars({"x1", "x2"});
        Rng rng(0xdef);
        for (int rep = 0; rep < 5; ++rep) {
            DiffOp p = random_op(rng, v2, 2, 2);
            DiffOp q = random_op(rng, v2, 2, 2);
            DiffOp r = random_op(rng, v2, 2, 2);
            REQUIRE(op_mul(op_mul(p, q), r) == op_mul(p, op_mul(q, r)));
            RatFn h = RatFn(rng.poly(v2, 2, 3));
            REQUIRE(op_apply(op_mul(p, q), h) == op_apply(p, op_apply(q, h)));
        }
    }
}

TEST_CASE("formal adjoints of scalar operators") {
    SECTION("named small cases") {
        Vars v2 = make_vars({"x", "y"});
        DiffOp dx = DiffOp::derivation(v2, 0);
        DiffOp dy = DiffOp::derivation(v2, 1);
        REQUIRE(adjoint_op(dx) == dx * RatFn::from_int(v2, -1));
        REQUIRE(adjoint_op(op_mul(dx, dy)) == op_mul(dx, dy));

        Vars v1 = make_vars({"x"});
        RatFn x = RatFn::variable(v1, 0);
        DiffOp p(v1);
        p.add_term(MultiIndex::unit(1, 0), x * x);
        DiffOp want(v1);
        want.add_term(MultiIndex::unit(1, 0), -(x * x));
        want.add_term(MultiIndex::zeros(1), RatFn::from_int(v1, -2) * x);
        REQUIRE(adjoint_op(p) == want);
    }

    SECTION("involution and contravariance on one hundred random operators") {
        std::vector<Vars> charts = {make_vars({"x"}), make_vars({"x1", "x2"}),
                                    make_vars({"x1", "x2", "x3"})};
        Rng rng(0x1e57);
        int count = 0;
        for (int rep = 0; rep < 50; ++rep) {
            const Vars& vars = charts[rep % 3];
            DiffOp p = random_op(rng, vars, 3, 2);
            DiffOp q = random_op(rng, vars, 2, 2);
            REQUIRE(adjoint_op(adjoint_op(p)) == p);
            REQUIRE(adjoint_op(adjoint_op(q)) == q);
            REQUIRE(adjoint_op(op_mul(p, q)) == op_mul(adjoint_op(q), adjoint_op(p)));
            count += 2;
        }
        REQUIRE(count == 100);
    }

    SECTION("matrix contravariance") {
        Vars v2 = make_vars({"x1", "x2"});
        Rng rng(0x7e57);
        for (int rep = 0; rep < 3; ++rep) {
            OperatorMatrix A(2, 2, v2), B(2, 2, v2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    A.at(r, c) = random_op(rng, v2, 2, 2);
                    B.at(r, c) = random_op(rng, v2, 2, 2);
                }
            REQUIRE(om_adjoint(om_mul(A, B)) == om_mul(om_adjoint(B), om_adjoint(A)));
            REQUIRE(om_adjoint(om_adjoint(A)) == A);
        }
    }
}

TEST_CASE("divergence witnesses certify the pairing identity") {
    SECTION("one-step integration by parts") {
        Vars v1 = make_vars({"x"});
        OperatorMatrix D(1, 1, v1);
        D.at(0, 0) = DiffOp::derivation(v1, 0);
        AdjointResult ar = adjoint(D);
        MultiIndex z = MultiIndex::zeros(1);
        REQUIRE(ar.witness.w[0] == ar.witness.chart.jet(0, 0, z) * ar.witness.chart.jet(1, 0, z));
        REQUIRE(witness_check(D).is_zero());
    }

    SECTION("zero-order operators have no boundary term") {
        Vars v2 = make_vars({"x1", "x2"});
        OperatorMatrix D(1, 1, v2);
        D.at(0, 0) = DiffOp::constant(v2, parse_expr("x1^2 - x2", v2));
        AdjointResult ar = adjoint(D);
        REQUIRE(ar.witness.w[0].is_zero());
        REQUIRE(ar.witness.w[1].is_zero());
        REQUIRE(witness_check(D).is_zero());
    }

    SECTION("random matrices of several shapes") {
        Rng rng(0x3117);
        struct Shape {
            int rows, cols, nvars, deg;
        };
        std::vector<Shape> shapes = {{1, 1, 1, 3}, {2, 2, 2, 2}, {2, 3, 2, 1}, {1, 1, 3, 2}};
        std::vector<Vars> charts = {make_vars({"x"}), make_vars({"x1", "x2"}),
                                    make_vars({"x1", "x2", "x3"})};
        for (const Shape& s : shapes) {
            const Vars& vars = charts[s.nvars - 1];
            for (int rep = 0; rep < 3; ++rep) {
                OperatorMatrix D(s.rows, s.cols, vars);
                for (int r = 0; r < s.rows; ++r)
                    for (int c = 0; c < s.cols; ++c) D.at(r, c) = random_op(rng, vars, s.deg, 2);
                REQUIRE(witness_check(D).is_zero());
            }
        }
    }
}

TEST_CASE("one-dimensional dual series operator") {
    Vars v1 = make_vars({"x"});
    MultiIndex z = MultiIndex::zeros(1), e = MultiIndex::unit(1, 0);

    SECTION("momenta equations at order two") {
        DualSeries1D ds = dual_spencer_1d(2, v1);
        JetChart chart(v1, {{"s", 3}}, 1);
        std::vector<RatFn> rows;
        for (int r = 0; r < 3; ++r) {
            RatFn acc = RatFn::zero(chart.vars());
            for (int c = 0; c < 3; ++c) acc += chart.apply(ds.momenta.at(r, c), 0, c);
            rows.push_back(acc);
        }
        REQUIRE(rows[0] == chart.jet(0, 0, e));
        REQUIRE(rows[1] == chart.jet(0, 1, e) + chart.jet(0, 0, z));
        REQUIRE(rows[2] == chart.jet(0, 2, e) + chart.jet(0, 1, z));
        // raw adjoint rows are the negated momenta
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                REQUIRE(ds.raw_adjoint.at(r, c) == ds.momenta.at(r, c) * RatFn::from_int(v1, -1));
        REQUIRE(ds.raw_adjoint == om_adjoint(ds.series));
    }

    SECTION("boundary term of the order-two series operator") {
        DualSeries1D ds = dual_spencer_1d(2, v1);
        AdjointResult ar = adjoint(ds.series);
        RatFn want = RatFn::zero(ar.witness.chart.vars());
        for (int r = 0; r < 3; ++r)
            want += ar.witness.chart.jet(0, r, z) * ar.witness.chart.jet(1, r, z);
        REQUIRE(ar.witness.w[0] == want);
        REQUIRE(witness_check(ds.series).is_zero());
    }

    SECTION("low orders") {
        DualSeries1D d0 = dual_spencer_1d(0, v1);
        REQUIRE(d0.momenta.at(0, 0) == DiffOp::derivation(v1, 0));

        DualSeries1D d1 = dual_spencer_1d(1, v1);
        JetChart chart(v1, {{"s", 2}}, 1);
        RatFn row0 = chart.apply(d1.momenta.at(0, 0), 0, 0) + chart.apply(d1.momenta.at(0, 1), 0, 1);
        RatFn row1 = chart.apply(d1.momenta.at(1, 0), 0, 0) + chart.apply(d1.momenta.at(1, 1), 0, 1);
        REQUIRE(row0 == chart.jet(0, 0, e));
        REQUIRE(row1 == chart.jet(0, 1, e) + chart.jet(0, 0, z));
    }
}

TEST_CASE("divergence identity for mutually inverse maps") {
    SECTION("fixed triangular pair") {
        Vars v2 = make_vars({"x1", "x2"});
        std::vector<RatFn> f = {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)};
        std::vector<RatFn> g = {parse_expr("x1 - x2^2", v2), parse_expr("x2", v2)};
        for (const RatFn& r : lemma45_residual(f, g)) REQUIRE(r.is_zero());
    }

    SECTION("linear pair with determinant two") {
        Vars v2 = make_vars({"x1", "x2"});
        std::vector<RatFn> f = {parse_expr("3*x1 + x2", v2), parse_expr("x1 + x2", v2)};
        std::vector<RatFn> g = {parse_expr("x1/2 - x2/2", v2), parse_expr("-x1/2 + 3*x2/2", v2)};
        for (const RatFn& r : lemma45_residual(f, g)) REQUIRE(r.is_zero());
    }

    SECTION("random triangular pairs in two and three coordinates") {
        Rng rng(0x1447);
        for (int rep = 0; rep < 10; ++rep) {
            Vars vars = rep % 2 == 0 ? make_vars({"x1", "x2"}) : make_vars({"x1", "x2", "x3"});
            InversePair pr = random_triangular_pair(rng, vars);
            for (const RatFn& r : lemma45_residual(pr.f, pr.g)) REQUIRE(r.is_zero());
        }
    }

    SECTION("non-inverse pair is rejected") {
        Vars v2 = make_vars({"x1", "x2"});
        std::vector<RatFn> f = {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)};
        std::vector<RatFn> g = {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)};
        REQUIRE_THROWS_AS(lemma45_residual(f, g), std::invalid_argument);
    }
}

TEST_CASE("invariance residual for antisymmetric matrices") {
    Vars v2 = make_vars({"x1", "x2"});
    Rng rng(0xe147);

    auto antisym2 = [&](const RatFn& w) {
        Matrix<RatFn> F = ratfn_matrix(2, 2, v2);
        F.at(0, 1) = w;
        F.at(1, 0) = -w;
        return F;
    };

    SECTION("identity map degenerates to a trivial identity") {
        std::vector<RatFn> f = {RatFn::variable(v2, 0), RatFn::variable(v2, 1)};
        InvarianceResidual res = em_invariance_residual(f, antisym2(RatFn(rng.poly(v2, 2, 3))));
        for (const RatFn& r : res.residual) REQUIRE(r.is_zero());
        for (const RatFn& h : res.hessian_contraction) REQUIRE(h.is_zero());
    }

    SECTION("triangular and genuinely nonlinear maps") {
        std::vector<std::vector<RatFn>> maps = {
            {parse_expr("x1 + x2^2", v2), parse_expr("x2", v2)},
            {parse_expr("x1 + x2^3", v2), parse_expr("2*x2 - 1", v2)},
            {parse_expr("x1 + x2^2", v2), parse_expr("x2 + x1^3", v2)},
        };
        for (const auto& f : maps) {
            InvarianceResidual res = em_invariance_residual(f, antisym2(RatFn(rng.poly(v2, 2, 2))));
            for (const RatFn& r : res.residual) REQUIRE(r.is_zero());
            for (const RatFn& h : res.hessian_contraction) REQUIRE(h.is_zero());
        }
    }

    SECTION("three coordinates") {
        Vars v3 = make_vars({"x1", "x2", "x3"});
        for (int rep = 0; rep < 2; ++rep) {
            InversePair pr = random_triangular_pair(rng, v3);
            Matrix<RatFn> F = ratfn_matrix(3, 3, v3);
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    RatFn w = RatFn(rng.poly(v3, 3, 2, 2));
                    F.at(i, j) = w;
                    F.at(j, i) = -w;
                }
            InvarianceResidual res = em_invariance_residual(pr.f, F);
            for (const RatFn& r : res.residual) REQUIRE(r.is_zero());
            for (const RatFn& h : res.hessian_contraction) REQUIRE(h.is_zero());
        }
    }

    SECTION("symmetric matrix is rejected") {
        std::vector<RatFn> f = {RatFn::variable(v2, 0), RatFn::variable(v2, 1)};
        Matrix<RatFn> F = ratfn_matrix(2, 2, v2);
        F.at(0, 1) = RatFn::from_int(v2, 1);
        F.at(1, 0) = RatFn::from_int(v2, 1);
        REQUIRE_THROWS_AS(em_invariance_residual(f, F), std::invalid_argument);
    }
}

TEST_CASE("right action on volume forms") {
    Vars v2 = make_vars({"x", "y"});
    Rng rng(0xf01d);

    SECTION("single field on the plane") {
        RatFn a = RatFn(rng.poly(v2, 2, 3));
        Form alpha = volume(v2, 2, a);
        VecField dx = {RatFn::from_int(v2, 1), RatFn::zero(v2)};
        Form acted = volume_right_action(alpha, dx);
        REQUIRE(acted == volume(v2, 2, -a.derive(0)));
    }

    SECTION("constant density and divergence-free field") {
        Form alpha = volume(v2, 2, RatFn::from_int(v2, 5));
        VecField rot = {-RatFn::variable(v2, 1), RatFn::variable(v2, 0)};
        REQUIRE(volume_right_action(alpha, rot).is_zero());
    }

    SECTION("operator action extends the field action") {
        RatFn a = RatFn(rng.poly(v2, 2, 2));
        Form alpha = volume(v2, 2, a);
        VecField xi = {RatFn(rng.poly(v2, 2, 2)), RatFn(rng.poly(v2, 2, 2))};
        REQUIRE(volume_right_action(alpha, op_from_field(xi)) == volume_right_action(alpha, xi));
    }

    SECTION("commutator of fields acts as the bracket") {
        for (int rep = 0; rep < 5; ++rep) {
            RatFn a = RatFn(rng.poly(v2, 2, 2));
            Form alpha = volume(v2, 2, a);
            VecField xi = {RatFn(rng.poly(v2, 2, 2)), RatFn(rng.poly(v2, 2, 2))};
            VecField eta = {RatFn(rng.poly(v2, 2, 2)), RatFn(rng.poly(v2, 2, 2))};
            DiffOp px = op_from_field(xi), pe = op_from_field(eta);
            Form lhs = volume_right_action(alpha, op_mul(px, pe) - op_mul(pe, px));
            Form rhs = volume_right_action(alpha, op_from_field(vf_bracket(xi, eta, 2)));
            REQUIRE(lhs == rhs);
        }
    }

    SECTION("right module law") {
        for (int rep = 0; rep < 5; ++rep) {
            Form alpha = volume(v2, 2, RatFn(rng.poly(v2, 2, 2)));
            DiffOp p = random_op(rng, v2, 2, 2);
            DiffOp q = random_op(rng, v2, 2, 2);
            Form lhs = volume_right_action(alpha, op_mul(p, q));
            Form rhs = volume_right_action(volume_right_action(alpha, p), q);
            REQUIRE(lhs == rhs);
        }
    }
}

TEST_CASE("exterior sequence in four coordinates") {
    Vars v4 = make_vars({"x1", "x2", "x3", "x4"});
    OperatorMatrix d1 = ext_d_matrix(v4, 1);  // 6 x 4
    OperatorMatrix d2 = ext_d_matrix(v4, 2);  // 4 x 6
    REQUIRE(d1.rows == 6);
    REQUIRE(d2.rows == 4);
    REQUIRE(om_mul(d2, d1).is_zero());
    REQUIRE(om_mul(om_adjoint(d1), om_adjoint(d2)).is_zero());
    REQUIRE(om_adjoint(om_mul(d2, d1)) == om_mul(om_adjoint(d1), om_adjoint(d2)));
    REQUIRE(witness_check(d1).is_zero());
}
