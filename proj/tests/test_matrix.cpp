#include <catch2/catch_amalgamated.hpp>

#include <jetcal/matrix.hpp>
#include <jetcal/parser.hpp>
#include <jetcal/rng.hpp>

using namespace jetcal;

TEST_CASE("exact rank of a Hilbert matrix") {
    // classic ill-conditioned case: floating point loses this, exact does not
    const int n = 10;
    Matrix<Rat> h = rat_matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h.at(i, j) = make_rat(1, i + j + 1);
    CHECK(h.rank() == n);
    CHECK(rank_bareiss(h) == n);
    CHECK(!h.det().is_zero());
}

TEST_CASE("rank, nullspace, solve over rationals") {
    Matrix<Rat> m = rat_matrix(3, 4);
    // rows: combinations with a 2-dim row space
    long rows[3][4] = {{1, 2, 0, -1}, {2, 4, 1, 0}, {3, 6, 1, -1}};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) m.at(r, c) = Rat(rows[r][c]);
    CHECK(m.rank() == 2);
    CHECK(rank_bareiss(m) == 2);

    auto ns = m.nullspace();
    REQUIRE(ns.size() == 2);
    for (const auto& v : ns)
        for (int r = 0; r < 3; ++r) {
            Rat acc(0);
            for (int c = 0; c < 4; ++c) acc += m.at(r, c) * v[c];
            CHECK(acc.is_zero());
        }

    auto sol = m.solve({Rat(1), Rat(2), Rat(3)});
    REQUIRE(sol.has_value());
    auto bad = m.solve({Rat(1), Rat(2), Rat(4)});  // outside the column space
    CHECK(!bad.has_value());
}

TEST_CASE("bareiss agrees with field elimination") {
    Rng rng(7);
    for (int it = 0; it < 15; ++it) {
        int rows = static_cast<int>(rng.uniform(2, 6));
        int cols = static_cast<int>(rng.uniform(2, 6));
        Matrix<Rat> m = rat_matrix(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (rng.chance(2, 3)) m.at(r, c) = rng.rat(5, 3);
        CHECK(m.rank() == rank_bareiss(m));
    }
}

TEST_CASE("symbolic matrix inverse") {
    Vars vars = make_vars({"x"});
    auto E = [&](const char* s) { return parse_expr(s, vars); };

    Matrix<RatFn> m = ratfn_matrix(2, 2, vars);
    m.at(0, 0) = E("1");
    m.at(0, 1) = E("x");
    m.at(1, 0) = E("0");
    m.at(1, 1) = E("x^2 + 1");
    Matrix<RatFn> inv = m.inverse();
    CHECK((m * inv) == Matrix<RatFn>::identity(2, m.zero(), m.one()));
    CHECK((inv * m) == Matrix<RatFn>::identity(2, m.zero(), m.one()));
    CHECK(m.det() == E("x^2 + 1"));

    Matrix<RatFn> sing = ratfn_matrix(2, 2, vars);
    sing.at(0, 0) = E("x");
    sing.at(0, 1) = E("x^2");
    sing.at(1, 0) = E("1");
    sing.at(1, 1) = E("x");
    CHECK(sing.det().is_zero());
    CHECK(sing.rank() == 1);
    CHECK_THROWS_AS(sing.inverse(), std::domain_error);
}

TEST_CASE("rational-function nullspace") {
    Vars vars = make_vars({"x"});
    auto E = [&](const char* s) { return parse_expr(s, vars); };
    // rows of a 2x3 system with rank 2; kernel is 1-dim with x-dependent entries
    Matrix<RatFn> m = ratfn_matrix(2, 3, vars);
    m.at(0, 0) = E("1");
    m.at(0, 1) = E("x");
    m.at(0, 2) = E("0");
    m.at(1, 0) = E("0");
    m.at(1, 1) = E("1");
    m.at(1, 2) = E("x");
    auto ns = m.nullspace();
    REQUIRE(ns.size() == 1);
    for (int r = 0; r < 2; ++r) {
        RatFn acc = RatFn::zero(vars);
        for (int c = 0; c < 3; ++c) acc += m.at(r, c) * ns[0][c];
        CHECK(acc.is_zero());
    }
}
