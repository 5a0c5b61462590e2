#pragma once

// Nonlinear Spencer calculus on jets of chart self-maps: the 1-form chi that
// measures how far an invertible jet is from holonomic, its quadratic
// compatibility identities, the affine gauge action on chi, first variations,
// jet-bundle connections with their curvature, and the trace contraction that
// produces a closed scalar 2-form from a second-order chi.

#include <stdexcept>
#include <utility>
#include <vector>

#include "jetcal/forms.hpp"
#include "jetcal/jets.hpp"
#include "jetcal/lie_equations.hpp"

namespace jetcal {

// Degree-1 form with order-q jet values attached to an order-(q+1) map jet:
// component (k, mu, i) is chi^k_{mu,i}.  The zero-order block determines the
// frame matrix A^k_i = chi^k_{0,i} + delta^k_i.
struct SpencerChi {
    int n = 0, q = 0;
    Vars vars;
    Form form;

    SpencerChi(int n_, int q_, Vars vars_)
        : n(n_), q(q_), vars(std::move(vars_)), form(vars, n_, 1, ValueSpace::jet(n_, n_, q_)) {}

    const RatFn& at(int k, const MultiIndex& mu, int i) const { return form.get(k, mu, {i}); }
    void add(int k, const MultiIndex& mu, int i, const RatFn& v) { form.add(k, mu, {i}, v); }

    bool is_zero() const { return form.is_zero(); }
    bool operator==(const SpencerChi& o) const {
        return n == o.n && q == o.q && form == o.form;
    }
    bool operator!=(const SpencerChi& o) const { return !(*this == o); }

    // A^k_i = chi^k_{0,i} + delta^k_i
    Matrix<RatFn> a_matrix() const {
        Matrix<RatFn> A = ratfn_matrix(n, n, vars);
        MultiIndex z = MultiIndex::zeros(n);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) {
                A.at(k, i) = at(k, z, i);
                if (k == i) A.at(k, i) += RatFn::from_int(vars, 1);
            }
        return A;
    }

    // alpha_i = chi^r_{e_r,i} (first-order trace; needs q >= 1)
    RatFn alpha(int i) const {
        if (q < 1) throw std::invalid_argument("trace needs order >= 1");
        RatFn acc = RatFn::zero(vars);
        for (int r = 0; r < n; ++r) acc += at(r, MultiIndex::unit(n, r), i);
        return acc;
    }
};

// Solves, order by order, the triangular system
//   sum_{lam+nu=mu} C(mu;lam,nu) f^k_{lam+1_r} chi^r_{nu,i}
//       = d_i f^k_mu - f^k_{mu+1_i},        |mu| <= q,
// for the chi of an order-(q+1) map jet.  The |nu| = |mu| term carries the
// invertible first-order block, so each level is a linear solve against it.
// Holonomic jets give chi = 0.
inline SpencerChi spencer_chi(const JetMapSection& f) {
    f.validate();
    const int n = f.n(), q = f.order() - 1;
    const Vars& vars = f.vars();
    Matrix<RatFn> g = f.jacobian().inverse();

    SpencerChi chi(n, q, vars);
    for (int ord = 0; ord <= q; ++ord)
        for (const MultiIndex& mu : multi_indices_of_order(n, ord))
            for (int i = 0; i < n; ++i) {
                std::vector<RatFn> rhs;
                for (int k = 0; k < n; ++k) {
                    RatFn acc = f.at(k, mu).derive(i) - f.at(k, mu.inc(i));
                    for (const auto& [lam, nu] : splittings(mu)) {
                        if (nu == mu) continue;  // the unknowns of this level
                        RatFn cf = RatFn::constant(vars, Rat(multinomial(mu, lam, nu)));
                        for (int r = 0; r < n; ++r)
                            acc -= cf * f.at(k, lam.inc(r)) * chi.at(r, nu, i);
                    }
                    rhs.push_back(std::move(acc));
                }
                for (int k = 0; k < n; ++k) {
                    RatFn v = RatFn::zero(vars);
                    for (int l = 0; l < n; ++l) v += g.at(k, l) * rhs[l];
                    chi.add(k, mu, i, v);
                }
            }
    return chi;
}

// Compatibility identities of a generated chi, all levels |mu| <= q-1:
//   d_i chi^k_{mu,j} - d_j chi^k_{mu,i} - chi^k_{mu+1_i,j} + chi^k_{mu+1_j,i}
//   - sum_{lam+nu=mu} C(mu;lam,nu)
//         (chi^k_{lam+1_r,j} chi^r_{nu,i} - chi^k_{lam+1_r,i} chi^r_{nu,j})
// as a degree-2 form with order-(q-1) jet values; identically zero on the
// image of spencer_chi.
inline Form chi_cc_residual(const SpencerChi& chi) {
    if (chi.q < 1) throw std::invalid_argument("compatibility residual needs order >= 1");
    const int n = chi.n;
    Form out(chi.vars, n, 2, ValueSpace::jet(n, n, chi.q - 1));
    for (const MultiIndex& mu : multi_indices_up_to(n, chi.q - 1))
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    RatFn acc = chi.at(k, mu, j).derive(i) - chi.at(k, mu, i).derive(j) -
                                chi.at(k, mu.inc(i), j) + chi.at(k, mu.inc(j), i);
                    for (const auto& [lam, nu] : splittings(mu)) {
                        RatFn cf = RatFn::constant(chi.vars, Rat(multinomial(mu, lam, nu)));
                        for (int r = 0; r < n; ++r)
                            acc -= cf * (chi.at(k, lam.inc(r), j) * chi.at(r, nu, i) -
                                         chi.at(k, lam.inc(r), i) * chi.at(r, nu, j));
                    }
                    out.add(k, mu, {i, j}, acc);
                }
    return out;
}

// The same identities with the zero-order block absorbed into the frame
// matrix: the weight of each quadratic term at nu = 0 becomes A^r_i instead
// of chi^r_{0,i}, which cancels the linear level-shift terms.  Also
// identically zero on generated chi.
inline Form chi_cc_residual_via_a(const SpencerChi& chi) {
    if (chi.q < 1) throw std::invalid_argument("compatibility residual needs order >= 1");
    const int n = chi.n;
    MultiIndex z = MultiIndex::zeros(n);
    auto tilde = [&](int r, const MultiIndex& nu, int i) {
        RatFn v = chi.at(r, nu, i);
        if (nu == z && r == i) v += RatFn::from_int(chi.vars, 1);
        return v;
    };
    Form out(chi.vars, n, 2, ValueSpace::jet(n, n, chi.q - 1));
    for (const MultiIndex& mu : multi_indices_up_to(n, chi.q - 1))
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    RatFn acc = chi.at(k, mu, j).derive(i) - chi.at(k, mu, i).derive(j);
                    for (const auto& [lam, nu] : splittings(mu)) {
                        RatFn cf = RatFn::constant(chi.vars, Rat(multinomial(mu, lam, nu)));
                        for (int r = 0; r < n; ++r)
                            acc -= cf * (chi.at(k, lam.inc(r), j) * tilde(r, nu, i) -
                                         chi.at(k, lam.inc(r), i) * tilde(r, nu, j));
                    }
                    out.add(k, mu, {i, j}, acc);
                }
    return out;
}

// Conjugation of a chi attached to the target of f back to the source of f:
// each covector slot u of chibar is pushed through the inverse jet of f and
// the slot is pulled back by the base differential,
//   out^k_{mu,i} = zeta_u^k_mu * d_i f^u,  zeta_u = f^{-1} . chibar_{.,u}.
inline SpencerChi spencer_transport(const SpencerChi& chibar, const JetMapSection& f,
                                    const std::vector<RatFn>& base_inverse) {
    if (f.order() != chibar.q + 1)
        throw std::invalid_argument("transport needs a map jet one order above chi");
    const int n = chibar.n, q = chibar.q;
    const Vars& vars = chibar.vars;
    JetMapSection finv = jet_invert(f, base_inverse);
    std::vector<RatFn> fb = f.base_part();

    SpencerChi out(n, q, vars);
    for (int u = 0; u < n; ++u) {
        JetSection col(n, n, q, vars);
        for (const MultiIndex& mu : multi_indices_up_to(n, q))
            for (int k = 0; k < n; ++k) col.set(k, mu, chibar.at(k, mu, u));
        JetSection zeta = jet_act(finv, col, fb);
        for (const MultiIndex& mu : multi_indices_up_to(n, q))
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    out.add(k, mu, i, zeta.at(k, mu) * fb[u].derive(i));
    }
    return out;
}

// Affine gauge action on chi: transport by f plus the chi of f itself.
inline SpencerChi nl_gauge_transform(const SpencerChi& chi, const JetMapSection& f,
                                     const std::vector<RatFn>& base_inverse) {
    SpencerChi out = spencer_transport(chi, f, base_inverse);
    out.form = out.form + spencer_chi(f).form;
    return out;
}

// Residual of the composition rule chi(g o f) = transport(chi(g), f) + chi(f)
// for composable invertible jets of equal order; identically zero.
inline Form dbar_cocycle_residual(const JetMapSection& g, const JetMapSection& f,
                                  const std::vector<RatFn>& f_base_inverse) {
    SpencerChi lhs = spencer_chi(jet_compose(g, f));
    SpencerChi rhs = nl_gauge_transform(spencer_chi(g), f, f_base_inverse);
    return lhs.form - rhs.form;
}

// First variation of an order-1 chi under an order-2 jet field xi moving the
// attached map over the source:
//   delta chi^k_{,i}  = (d_i xi^k - xi^k_i)
//                     + xi^r d_r chi^k_{,i} + chi^k_{,r} d_i xi^r - chi^r_{,i} xi^k_r
//   delta chi^k_{j,i} = (d_i xi^k_j - xi^k_{ij})
//                     + xi^r d_r chi^k_{j,i} + chi^k_{j,r} d_i xi^r
//                     + chi^k_{r,i} xi^r_j - chi^r_{j,i} xi^k_r - chi^r_{,i} xi^k_{jr}
inline SpencerChi variation_chi(const SpencerChi& chi, const JetSection& xi) {
    if (chi.q != 1) throw std::invalid_argument("variation implemented at order one");
    if (xi.n() != chi.n || xi.m() != chi.n || xi.order() != 2)
        throw std::invalid_argument("variation needs an order-2 jet field over the same chart");
    const int n = chi.n;
    const Vars& vars = chi.vars;
    MultiIndex z = MultiIndex::zeros(n);

    SpencerChi out(n, 1, vars);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            RatFn acc = xi.at(k, z).derive(i) - xi.at(k, MultiIndex::unit(n, i));
            for (int r = 0; r < n; ++r) {
                acc += xi.at(r, z) * chi.at(k, z, i).derive(r);
                acc += chi.at(k, z, r) * xi.at(r, z).derive(i);
                acc -= chi.at(r, z, i) * xi.at(k, MultiIndex::unit(n, r));
            }
            out.add(k, z, i, acc);
        }
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            MultiIndex ej = MultiIndex::unit(n, j);
            for (int i = 0; i < n; ++i) {
                RatFn acc = xi.at(k, ej).derive(i) - xi.at(k, ej.inc(i));
                for (int r = 0; r < n; ++r) {
                    MultiIndex er = MultiIndex::unit(n, r);
                    acc += xi.at(r, z) * chi.at(k, ej, i).derive(r);
                    acc += chi.at(k, ej, r) * xi.at(r, z).derive(i);
                    acc += chi.at(k, er, i) * xi.at(r, ej);
                    acc -= chi.at(r, ej, i) * xi.at(k, er);
                    acc -= chi.at(r, z, i) * xi.at(k, ej.inc(r));
                }
                out.add(k, ej, i, acc);
            }
        }
    return out;
}

// First variation of the trace alpha_i = chi^r_{e_r,i}:
//   delta alpha_i = (d_i xi^r_r - xi^r_{ri})
//                 + xi^r d_r alpha_i + alpha_r d_i xi^r - chi^s_{,i} xi^r_{rs}
inline RatFn variation_alpha(const SpencerChi& chi, const JetSection& xi, int i) {
    if (chi.q != 1) throw std::invalid_argument("variation implemented at order one");
    const int n = chi.n;
    const Vars& vars = chi.vars;
    MultiIndex z = MultiIndex::zeros(n);
    RatFn acc = RatFn::zero(vars);
    for (int r = 0; r < n; ++r) {
        MultiIndex er = MultiIndex::unit(n, r);
        acc += xi.at(r, er).derive(i) - xi.at(r, er.inc(i));
        acc += xi.at(r, z) * chi.alpha(i).derive(r);
        acc += chi.alpha(r) * xi.at(r, z).derive(i);
        for (int s = 0; s < n; ++s)
            acc -= chi.at(s, z, i) * xi.at(r, er.inc(s));
    }
    return acc;
}

// ---- jet-bundle connections ------------------------------------------------

// A splitting of the projection of an order-q equation kernel onto the
// tangent space: column i is the order-q jet section assigned to the i-th
// coordinate field, with base part the i-th constant unit field.
struct JetConnection {
    std::vector<JetSection> cols;
};

// (delta^k_i, -gamma^k_{ij}): the symmetric splitting built from the
// Levi-Civita coefficients of a metric; its columns satisfy the first-order
// metric flow equations identically.
inline JetConnection metric_connection(const MetricData& md) {
    const int n = md.n;
    JetConnection conn;
    for (int i = 0; i < n; ++i) {
        JetSection s(n, n, 1, md.vars);
        s.set(i, MultiIndex::zeros(n), RatFn::from_int(md.vars, 1));
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                s.set(k, MultiIndex::unit(n, j), -md.gamma[k].at(j, i));
        conn.cols.push_back(std::move(s));
    }
    return conn;
}

// Checks the splitting condition (base part of column i is the i-th unit
// field) and membership of every column in the kernel of the system.
inline void validate_connection(const JetConnection& conn, const LinearSystem& sys) {
    const int n = sys.n();
    if (static_cast<int>(conn.cols.size()) != n)
        throw std::invalid_argument("connection needs one column per coordinate");
    MultiIndex z = MultiIndex::zeros(n);
    for (int i = 0; i < n; ++i) {
        const JetSection& s = conn.cols[i];
        if (s.n() != n || s.m() != sys.m() || s.order() != sys.order())
            throw std::invalid_argument("connection column shape mismatch");
        for (int k = 0; k < n; ++k) {
            RatFn want = k == i ? RatFn::from_int(sys.vars(), 1) : RatFn::zero(sys.vars());
            if (s.at(k, z) != want)
                throw std::invalid_argument("connection does not split the projection");
        }
        for (const auto& eq : sys.equations())
            if (!eq.apply(s).is_zero())
                throw std::invalid_argument("connection column escapes the equation kernel");
    }
}

namespace detail {

inline JetSection jet_combination(const JetConnection& conn, const VecField& xi) {
    if (conn.cols.empty()) throw std::invalid_argument("empty connection");
    const int n = static_cast<int>(conn.cols.size());
    const Vars& vars = conn.cols[0].vars();
    JetSection out(n, conn.cols[0].m(), conn.cols[0].order(), vars);
    for (int i = 0; i < n; ++i)
        for (const auto& [key, val] : conn.cols[i].components())
            out.set(key.first, key.second, out.at(key.first, key.second) + val * xi[i]);
    return out;
}

}  // namespace detail

// Curvature of a splitting on a pair of vector fields:
//   kappa(xi, eta) = [conn(xi), conn(eta)] - conn([xi, eta]),
// an order-q jet section with zero base part; the bracket is the
// lift-independent differential bracket.
inline JetSection connection_curvature(const JetConnection& conn, const VecField& xi,
                                       const VecField& eta) {
    const int n = static_cast<int>(conn.cols.size());
    JetSection cx = detail::jet_combination(conn, xi);
    JetSection ce = detail::jet_combination(conn, eta);
    VecField bracket = vf_bracket(xi, eta, n);
    return differential_bracket(cx, ce) - detail::jet_combination(conn, bracket);
}

// ---- trace contraction to a scalar 2-form ----------------------------------

// For an order-2 chi: the contraction
//   phi_{ij} = A^s_i chi^r_{e_r+e_s,j} - A^s_j chi^r_{e_r+e_s,i}
// together with the residual phi - d(alpha), where alpha_i = chi^r_{e_r,i}.
// On generated chi the residual vanishes identically, so phi is exact and in
// particular closed.
inline std::pair<Form, Form> phi_2form(const SpencerChi& chi) {
    if (chi.q != 2) throw std::invalid_argument("contraction needs an order-2 chi");
    const int n = chi.n;
    const Vars& vars = chi.vars;
    Matrix<RatFn> A = chi.a_matrix();

    Form phi(vars, n, 2, ValueSpace::scalar());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            RatFn acc = RatFn::zero(vars);
            for (int s = 0; s < n; ++s)
                for (int r = 0; r < n; ++r) {
                    MultiIndex rs = MultiIndex::unit(n, r).inc(s);
                    acc += A.at(s, i) * chi.at(r, rs, j) - A.at(s, j) * chi.at(r, rs, i);
                }
            phi.add(0, {i, j}, acc);
        }

    Form alpha(vars, n, 1, ValueSpace::scalar());
    for (int i = 0; i < n; ++i) alpha.add(0, {i}, chi.alpha(i));
    return {phi, phi - alpha.ext_d()};
}

// ---- linear counterpart through a metric splitting --------------------------

// Data built from the degree-1 jet-valued image X of an order-3 jet field
// under the linear series operator, corrected by Levi-Civita coefficients:
//   A^k_{l,i} = X^k_{l,i} + gamma^k_{ls} X^s_{,i}          (trace A_i = A^r_{r,i})
//   B^k_{lj,i} = X^k_{lj,i} + gamma^k_{sj} X^s_{l,i} + gamma^k_{ls} X^s_{j,i}
//              - gamma^s_{lj} X^k_{s,i} + X^r_{,i} d_r gamma^k_{lj}
//   F_{ij} = B^r_{ri,j} - B^r_{rj,i}
// dd_residual holds the square-zero identities of the series operator at
// levels 0 and 1; chain_residual is F - d(A-trace).  Both vanish identically.
struct LinearContraction {
    Form x;               // degree 1, order-2 jet values
    Form a_trace;         // degree 1, scalar: A_i
    Form f2;              // degree 2, scalar: F_{ij}
    Form dd_residual;     // degree 2, order-1 jet values
    Form chain_residual;  // degree 2, scalar
};

inline LinearContraction linear_F_2form(const JetSection& xi, const MetricData& md) {
    if (xi.order() != 3 || xi.n() != md.n || xi.m() != md.n)
        throw std::invalid_argument("contraction needs an order-3 jet field over the metric chart");
    const int n = md.n;
    const Vars& vars = md.vars;
    MultiIndex z = MultiIndex::zeros(n);

    Form X = spencer_D(xi);  // (k, mu, i) for |mu| <= 2
    auto Xat = [&](int k, const MultiIndex& mu, int i) { return X.get(k, mu, {i}); };

    // A^k_{l,i} and its trace
    auto Aat = [&](int k, int l, int i) {
        RatFn acc = Xat(k, MultiIndex::unit(n, l), i);
        for (int s = 0; s < n; ++s) acc += md.gamma[k].at(l, s) * Xat(s, z, i);
        return acc;
    };
    Form a_trace(vars, n, 1, ValueSpace::scalar());
    for (int i = 0; i < n; ++i) {
        RatFn acc = RatFn::zero(vars);
        for (int r = 0; r < n; ++r) acc += Aat(r, r, i);
        a_trace.add(0, {i}, acc);
    }

    auto Bat = [&](int k, int l, int j, int i) {
        RatFn acc = Xat(k, MultiIndex::unit(n, l).inc(j), i);
        for (int s = 0; s < n; ++s) {
            acc += md.gamma[k].at(s, j) * Xat(s, MultiIndex::unit(n, l), i);
            acc += md.gamma[k].at(l, s) * Xat(s, MultiIndex::unit(n, j), i);
            acc -= md.gamma[s].at(l, j) * Xat(k, MultiIndex::unit(n, s), i);
        }
        for (int r = 0; r < n; ++r) acc += Xat(r, z, i) * md.gamma[k].at(l, j).derive(r);
        return acc;
    };

    Form f2(vars, n, 2, ValueSpace::scalar());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            RatFn acc = RatFn::zero(vars);
            for (int r = 0; r < n; ++r) acc += Bat(r, r, i, j) - Bat(r, r, j, i);
            f2.add(0, {i, j}, acc);
        }

    // square-zero identities of the series operator at levels 0 and 1
    Form dd(vars, n, 2, ValueSpace::jet(n, n, 1));
    for (const MultiIndex& mu : multi_indices_up_to(n, 1))
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    dd.add(k, mu, {i, j},
                           Xat(k, mu, j).derive(i) - Xat(k, mu, i).derive(j) +
                               Xat(k, mu.inc(j), i) - Xat(k, mu.inc(i), j));

    LinearContraction out{std::move(X), std::move(a_trace), std::move(f2),
                          std::move(dd), Form(vars, n, 2, ValueSpace::scalar())};
    out.chain_residual = out.f2 - out.a_trace.ext_d();
    return out;
}

}  // namespace jetcal
