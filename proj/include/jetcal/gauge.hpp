#pragma once

#include "forms.hpp"
#include "lie_algebra.hpp"
#include "matrix.hpp"
#include "rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// d x d matrix of exact rational functions.
using MatrixMap = Matrix<RatFn>;

inline MatrixMap derive_matrix(const MatrixMap& m, int v) {
    MatrixMap out = m;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(r, c).derive(v);
    return out;
}

inline MatrixMap lift_matrix(const Matrix<Rat>& m, const Vars& vars) {
    MatrixMap out = ratfn_matrix(m.rows(), m.cols(), vars);
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out.at(r, c) = RatFn::constant(vars, m.at(r, c));
    return out;
}

namespace detail {

// Re-expresses a function of the tail variables [offset, offset+count) of one
// chart over a standalone chart with matching order; any dependence on other
// variables is an error.
inline Poly restrict_poly(const Poly& p, const Vars& to, int offset, int count) {
    Poly out = Poly::zero(to);
    for (const auto& [mu, c] : p.terms()) {
        std::vector<int> e(count, 0);
        for (int j = 0; j < mu.arity(); ++j) {
            if (mu[j] == 0) continue;
            if (j < offset || j >= offset + count)
                throw std::invalid_argument("function depends on variables outside the subchart");
            e[j - offset] = mu[j];
        }
        out += Poly::monomial(to, MultiIndex(e), c);
    }
    return out;
}

inline RatFn restrict_vars(const RatFn& f, const Vars& to, int offset, int count) {
    return RatFn(restrict_poly(f.num(), to, offset, count),
                 restrict_poly(f.den(), to, offset, count));
}

}  // namespace detail

// A group action in coordinates: the chart lists the n base variables first,
// then the p group parameters; `motion` gives the moved point as a function
// of both, and `identity` is the parameter tuple acting trivially.
struct GroupAction {
    int n = 0;
    int p = 0;
    Vars vars;
    std::vector<RatFn> motion;
    std::vector<Rat> identity;
};

inline void validate_action(const GroupAction& act) {
    if (act.n <= 0 || act.p <= 0 || static_cast<int>(act.motion.size()) != act.n ||
        static_cast<int>(act.identity.size()) != act.p ||
        static_cast<int>(act.vars->size()) != act.n + act.p)
        throw std::invalid_argument("malformed group action");
    std::vector<RatFn> at_e;
    for (int j = 0; j < act.n; ++j) at_e.push_back(RatFn::variable(act.vars, j));
    for (int s = 0; s < act.p; ++s) at_e.push_back(RatFn::constant(act.vars, act.identity[s]));
    for (int i = 0; i < act.n; ++i)
        if (act.motion[i].subst(at_e) != RatFn::variable(act.vars, i))
            throw std::invalid_argument("identity parameters do not act trivially");
}

// Infinitesimal generators: the parameter derivatives of the motion at the
// identity, one vector field per group parameter (functions of the base
// variables only).
inline std::vector<VecField> action_generators(const GroupAction& act) {
    validate_action(act);
    std::vector<RatFn> at_e;
    for (int j = 0; j < act.n; ++j) at_e.push_back(RatFn::variable(act.vars, j));
    for (int s = 0; s < act.p; ++s) at_e.push_back(RatFn::constant(act.vars, act.identity[s]));
    std::vector<VecField> theta;
    for (int s = 0; s < act.p; ++s) {
        VecField th;
        for (int i = 0; i < act.n; ++i) th.push_back(act.motion[i].derive(act.n + s).subst(at_e));
        theta.push_back(std::move(th));
    }
    return theta;
}

// The invariant coframe of an action together with the bracket table of its
// generators.  omega lives on a standalone group chart (the parameter
// variables); it solves the transport equations
//   d(motion)/d a^sigma = theta_rho(motion) * omega^rho_sigma
// and is verified symbolically in all variables before being returned.
struct MaurerCartanData {
    Vars group_vars;
    Form omega;                  // degree-1, Lie(p)-valued
    Matrix<RatFn> omega_matrix;  // p x p, entry (rho, sigma) on d a^sigma
    StructureConstants c;
    std::vector<VecField> generators;  // over the action chart
};

inline MaurerCartanData mc_forms(const GroupAction& act, std::uint64_t seed = 0x0c0ffee) {
    validate_action(act);
    const int n = act.n, p = act.p;
    const Vars& vars = act.vars;
    auto theta = action_generators(act);

    std::vector<RatFn> all;
    for (const auto& th : theta)
        for (const RatFn& f : th) all.push_back(f);
    for (const RatFn& f : act.motion) all.push_back(f);

    StructureConstants c = infer_structure_constants(theta, n, seed ^ 0x517e);

    // Stack the transport equations at sampled base points; the group
    // parameters stay symbolic.
    const int npts = p + 2;
    auto pts = detail::sample_points(all, n, npts, seed);
    auto subst_base = [&](const RatFn& f, const std::vector<Rat>& xp) {
        std::vector<RatFn> im;
        for (int j = 0; j < n; ++j) im.push_back(RatFn::constant(vars, xp[j]));
        for (int s = 0; s < p; ++s) im.push_back(RatFn::variable(vars, n + s));
        return f.subst(im);
    };

    Matrix<RatFn> M = ratfn_matrix(n * npts, p, vars);
    for (int t = 0; t < npts; ++t)
        for (int i = 0; i < n; ++i)
            for (int rho = 0; rho < p; ++rho) {
                // theta_rho^i evaluated at the moved point, base point frozen
                std::vector<RatFn> at_motion;
                for (int j = 0; j < n; ++j) at_motion.push_back(act.motion[j]);
                for (int s = 0; s < p; ++s) at_motion.push_back(RatFn::variable(vars, n + s));
                M.at(t * n + i, rho) = subst_base(theta[rho][i].subst(at_motion), pts[t]);
            }
    if (M.rank() < p)
        throw std::runtime_error("action is not effective: transport equations underdetermine the coframe");

    Matrix<RatFn> omega_comb = ratfn_matrix(p, p, vars);
    for (int sigma = 0; sigma < p; ++sigma) {
        std::vector<RatFn> rhs;
        for (int t = 0; t < npts; ++t)
            for (int i = 0; i < n; ++i)
                rhs.push_back(subst_base(act.motion[i].derive(n + sigma), pts[t]));
        auto sol = M.solve(rhs);
        if (!sol) throw std::runtime_error("transport equations are inconsistent at the sample points");
        for (int rho = 0; rho < p; ++rho) omega_comb.at(rho, sigma) = (*sol)[rho];
    }

    // full symbolic verification over base and group variables together
    {
        std::vector<RatFn> at_motion;
        for (int j = 0; j < n; ++j) at_motion.push_back(act.motion[j]);
        for (int s = 0; s < p; ++s) at_motion.push_back(RatFn::variable(vars, n + s));
        for (int sigma = 0; sigma < p; ++sigma)
            for (int i = 0; i < n; ++i) {
                RatFn acc = RatFn::zero(vars);
                for (int rho = 0; rho < p; ++rho)
                    acc += theta[rho][i].subst(at_motion) * omega_comb.at(rho, sigma);
                if (acc != act.motion[i].derive(n + sigma))
                    throw std::runtime_error("coframe candidate fails the transport equations");
            }
    }

    // move to the standalone group chart
    std::vector<std::string> gnames;
    for (int s = 0; s < p; ++s) gnames.push_back(vars->name(n + s));
    Vars gv = make_vars(gnames);
    Matrix<RatFn> omega_g = ratfn_matrix(p, p, gv);
    for (int rho = 0; rho < p; ++rho)
        for (int sigma = 0; sigma < p; ++sigma)
            omega_g.at(rho, sigma) = detail::restrict_vars(omega_comb.at(rho, sigma), gv, n, p);
    if (omega_g.det().is_zero()) throw std::runtime_error("coframe is degenerate");

    Form omega(gv, p, 1, ValueSpace::lie(p));
    for (int rho = 0; rho < p; ++rho)
        for (int sigma = 0; sigma < p; ++sigma) omega.add(rho, {sigma}, omega_g.at(rho, sigma));

    return {gv, std::move(omega), std::move(omega_g), std::move(c), std::move(theta)};
}

// A basis of matrices realizing structure constants: commutators must close
// with the opposite sign of the vector-field table, [E_r, E_s] = -c^t_{rs} E_t.
struct LieRep {
    int p = 0;
    int d = 0;
    std::vector<Matrix<Rat>> basis;
};

inline std::vector<std::string> representation_violations(const LieRep& rep,
                                                          const StructureConstants& c) {
    std::vector<std::string> out;
    if (rep.p != c.dim() || static_cast<int>(rep.basis.size()) != rep.p) {
        out.push_back("basis count does not match the bracket table");
        return out;
    }
    for (int r = 0; r < rep.p; ++r)
        for (int s = r + 1; s < rep.p; ++s) {
            Matrix<Rat> lhs = rep.basis[r] * rep.basis[s] - rep.basis[s] * rep.basis[r];
            for (int t = 0; t < rep.p; ++t) {
                Matrix<Rat> scaled = rep.basis[t];
                for (int i = 0; i < rep.d; ++i)
                    for (int j = 0; j < rep.d; ++j) scaled.at(i, j) = scaled.at(i, j) * (-c.at(t, r, s));
                lhs = lhs - scaled;
            }
            if (!lhs.is_zero())
                out.push_back("commutator (" + std::to_string(r) + "," + std::to_string(s) +
                              ") does not match the bracket table");
        }
    return out;
}

inline void check_representation(const LieRep& rep, const StructureConstants& c) {
    auto v = representation_violations(rep, c);
    if (!v.empty()) throw std::invalid_argument(v.front());
}

// Coordinates of a matrix function in the span of the basis; throws when the
// matrix leaves the span.
inline std::vector<RatFn> rep_coordinates(const LieRep& rep, const MatrixMap& m) {
    const Vars& vars = m.at(0, 0).vars();
    Matrix<RatFn> B = ratfn_matrix(rep.d * rep.d, rep.p, vars);
    std::vector<RatFn> rhs;
    for (int i = 0; i < rep.d; ++i)
        for (int j = 0; j < rep.d; ++j) {
            for (int t = 0; t < rep.p; ++t)
                B.at(i * rep.d + j, t) = RatFn::constant(vars, rep.basis[t].at(i, j));
            rhs.push_back(m.at(i, j));
        }
    auto sol = B.solve(rhs);
    if (!sol) throw std::invalid_argument("matrix leaves the span of the representation basis");
    return *sol;
}

// Left and right logarithmic derivatives of a matrix-valued map of the base:
// per direction i, left[i] = a^{-1} d_i a and right[i] = (d_i a) a^{-1}.
struct GaugePotentials {
    std::vector<MatrixMap> left;
    std::vector<MatrixMap> right;
};

inline GaugePotentials gauge_potentials(const MatrixMap& a, int n) {
    if (a.det().is_zero()) throw std::invalid_argument("gauge map is singular");
    MatrixMap ainv = a.inverse();
    GaugePotentials out;
    for (int i = 0; i < n; ++i) {
        MatrixMap da = derive_matrix(a, i);
        out.left.push_back(ainv * da);
        out.right.push_back(da * ainv);
    }
    return out;
}

// The coordinate 1-form of the left potentials of a gauge map.
inline Form potential_form(const LieRep& rep, const MatrixMap& a, int n) {
    const Vars& vars = a.at(0, 0).vars();
    GaugePotentials pot = gauge_potentials(a, n);
    Form A(vars, n, 1, ValueSpace::lie(rep.p));
    for (int i = 0; i < n; ++i) {
        auto coords = rep_coordinates(rep, pot.left[i]);
        for (int t = 0; t < rep.p; ++t) A.add(t, {i}, coords[t]);
    }
    return A;
}

// The matrix of a Lie-valued form component on one index tuple.
inline MatrixMap rep_matrix_of(const LieRep& rep, const Form& w, const std::vector<int>& I) {
    const Vars& vars = w.vars();
    MatrixMap out = ratfn_matrix(rep.d, rep.d, vars);
    for (int t = 0; t < rep.p; ++t) {
        const RatFn& comp = w.get(t, I);
        if (comp.is_zero()) continue;
        for (int i = 0; i < rep.d; ++i)
            for (int j = 0; j < rep.d; ++j)
                out.at(i, j) += RatFn::constant(vars, rep.basis[t].at(i, j)) * comp;
    }
    return out;
}

// Finite gauge transform of a coordinate potential: matrixwise
// A' = b^{-1} A b + b^{-1} db, solved back into the basis coordinates.
inline Form gauge_transform(const LieRep& rep, const Form& A, const MatrixMap& b) {
    if (A.degree() != 1 || A.values().kind != ValueSpace::Kind::Lie || A.values().p != rep.p)
        throw std::invalid_argument("gauge transform needs a Lie-valued potential 1-form");
    if (b.det().is_zero()) throw std::invalid_argument("gauge map is singular");
    const int n = A.n();
    MatrixMap binv = b.inverse();
    Form out(A.vars(), n, 1, A.values());
    for (int i = 0; i < n; ++i) {
        MatrixMap Ai = rep_matrix_of(rep, A, {i});
        MatrixMap Ai2 = binv * Ai * b + binv * derive_matrix(b, i);
        auto coords = rep_coordinates(rep, Ai2);
        for (int t = 0; t < rep.p; ++t) out.add(t, {i}, coords[t]);
    }
    return out;
}

// Infinitesimal gauge variation of a potential along a parameter field:
// (dA)^t_i = d_i lambda^t - c^t_{rs} A^r_i lambda^s.
inline Form infinitesimal_variation(const Form& A, const std::vector<RatFn>& lambda,
                                    const StructureConstants& c) {
    if (A.degree() != 1 || A.values().kind != ValueSpace::Kind::Lie || A.values().p != c.dim())
        throw std::invalid_argument("variation needs a Lie-valued potential 1-form");
    const int n = A.n(), p = c.dim();
    Form out(A.vars(), n, 1, A.values());
    for (int t = 0; t < p; ++t)
        for (int i = 0; i < n; ++i) {
            RatFn acc = lambda[t].derive(i);
            for (int r = 0; r < p; ++r)
                for (int s = 0; s < p; ++s) {
                    const Rat& ct = c.at(t, r, s);
                    if (ct.is_zero()) continue;
                    acc -= RatFn::constant(A.vars(), ct) * A.get(r, {i}) * lambda[s];
                }
            out.add(t, {i}, acc);
        }
    return out;
}

// Divergence-shaped variational residual of a potential with momenta:
// res_t = d_i P^i_t + c^s_{rt} A^r_i P^i_s, with momenta P as an n x p matrix.
inline std::vector<RatFn> euler_lagrange_residual(const Form& A, const Matrix<RatFn>& momenta,
                                                  const StructureConstants& c) {
    const int n = A.n(), p = c.dim();
    if (momenta.rows() != n || momenta.cols() != p)
        throw std::invalid_argument("momenta shape mismatch");
    std::vector<RatFn> out;
    for (int t = 0; t < p; ++t) {
        RatFn acc = RatFn::zero(A.vars());
        for (int i = 0; i < n; ++i) {
            acc += momenta.at(i, t).derive(i);
            for (int r = 0; r < p; ++r)
                for (int s = 0; s < p; ++s) {
                    const Rat& ct = c.at(s, r, t);
                    if (ct.is_zero()) continue;
                    acc += RatFn::constant(A.vars(), ct) * A.get(r, {i}) * momenta.at(i, s);
                }
        }
        out.push_back(acc);
    }
    return out;
}

// Conjugation of the basis by a gauge map: a^{-1} E_s a = M^t_s E_t.
inline Matrix<RatFn> conjugation_matrix(const LieRep& rep, const MatrixMap& a) {
    const Vars& vars = a.at(0, 0).vars();
    MatrixMap ainv = a.inverse();
    Matrix<RatFn> M = ratfn_matrix(rep.p, rep.p, vars);
    for (int s = 0; s < rep.p; ++s) {
        auto coords = rep_coordinates(rep, ainv * lift_matrix(rep.basis[s], vars) * a);
        for (int t = 0; t < rep.p; ++t) M.at(t, s) = coords[t];
    }
    return M;
}

// For the pure-gauge potential of `a` and arbitrary momenta, the divergence
// of the conjugated momenta B^i_s = P^i_t M^t_s equals M^r_s times the
// variational residual.  Returns the p differences (all zero when the
// identity holds).
inline std::vector<RatFn> divergence_identity_residual(const LieRep& rep,
                                                       const StructureConstants& c,
                                                       const MatrixMap& a,
                                                       const Matrix<RatFn>& momenta, int n) {
    Form A = potential_form(rep, a, n);
    Matrix<RatFn> M = conjugation_matrix(rep, a);
    std::vector<RatFn> el = euler_lagrange_residual(A, momenta, c);
    std::vector<RatFn> out;
    for (int s = 0; s < rep.p; ++s) {
        RatFn lhs = RatFn::zero(A.vars());
        for (int i = 0; i < n; ++i) {
            RatFn Bi = RatFn::zero(A.vars());
            for (int t = 0; t < rep.p; ++t) Bi += momenta.at(i, t) * M.at(t, s);
            lhs += Bi.derive(i);
        }
        RatFn rhs = RatFn::zero(A.vars());
        for (int r = 0; r < rep.p; ++r) rhs += M.at(r, s) * el[r];
        out.push_back(lhs - rhs);
    }
    return out;
}

// ---- rigid motions ----------------------------------------------------

// Cayley transform of a skew matrix: (I - S)^{-1} (I + S), orthogonal with
// unit determinant whenever S is skew.
inline MatrixMap cayley(const MatrixMap& S) {
    const Vars& vars = S.at(0, 0).vars();
    const int d = S.rows();
    MatrixMap I = ratfn_matrix(d, d, vars);
    for (int i = 0; i < d; ++i) I.at(i, i) = RatFn::from_int(vars, 1);
    MatrixMap A = I - S, B = I + S;
    return A.inverse() * B;
}

inline bool is_skew(const MatrixMap& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!(m.at(i, j) + m.at(j, i)).is_zero()) return false;
    return true;
}

// A time-dependent Euclidean motion y = a(t) x + b(t) with orthogonal a.
struct RigidMotion {
    MatrixMap rot;             // 3 x 3
    std::vector<RatFn> trans;  // 3
};

inline void validate_rigid(const RigidMotion& m) {
    const Vars& vars = m.rot.at(0, 0).vars();
    MatrixMap I = ratfn_matrix(3, 3, vars);
    for (int i = 0; i < 3; ++i) I.at(i, i) = RatFn::from_int(vars, 1);
    if (!(m.rot.transpose() * m.rot == I))
        throw std::invalid_argument("rotation part is not orthogonal");
    if (m.trans.size() != 3) throw std::invalid_argument("translation part needs 3 components");
}

// Velocity seen from the body frame: (a^T da/dt, a^T db/dt).
inline std::pair<MatrixMap, VecField> body_velocity(const RigidMotion& m, int t) {
    MatrixMap W = m.rot.transpose() * derive_matrix(m.rot, t);
    VecField u;
    for (int i = 0; i < 3; ++i) {
        RatFn acc = RatFn::zero(m.trans[0].vars());
        for (int j = 0; j < 3; ++j) acc += m.rot.at(j, i) * m.trans[j].derive(t);
        u.push_back(acc);
    }
    return {std::move(W), std::move(u)};
}

// Velocity seen from the space frame: (da/dt a^T, db/dt - (da/dt a^T) b).
inline std::pair<MatrixMap, VecField> space_velocity(const RigidMotion& m, int t) {
    MatrixMap W = derive_matrix(m.rot, t) * m.rot.transpose();
    VecField u;
    for (int i = 0; i < 3; ++i) {
        RatFn acc = m.trans[i].derive(t);
        for (int j = 0; j < 3; ++j) acc -= W.at(i, j) * m.trans[j];
        u.push_back(acc);
    }
    return {std::move(W), std::move(u)};
}

// The velocity field v(x, t) = W x + u over a chart whose first three
// variables are the spatial coordinates.
inline VecField velocity_field(const RigidMotion& m, int t) {
    auto [W, u] = space_velocity(m, t);
    const Vars& vars = m.rot.at(0, 0).vars();
    VecField v;
    for (int i = 0; i < 3; ++i) {
        RatFn acc = u[i];
        for (int j = 0; j < 3; ++j) acc += W.at(i, j) * RatFn::variable(vars, j);
        v.push_back(acc);
    }
    return v;
}

inline VecField axial(const MatrixMap& W) {
    return {W.at(2, 1), W.at(0, 2), W.at(1, 0)};
}

inline VecField curl3(const VecField& v) {
    return {v[2].derive(1) - v[1].derive(2), v[0].derive(2) - v[2].derive(0),
            v[1].derive(0) - v[0].derive(1)};
}

}  // namespace jetcal
