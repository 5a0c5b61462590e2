#pragma once

// Scalar differential operators in normal form (all coefficients to the left
// of the derivations), rectangular matrices of them, formal adjoints with
// constructive divergence witnesses, the dual of the one-dimensional series
// operator, pullback/divergence identities for rational changes of
// coordinates, and the right action of operators on top-degree forms.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "jetcal/forms.hpp"
#include "jetcal/lie_algebra.hpp"
#include "jetcal/matrix.hpp"

namespace jetcal {

// ---- the operator ring -------------------------------------------------------

inline RatFn derive_multi(RatFn h, const MultiIndex& lam) {
    for (int i = 0; i < lam.arity(); ++i)
        for (int rep = 0; rep < lam[i]; ++rep) h = h.derive(i);
    return h;
}

// Element a^mu d_mu of the ring of differential operators over a rational
// coordinate chart; every chart variable is a derivation direction.  The term
// map is the unique normal form, maintained through the rewriting
// d_i a = a d_i + (d_i a).
class DiffOp {
public:
    explicit DiffOp(Vars vars) : vars_(std::move(vars)), n_(static_cast<int>(vars_->size())) {}

    static DiffOp zero(const Vars& vars) { return DiffOp(vars); }
    static DiffOp constant(const Vars& vars, const RatFn& a) {
        DiffOp p(vars);
        p.add_term(MultiIndex::zeros(p.n_), a);
        return p;
    }
    static DiffOp derivation(const Vars& vars, int i) {
        DiffOp p(vars);
        p.add_term(MultiIndex::unit(static_cast<int>(vars->size()), i), RatFn::from_int(vars, 1));
        return p;
    }

    const Vars& vars() const { return vars_; }
    int n() const { return n_; }
    const std::map<MultiIndex, RatFn>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int max_order() const {
        int q = 0;
        for (const auto& [mu, a] : terms_) q = std::max(q, mu.order());
        return q;
    }

    void add_term(const MultiIndex& mu, const RatFn& a) {
        if (mu.arity() != n_) throw std::invalid_argument("derivation arity mismatch");
        if (a.is_zero()) return;
        auto it = terms_.find(mu);
        if (it == terms_.end()) {
            terms_.emplace(mu, a);
        } else {
            it->second += a;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    bool operator==(const DiffOp& o) const {
        return same_vars(vars_, o.vars_) && terms_ == o.terms_;
    }
    bool operator!=(const DiffOp& o) const { return !(*this == o); }

    DiffOp operator+(const DiffOp& o) const {
        DiffOp out = *this;
        for (const auto& [mu, a] : o.terms_) out.add_term(mu, a);
        return out;
    }
    DiffOp operator-(const DiffOp& o) const {
        DiffOp out = *this;
        for (const auto& [mu, a] : o.terms_) out.add_term(mu, -a);
        return out;
    }
    DiffOp operator*(const RatFn& s) const {
        DiffOp out(vars_);
        for (const auto& [mu, a] : terms_) out.add_term(mu, a * s);
        return out;
    }

private:
    Vars vars_;
    int n_;
    std::map<MultiIndex, RatFn> terms_;
};

// Normal-form product: for each pair of terms, d_mu a = sum over splittings
// lam + nu = mu of C(mu;lam,nu) (d_lam a) d_nu.
inline DiffOp op_mul(const DiffOp& P, const DiffOp& Q) {
    check_same_vars(P.vars(), Q.vars());
    DiffOp out(P.vars());
    for (const auto& [mp, ap] : P.terms())
        for (const auto& [mq, aq] : Q.terms())
            for (const auto& [lam, nu] : splittings(mp)) {
                RatFn c = ap * derive_multi(aq, lam) *
                          RatFn::constant(P.vars(), Rat(multinomial(mp, lam, nu)));
                out.add_term(nu + mq, c);
            }
    return out;
}

// Formal adjoint ad(P) = (-1)^{|mu|} d_mu a^mu, expanded to normal form.
inline DiffOp adjoint_op(const DiffOp& P) {
    DiffOp out(P.vars());
    for (const auto& [mu, a] : P.terms()) {
        Rat sign = mu.order() % 2 == 0 ? Rat(1) : Rat(-1);
        for (const auto& [lam, nu] : splittings(mu))
            out.add_term(nu, derive_multi(a, lam) *
                                 RatFn::constant(P.vars(), sign * Rat(multinomial(mu, lam, nu))));
    }
    return out;
}

// Operator acting on functions: P h = sum a^mu d_mu h.
inline RatFn op_apply(const DiffOp& P, const RatFn& h) {
    RatFn out = RatFn::zero(P.vars());
    for (const auto& [mu, a] : P.terms()) out += a * derive_multi(h, mu);
    return out;
}

inline DiffOp op_from_field(const VecField& xi) {
    if (xi.empty()) throw std::invalid_argument("empty field");
    const Vars& vars = xi[0].vars();
    DiffOp out(vars);
    for (std::size_t i = 0; i < xi.size(); ++i)
        out.add_term(MultiIndex::unit(static_cast<int>(vars->size()), static_cast<int>(i)), xi[i]);
    return out;
}

// ---- operator matrices -------------------------------------------------------

struct OperatorMatrix {
    int rows = 0, cols = 0;
    Vars vars;
    std::vector<std::vector<DiffOp>> entry;

    OperatorMatrix(int r, int c, const Vars& v)
        : rows(r), cols(c), vars(v), entry(r, std::vector<DiffOp>(c, DiffOp::zero(v))) {}

    DiffOp& at(int r, int c) { return entry[r][c]; }
    const DiffOp& at(int r, int c) const { return entry[r][c]; }

    bool is_zero() const {
        for (const auto& row : entry)
            for (const auto& p : row)
                if (!p.is_zero()) return false;
        return true;
    }
    bool operator==(const OperatorMatrix& o) const {
        return rows == o.rows && cols == o.cols && entry == o.entry;
    }
    bool operator!=(const OperatorMatrix& o) const { return !(*this == o); }

    int max_order() const {
        int q = 0;
        for (const auto& row : entry)
            for (const auto& p : row) q = std::max(q, p.max_order());
        return q;
    }
};

inline OperatorMatrix om_mul(const OperatorMatrix& A, const OperatorMatrix& B) {
    if (A.cols != B.rows) throw std::invalid_argument("operator matrix shape mismatch");
    OperatorMatrix out(A.rows, B.cols, A.vars);
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < B.cols; ++c)
            for (int k = 0; k < A.cols; ++k)
                out.at(r, c) = out.at(r, c) + op_mul(A.at(r, k), B.at(k, c));
    return out;
}

// Adjoint of a matrix operator: transpose with entrywise formal adjoint.
inline OperatorMatrix om_adjoint(const OperatorMatrix& A) {
    OperatorMatrix out(A.cols, A.rows, A.vars);
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) out.at(c, r) = adjoint_op(A.at(r, c));
    return out;
}

// ---- formal jet charts for bilinear identities --------------------------------

// A chart extended by formal jet variables for named argument families, with
// the total derivative that promotes each jet variable one level up.  Used to
// state bilinear pairing identities exactly.
struct JetFamily {
    std::string name;
    int arity = 0;
};

class JetChart {
public:
    JetChart(const Vars& base, std::vector<JetFamily> families, int cap)
        : base_(base), n_(static_cast<int>(base->size())), cap_(cap), families_(std::move(families)) {
        mus_ = multi_indices_up_to(n_, cap_);
        for (std::size_t p = 0; p < mus_.size(); ++p) mu_pos_[mus_[p]] = static_cast<int>(p);
        std::vector<std::string> names = base->names();
        for (const JetFamily& f : families_) {
            offsets_.push_back(static_cast<int>(names.size()));
            for (int k = 0; k < f.arity; ++k)
                for (const MultiIndex& mu : mus_)
                    names.push_back(f.name + std::to_string(k) + mu.str());
        }
        vars_ = make_vars(names);
    }

    const Vars& vars() const { return vars_; }
    int n() const { return n_; }
    int cap() const { return cap_; }

    int index(int family, int k, const MultiIndex& mu) const {
        auto it = mu_pos_.find(mu);
        if (it == mu_pos_.end()) throw std::out_of_range("jet order above chart capacity");
        return offsets_[family] + k * static_cast<int>(mus_.size()) + it->second;
    }
    RatFn jet(int family, int k, const MultiIndex& mu) const {
        return RatFn::variable(vars_, index(family, k, mu));
    }

    // Chart functions of the base extend to the jet chart unchanged.
    RatFn embed(const RatFn& h) const {
        std::vector<RatFn> images;
        for (int j = 0; j < n_; ++j) images.push_back(RatFn::variable(vars_, j));
        return h.subst(images);
    }

    // d_i as the total derivative: chart direction plus jet promotion.
    RatFn total_derive(const RatFn& h, int i) const {
        RatFn out = h.derive(i);
        for (int v : active_vars(h)) {
            if (v < static_cast<int>(base_->size())) continue;
            RatFn dv = h.derive(v);
            if (dv.is_zero()) continue;
            auto [family, k, mu] = decode(v);
            out += dv * jet(family, k, mu.inc(i));
        }
        return out;
    }

    // P applied to component k of a family, as a jet-chart expression.
    RatFn apply(const DiffOp& P, int family, int k) const {
        RatFn out = RatFn::zero(vars_);
        for (const auto& [mu, a] : P.terms()) out += embed(a) * jet(family, k, mu);
        return out;
    }

private:
    std::tuple<int, int, MultiIndex> decode(int v) const {
        for (int f = static_cast<int>(families_.size()) - 1; f >= 0; --f) {
            if (v < offsets_[f]) continue;
            int rel = v - offsets_[f];
            int per = static_cast<int>(mus_.size());
            return {f, rel / per, mus_[rel % per]};
        }
        throw std::logic_error("not a jet variable");
    }

    static void collect_active(const Poly& p, std::vector<bool>& seen) {
        for (const auto& [mu, c] : p.terms())
            for (int j = 0; j < mu.arity(); ++j)
                if (mu[j] > 0) seen[j] = true;
    }
    std::vector<int> active_vars(const RatFn& h) const {
        std::vector<bool> seen(vars_->size(), false);
        collect_active(h.num(), seen);
        collect_active(h.den(), seen);
        std::vector<int> out;
        for (std::size_t j = 0; j < seen.size(); ++j)
            if (seen[j]) out.push_back(static_cast<int>(j));
        return out;
    }

    Vars base_;
    int n_ = 0, cap_ = 0;
    std::vector<JetFamily> families_;
    std::vector<MultiIndex> mus_;
    std::map<MultiIndex, int> mu_pos_;
    std::vector<int> offsets_;
    Vars vars_;
};

// ---- adjoints with divergence witnesses ---------------------------------------

// Boundary data of the pairing identity
//   <lam, D xi> = <ad(D) lam, xi> + sum_i d_i W^i,
// over the jet chart of the two argument families (family 0: lam, indexed by
// rows; family 1: xi, indexed by columns).  The W^i are bilinear and are
// assembled during the integration by parts, one derivation at a time.
struct DivergenceWitness {
    JetChart chart;
    std::vector<RatFn> w;
};

struct AdjointResult {
    OperatorMatrix op;
    DivergenceWitness witness;
};

inline AdjointResult adjoint(const OperatorMatrix& D) {
    JetChart chart(D.vars, {{"lam", D.rows}, {"xi", D.cols}}, D.max_order() + 1);
    const int n = chart.n();
    std::vector<RatFn> w(n, RatFn::zero(chart.vars()));
    MultiIndex z = MultiIndex::zeros(n);

    for (int r = 0; r < D.rows; ++r)
        for (int c = 0; c < D.cols; ++c)
            for (const auto& [mu0, a] : D.at(r, c).terms()) {
                RatFn b = chart.jet(0, r, z) * chart.embed(a);
                MultiIndex mu = mu0;
                while (!mu.is_zero()) {
                    int i = 0;
                    while (mu[i] == 0) ++i;
                    mu = mu.dec(i);
                    w[i] += b * chart.jet(1, c, mu);
                    b = -chart.total_derive(b, i);
                }
            }
    return {om_adjoint(D), {std::move(chart), std::move(w)}};
}

// Residual of the pairing identity for the adjoint and witness produced by
// adjoint(); identically zero by construction of the witness and correctness
// of the adjoint, and recomputed here from its three independent pieces.
inline RatFn witness_check(const OperatorMatrix& D) {
    AdjointResult ar = adjoint(D);
    const JetChart& chart = ar.witness.chart;
    MultiIndex z = MultiIndex::zeros(chart.n());

    RatFn pairing = RatFn::zero(chart.vars());
    for (int r = 0; r < D.rows; ++r)
        for (int c = 0; c < D.cols; ++c)
            pairing += chart.jet(0, r, z) * chart.apply(D.at(r, c), 1, c);

    RatFn adj_pairing = RatFn::zero(chart.vars());
    for (int c = 0; c < ar.op.rows; ++c)
        for (int r = 0; r < ar.op.cols; ++r)
            adj_pairing += chart.jet(1, c, z) * chart.apply(ar.op.at(c, r), 0, r);

    RatFn div = RatFn::zero(chart.vars());
    for (int i = 0; i < chart.n(); ++i) div += chart.total_derive(ar.witness.w[i], i);

    return pairing - adj_pairing - div;
}

// ---- the one-dimensional dual series operator ---------------------------------

// The restricted series operator of the one-variable system "(q+1)-fold
// derivative vanishes", its raw adjoint, and the momenta form: the raw
// adjoint rows carry an overall minus that is absorbed into the named source
// terms, so the momenta operator is its negation.
struct DualSeries1D {
    OperatorMatrix series;
    OperatorMatrix raw_adjoint;
    OperatorMatrix momenta;
};

inline DualSeries1D dual_spencer_1d(int q, const Vars& vars) {
    if (q < 0) throw std::invalid_argument("negative order");
    if (vars->size() != 1) throw std::invalid_argument("one-dimensional chart required");
    OperatorMatrix D(q + 1, q + 1, vars);
    for (int r = 0; r <= q; ++r) {
        D.at(r, r) = DiffOp::derivation(vars, 0);
        if (r + 1 <= q) D.at(r, r + 1) = DiffOp::constant(vars, RatFn::from_int(vars, -1));
    }
    OperatorMatrix raw = om_adjoint(D);
    OperatorMatrix momenta(q + 1, q + 1, vars);
    for (int r = 0; r <= q; ++r)
        for (int c = 0; c <= q; ++c) momenta.at(r, c) = raw.at(r, c) * RatFn::from_int(vars, -1);
    return {std::move(D), std::move(raw), std::move(momenta)};
}

// ---- divergence identities for rational coordinate changes --------------------

// For mutually inverse rational maps f, g on the same chart: the n functions
//   sum_k d_{y^k} [ (1/det df)(g(y)) * (d_i f^k)(g(y)) ],   i = 1..n,
// which vanish identically.
inline std::vector<RatFn> lemma45_residual(const std::vector<RatFn>& f,
                                           const std::vector<RatFn>& g) {
    const int n = static_cast<int>(f.size());
    if (static_cast<int>(g.size()) != n || n == 0) throw std::invalid_argument("arity mismatch");
    const Vars& vars = f[0].vars();
    if (static_cast<int>(vars->size()) != n)
        throw std::invalid_argument("chart must match the map arity");
    for (int i = 0; i < n; ++i)
        if (f[i].subst(g) != RatFn::variable(vars, i) || g[i].subst(f) != RatFn::variable(vars, i))
            throw std::invalid_argument("maps are not mutually inverse");

    Matrix<RatFn> J = ratfn_matrix(n, n, vars);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) J.at(k, i) = f[k].derive(i);
    RatFn det = J.det();
    if (det.is_zero()) throw std::invalid_argument("degenerate differential");

    std::vector<RatFn> out;
    for (int i = 0; i < n; ++i) {
        RatFn acc = RatFn::zero(vars);
        for (int k = 0; k < n; ++k) {
            RatFn h = (J.at(k, i) / det).subst(g);
            acc += h.derive(k);
        }
        out.push_back(acc);
    }
    return out;
}

struct InvarianceResidual {
    std::vector<RatFn> residual;             // per target component l
    std::vector<RatFn> hessian_contraction;  // d_{ij} f^l F^{ij}, per l
};

// Residual, expressed entirely in source coordinates, of
//   d_{y^k} [ (1/det df) d_i f^k d_j f^l F^{ij} ]  =  (1/det df) d_j f^l d_i F^{ij}
// for an antisymmetric matrix F and a map f with invertible differential;
// d_{y^k} acts through the inverse differential.  Both outputs vanish
// identically.
inline InvarianceResidual em_invariance_residual(const std::vector<RatFn>& f,
                                                 const Matrix<RatFn>& F) {
    const int n = static_cast<int>(f.size());
    if (n == 0) throw std::invalid_argument("empty map");
    const Vars& vars = f[0].vars();
    if (static_cast<int>(vars->size()) != n)
        throw std::invalid_argument("chart must match the map arity");
    if (F.rows() != n || F.cols() != n) throw std::invalid_argument("matrix shape mismatch");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            if (F.at(i, j) != -F.at(j, i)) throw std::invalid_argument("matrix must be antisymmetric");

    Matrix<RatFn> J = ratfn_matrix(n, n, vars);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) J.at(k, i) = f[k].derive(i);
    RatFn det = J.det();
    if (det.is_zero()) throw std::invalid_argument("degenerate differential");
    Matrix<RatFn> Jinv = J.inverse();

    InvarianceResidual out;
    for (int l = 0; l < n; ++l) {
        std::vector<RatFn> bracket;  // per k: (1/det) d_i f^k d_j f^l F^{ij}
        for (int k = 0; k < n; ++k) {
            RatFn acc = RatFn::zero(vars);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) acc += J.at(k, i) * J.at(l, j) * F.at(i, j);
            bracket.push_back(acc / det);
        }
        RatFn lhs = RatFn::zero(vars);
        for (int k = 0; k < n; ++k)
            for (int s = 0; s < n; ++s) lhs += Jinv.at(s, k) * bracket[k].derive(s);

        RatFn rhs = RatFn::zero(vars);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) rhs += J.at(l, j) * F.at(i, j).derive(i);
        out.residual.push_back(lhs - rhs / det);

        RatFn hess = RatFn::zero(vars);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) hess += f[l].derive(i).derive(j) * F.at(i, j);
        out.hessian_contraction.push_back(hess);
    }
    return out;
}

// ---- right action on top-degree forms ------------------------------------------

namespace detail {

inline RatFn top_coefficient(const Form& alpha) {
    if (alpha.degree() != alpha.n())
        throw std::invalid_argument("right action needs a top-degree form");
    std::vector<int> I;
    for (int i = 0; i < alpha.n(); ++i) I.push_back(i);
    return alpha.get(0, I);
}

inline Form top_form(const Vars& vars, int n, const RatFn& a) {
    Form out(vars, n, n, ValueSpace::scalar());
    std::vector<int> I;
    for (int i = 0; i < n; ++i) I.push_back(i);
    out.add(0, I, a);
    return out;
}

}  // namespace detail

// (a dx^1...dx^n) . xi = -d_i(a xi^i) dx^1...dx^n
inline Form volume_right_action(const Form& alpha, const VecField& xi) {
    const int n = alpha.n();
    if (static_cast<int>(xi.size()) != n) throw std::invalid_argument("field arity mismatch");
    RatFn a = detail::top_coefficient(alpha);
    RatFn acc = RatFn::zero(alpha.vars());
    for (int i = 0; i < n; ++i) acc -= (a * xi[i]).derive(i);
    return detail::top_form(alpha.vars(), n, acc);
}

// Right action of a normal-form operator, one generator at a time:
// alpha . (a d_mu) peels each derivation as a vector-field action on the
// coefficient, after multiplying by a.
inline Form volume_right_action(const Form& alpha, const DiffOp& P) {
    const int n = alpha.n();
    if (P.n() != n) throw std::invalid_argument("operator arity mismatch");
    RatFn a = detail::top_coefficient(alpha);
    RatFn acc = RatFn::zero(alpha.vars());
    for (const auto& [mu, c] : P.terms()) {
        RatFn term = a * c;
        for (int i = 0; i < n; ++i)
            for (int rep = 0; rep < mu[i]; ++rep) term = -term.derive(i);
        acc += term;
    }
    return detail::top_form(alpha.vars(), n, acc);
}

}  // namespace jetcal
