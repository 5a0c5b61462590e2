#pragma once

#include "forms.hpp"
#include "matrix.hpp"
#include "multi_index.hpp"
#include "rational_function.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// Fiber dimension of the order-q jet space of m-component fields over an
// n-dimensional base.
inline int jet_fiber_dim(int n, int m, int q) {
    return m * static_cast<int>(binomial(n + q, q));
}
// Dimension of the order-exactly-q homogeneous slice.
inline int symbol_fiber_dim(int n, int m, int q) {
    return m * static_cast<int>(binomial(n + q - 1, q));
}

// A section of the order-q jet bundle of m-component fields over an
// n-dimensional base, in a single chart whose first n variables are the base
// coordinates.  Components xi^k_mu are exact rational functions; absent
// components are zero.
class JetSection {
public:
    JetSection(int n, int m, int q, Vars vars)
        : n_(n), m_(m), q_(q), vars_(std::move(vars)), zero_(RatFn::zero(vars_)) {
        if (n <= 0 || m <= 0 || q < 0) throw std::invalid_argument("bad jet signature");
        if (static_cast<int>(vars_->size()) < n)
            throw std::invalid_argument("chart needs at least n variables");
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int order() const { return q_; }
    const Vars& vars() const { return vars_; }
    const std::map<std::pair<int, MultiIndex>, RatFn>& components() const { return comp_; }

    const RatFn& at(int k, const MultiIndex& mu) const {
        check_key(k, mu);
        auto it = comp_.find({k, mu});
        return it == comp_.end() ? zero_ : it->second;
    }
    void set(int k, const MultiIndex& mu, const RatFn& v) {
        check_key(k, mu);
        if (v.is_zero())
            comp_.erase({k, mu});
        else
            comp_[{k, mu}] = v;
    }

    JetSection project(int q2) const {
        if (q2 < 0 || q2 > q_) throw std::invalid_argument("projection order out of range");
        JetSection out(n_, m_, q2, vars_);
        for (const auto& [key, val] : comp_)
            if (key.second.order() <= q2) out.comp_.emplace(key, val);
        return out;
    }

    // Raises the order, filling the new top layers with zeros.
    JetSection lift_zero(int q2) const {
        if (q2 < q_) throw std::invalid_argument("lift must not lower the order");
        JetSection out(n_, m_, q2, vars_);
        out.comp_ = comp_;
        return out;
    }

    JetSection operator+(const JetSection& o) const {
        check_shape(o);
        JetSection out = *this;
        for (const auto& [key, val] : o.comp_) {
            auto it = out.comp_.find(key);
            if (it == out.comp_.end()) {
                out.comp_.emplace(key, val);
            } else {
                it->second += val;
                if (it->second.is_zero()) out.comp_.erase(it);
            }
        }
        return out;
    }
    JetSection operator-(const JetSection& o) const { return *this + (o * Rat(-1)); }
    JetSection operator*(const Rat& s) const {
        JetSection out(n_, m_, q_, vars_);
        if (s.is_zero()) return out;
        RatFn sf = RatFn::constant(vars_, s);
        for (const auto& [key, val] : comp_) out.comp_[key] = val * sf;
        return out;
    }

    bool is_zero() const { return comp_.empty(); }
    bool operator==(const JetSection& o) const {
        return n_ == o.n_ && m_ == o.m_ && q_ == o.q_ && comp_ == o.comp_;
    }
    bool operator!=(const JetSection& o) const { return !(*this == o); }

    // Order-0 part as a vector field / map (requires nothing about m vs n).
    std::vector<RatFn> base_part() const {
        std::vector<RatFn> out;
        MultiIndex z = MultiIndex::zeros(n_);
        for (int k = 0; k < m_; ++k) out.push_back(at(k, z));
        return out;
    }

    // Substitutes the chart variables in every component (reparameterization).
    JetSection subst_vars(const std::vector<RatFn>& images) const {
        JetSection out(n_, m_, q_, vars_);
        for (const auto& [key, val] : comp_) out.set(key.first, key.second, val.subst(images));
        return out;
    }

    std::string str() const {
        if (comp_.empty()) return "0";
        std::string s;
        for (const auto& [key, val] : comp_) {
            if (!s.empty()) s += "; ";
            s += "(" + std::to_string(key.first) + "," + key.second.str() + ") = " + val.str();
        }
        return s;
    }

private:
    void check_key(int k, const MultiIndex& mu) const {
        if (k < 0 || k >= m_) throw std::out_of_range("jet component index");
        if (mu.arity() != n_) throw std::invalid_argument("multi-index arity");
        if (mu.order() > q_) throw std::out_of_range("multi-index order exceeds jet order");
    }
    void check_shape(const JetSection& o) const {
        if (n_ != o.n_ || m_ != o.m_ || q_ != o.q_ || !same_vars(vars_, o.vars_))
            throw std::invalid_argument("jet section shape mismatch");
    }

    int n_, m_, q_;
    Vars vars_;
    std::map<std::pair<int, MultiIndex>, RatFn> comp_;
    RatFn zero_;

    friend class JetMapSection;
};

// The order-q jet of a chart self-map (n components over an n-dimensional
// base) with invertible first-order part.  The invariant det(f^k_i) != 0 is
// checked by validate(), which every consumer calls on entry.
class JetMapSection {
public:
    JetMapSection(int n, int q, Vars vars) : data_(n, n, q, std::move(vars)) {}

    static JetMapSection identity(int n, int q, const Vars& vars) {
        JetMapSection f(n, q, vars);
        for (int k = 0; k < n; ++k) {
            f.set(k, MultiIndex::zeros(n), RatFn::variable(vars, k));
            if (q >= 1) f.set(k, MultiIndex::unit(n, k), RatFn::from_int(vars, 1));
        }
        return f;
    }

    int n() const { return data_.n(); }
    int order() const { return data_.order(); }
    const Vars& vars() const { return data_.vars(); }
    const JetSection& section() const { return data_; }

    const RatFn& at(int k, const MultiIndex& mu) const { return data_.at(k, mu); }
    void set(int k, const MultiIndex& mu, const RatFn& v) { data_.set(k, mu, v); }

    Matrix<RatFn> jacobian() const {
        if (order() < 1) throw std::logic_error("jacobian needs order >= 1");
        Matrix<RatFn> J = ratfn_matrix(n(), n(), vars());
        for (int k = 0; k < n(); ++k)
            for (int i = 0; i < n(); ++i) J.at(k, i) = at(k, MultiIndex::unit(n(), i));
        return J;
    }

    void validate() const {
        if (order() < 1) throw std::invalid_argument("map jet needs order >= 1");
        if (jacobian().det().is_zero())
            throw std::invalid_argument("map jet has singular first-order part");
    }

    JetMapSection project(int q2) const {
        JetMapSection out(n(), q2, vars());
        out.data_ = data_.project(q2);
        return out;
    }

    std::vector<RatFn> base_part() const { return data_.base_part(); }

    bool operator==(const JetMapSection& o) const { return data_ == o.data_; }
    bool operator!=(const JetMapSection& o) const { return !(*this == o); }

    std::string str() const { return data_.str(); }

private:
    JetSection data_;
};

// Holonomic jets of explicit fields: component k of order mu is the mu-th
// partial derivative.
inline JetSection jet_prolong_section(const std::vector<RatFn>& f, int n, int q) {
    if (f.empty()) throw std::invalid_argument("no components");
    JetSection out(n, static_cast<int>(f.size()), q, f[0].vars());
    for (int k = 0; k < static_cast<int>(f.size()); ++k)
        for (const MultiIndex& mu : multi_indices_up_to(n, q)) {
            RatFn d = f[k];
            for (int i = 0; i < n; ++i)
                for (int rep = 0; rep < mu[i]; ++rep) d = d.derive(i);
            out.set(k, mu, d);
        }
    return out;
}

inline JetMapSection jet_prolong_map(const std::vector<RatFn>& f, int q) {
    const int n = static_cast<int>(f.size());
    JetMapSection out(n, q, f[0].vars());
    JetSection s = jet_prolong_section(f, n, q);
    for (const auto& [key, val] : s.components()) out.set(key.first, key.second, val);
    out.validate();
    return out;
}

// First Spencer operator: sends an order-(q+1) section to a 1-form valued in
// order-q jets, component (k,mu,i) = d_i(xi^k_mu) - xi^k_{mu+1_i}.
inline Form spencer_D(const JetSection& xi) {
    if (xi.order() < 1) throw std::invalid_argument("operator needs order >= 1 input");
    const int q = xi.order() - 1;
    Form out(xi.vars(), xi.n(), 1, ValueSpace::jet(xi.n(), xi.m(), q));
    for (const MultiIndex& mu : multi_indices_up_to(xi.n(), q))
        for (int k = 0; k < xi.m(); ++k)
            for (int i = 0; i < xi.n(); ++i)
                out.add(k, mu, {i}, xi.at(k, mu).derive(i) - xi.at(k, mu.inc(i)));
    return out;
}

// Pointwise bracket on jet fibers: takes two order-(q+1) sections of vector
// field jets, returns the order-q section
//   {xi,eta}^k_mu = sum_{lam+nu=mu} C(mu;lam,nu)
//                   (xi^r_lam eta^k_{nu+1_r} - eta^r_lam xi^k_{nu+1_r}).
inline JetSection algebraic_bracket(const JetSection& xi, const JetSection& eta) {
    if (xi.m() != xi.n() || eta.m() != eta.n())
        throw std::invalid_argument("bracket needs vector-field jets (m == n)");
    if (xi.order() != eta.order() || xi.order() < 1)
        throw std::invalid_argument("bracket needs equal orders >= 1");
    const int n = xi.n(), q = xi.order() - 1;
    JetSection out(n, n, q, xi.vars());
    for (const MultiIndex& mu : multi_indices_up_to(n, q))
        for (int k = 0; k < n; ++k) {
            RatFn acc = RatFn::zero(xi.vars());
            for (const auto& [lam, nu] : splittings(mu)) {
                RatFn cf = RatFn::constant(xi.vars(), Rat(multinomial(mu, lam, nu)));
                for (int r = 0; r < n; ++r)
                    acc += cf * (xi.at(r, lam) * eta.at(k, nu.inc(r)) -
                                 eta.at(r, lam) * xi.at(k, nu.inc(r)));
            }
            out.set(k, mu, acc);
        }
    return out;
}

// Bracket of order-q sections through arbitrary order-(q+1) lifts; the result
// does not depend on the choice of lift.  Default lifts fill the top layer
// with zeros.
inline JetSection differential_bracket(const JetSection& xi, const JetSection& eta,
                                       const std::optional<JetSection>& xi_lift = std::nullopt,
                                       const std::optional<JetSection>& eta_lift = std::nullopt) {
    if (xi.m() != xi.n() || eta.m() != eta.n())
        throw std::invalid_argument("bracket needs vector-field jets (m == n)");
    if (xi.order() != eta.order()) throw std::invalid_argument("bracket needs equal orders");
    const int n = xi.n(), q = xi.order();
    JetSection lx = xi_lift ? *xi_lift : xi.lift_zero(q + 1);
    JetSection le = eta_lift ? *eta_lift : eta.lift_zero(q + 1);
    if (lx.order() != q + 1 || le.order() != q + 1 || lx.project(q) != xi || le.project(q) != eta)
        throw std::invalid_argument("lift does not project onto the bracketed section");

    JetSection out = algebraic_bracket(lx, le);
    std::vector<RatFn> x0 = xi.base_part(), e0 = eta.base_part();
    for (const MultiIndex& mu : multi_indices_up_to(n, q))
        for (int k = 0; k < n; ++k) {
            RatFn acc = out.at(k, mu);
            for (int i = 0; i < n; ++i) {
                acc += x0[i] * (le.at(k, mu).derive(i) - le.at(k, mu.inc(i)));
                acc -= e0[i] * (lx.at(k, mu).derive(i) - lx.at(k, mu.inc(i)));
            }
            out.set(k, mu, acc);
        }
    return out;
}

namespace detail {

// Truncated power series in n displacement symbols with exact-rational-
// function coefficients; terms above the cap are dropped on multiplication.
struct TaylorPoly {
    int n = 0;
    int cap = 0;
    Vars vars;
    std::map<MultiIndex, RatFn> t;

    TaylorPoly(int n_, int cap_, Vars vars_) : n(n_), cap(cap_), vars(std::move(vars_)) {}

    void add_term(const MultiIndex& e, const RatFn& c) {
        if (e.order() > cap || c.is_zero()) return;
        auto it = t.find(e);
        if (it == t.end()) {
            t.emplace(e, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) t.erase(it);
        }
    }

    TaylorPoly operator+(const TaylorPoly& o) const {
        TaylorPoly out = *this;
        for (const auto& [e, c] : o.t) out.add_term(e, c);
        return out;
    }
    TaylorPoly operator-(const TaylorPoly& o) const {
        TaylorPoly out = *this;
        for (const auto& [e, c] : o.t) out.add_term(e, -c);
        return out;
    }
    TaylorPoly operator*(const TaylorPoly& o) const {
        TaylorPoly out(n, cap, vars);
        for (const auto& [e1, c1] : t) {
            if (e1.order() > cap) continue;
            for (const auto& [e2, c2] : o.t) {
                if (e1.order() + e2.order() > cap) continue;
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        return out;
    }
    TaylorPoly scaled(const RatFn& s) const {
        TaylorPoly out(n, cap, vars);
        for (const auto& [e, c] : t) out.add_term(e, c * s);
        return out;
    }

    const RatFn& coeff(const MultiIndex& e, const RatFn& zero) const {
        auto it = t.find(e);
        return it == t.end() ? zero : it->second;
    }
};

// Displacement series of a jet tuple: W_k(u) = sum_{1<=|nu|<=q} comp(k,nu)/nu! u^nu.
inline std::vector<TaylorPoly> displacement_series(const JetSection& f, int q) {
    std::vector<TaylorPoly> W;
    for (int k = 0; k < f.m(); ++k) {
        TaylorPoly w(f.n(), q, f.vars());
        for (const MultiIndex& nu : multi_indices_up_to(f.n(), q)) {
            if (nu.order() == 0) continue;
            w.add_term(nu, f.at(k, nu) / RatFn::constant(f.vars(), Rat(nu.fact())));
        }
        W.push_back(std::move(w));
    }
    return W;
}

// Formal composition of jet coefficient data: given outer coefficients
// outer(k,lam) (already expressed at the composition point) and an inner jet
// tuple, returns the jets of the composite,
//   h^k_mu = mu! * [u^mu] sum_lam outer(k,lam)/lam! * prod_j W_j(u)^lam_j.
inline std::map<std::pair<int, MultiIndex>, RatFn> compose_coefficients(
    int m_out, const std::function<RatFn(int, const MultiIndex&)>& outer, const JetSection& inner,
    int q) {
    const int n = inner.n(), mid = inner.m();
    const Vars& vars = inner.vars();
    const RatFn zero = RatFn::zero(vars);
    auto W = displacement_series(inner, q);

    // memoized powers W_j^e for e <= q
    std::vector<std::vector<TaylorPoly>> pw(mid);
    for (int j = 0; j < mid; ++j) {
        TaylorPoly one(n, q, vars);
        one.add_term(MultiIndex::zeros(n), RatFn::from_int(vars, 1));
        pw[j].push_back(one);
        for (int e = 1; e <= q; ++e) pw[j].push_back(pw[j][e - 1] * W[j]);
    }

    std::map<std::pair<int, MultiIndex>, RatFn> out;
    for (int k = 0; k < m_out; ++k) {
        TaylorPoly H(n, q, vars);
        for (const MultiIndex& lam : multi_indices_up_to(mid, q)) {
            RatFn c = outer(k, lam);
            if (c.is_zero()) continue;
            TaylorPoly term(n, q, vars);
            term.add_term(MultiIndex::zeros(n), c / RatFn::constant(vars, Rat(lam.fact())));
            for (int j = 0; j < mid; ++j)
                if (lam[j] > 0) term = term * pw[j][lam[j]];
            H = H + term;
        }
        for (const MultiIndex& mu : multi_indices_up_to(n, q)) {
            RatFn h = H.coeff(mu, zero) * RatFn::constant(vars, Rat(mu.fact()));
            if (!h.is_zero()) out[{k, mu}] = h;
        }
    }
    return out;
}

}  // namespace detail

// Jet of the composite map g . f from the jets of g and f (equal orders).
// Coefficients of the outer factor are evaluated along the base map of the
// inner one.
inline JetMapSection jet_compose(const JetMapSection& g, const JetMapSection& f) {
    if (g.n() != f.n() || g.order() != f.order() || !same_vars(g.vars(), f.vars()))
        throw std::invalid_argument("composition needs matching jet signatures");
    f.validate();
    g.validate();
    const int n = f.n(), q = f.order();
    const Vars& vars = f.vars();

    std::vector<RatFn> images;
    std::vector<RatFn> fb = f.base_part();
    for (std::size_t j = 0; j < vars->size(); ++j)
        images.push_back(j < static_cast<std::size_t>(n) ? fb[j] : RatFn::variable(vars, static_cast<int>(j)));

    auto outer = [&](int k, const MultiIndex& lam) { return g.at(k, lam).subst(images); };
    auto comp = detail::compose_coefficients(n, outer, f.section(), q);

    JetMapSection h(n, q, vars);
    for (const auto& [key, val] : comp) h.set(key.first, key.second, val);
    h.validate();
    return h;
}

// Jets of the inverse map along the graph of f: component (k,mu) is the
// order-mu derivative of the inverse, expressed as a function of the source
// point (i.e. evaluated at the image f(x)).  Pure algebra on the jet of f;
// exists whenever the first-order part is invertible.
inline JetMapSection jet_invert_along(const JetMapSection& f) {
    f.validate();
    const int n = f.n(), q = f.order();
    const Vars& vars = f.vars();
    const RatFn zero = RatFn::zero(vars);
    Matrix<RatFn> Ainv = f.jacobian().inverse();

    // W(v) with F_hat(W(v)) = v, built order by order.
    auto lin = [&](const std::vector<detail::TaylorPoly>& rhs) {
        std::vector<detail::TaylorPoly> out;
        for (int k = 0; k < n; ++k) {
            detail::TaylorPoly acc(n, q, vars);
            for (int j = 0; j < n; ++j) acc = acc + rhs[j].scaled(Ainv.at(k, j));
            out.push_back(std::move(acc));
        }
        return out;
    };

    std::vector<detail::TaylorPoly> v;
    for (int k = 0; k < n; ++k) {
        detail::TaylorPoly p(n, q, vars);
        p.add_term(MultiIndex::unit(n, k), RatFn::from_int(vars, 1));
        v.push_back(std::move(p));
    }

    std::vector<detail::TaylorPoly> W = lin(v);
    for (int pass = 2; pass <= q; ++pass) {
        // F_tail(W): the order >= 2 part of the displacement series of f at W
        std::vector<detail::TaylorPoly> FW;
        for (int k = 0; k < n; ++k) FW.push_back(detail::TaylorPoly(n, q, vars));
        for (const MultiIndex& nu : multi_indices_up_to(n, q)) {
            if (nu.order() < 2) continue;
            for (int k = 0; k < n; ++k) {
                const RatFn& c = f.at(k, nu);
                if (c.is_zero()) continue;
                detail::TaylorPoly term(n, q, vars);
                term.add_term(MultiIndex::zeros(n), c / RatFn::constant(vars, Rat(nu.fact())));
                for (int j = 0; j < n; ++j)
                    for (int rep = 0; rep < nu[j]; ++rep) term = term * W[j];
                FW[k] = FW[k] + term;
            }
        }
        std::vector<detail::TaylorPoly> rhs;
        for (int k = 0; k < n; ++k) rhs.push_back(v[k] - FW[k]);
        W = lin(rhs);
    }

    JetMapSection g(n, q, vars);
    for (int k = 0; k < n; ++k) {
        g.set(k, MultiIndex::zeros(n), RatFn::variable(vars, k));
        for (const MultiIndex& mu : multi_indices_up_to(n, q)) {
            if (mu.order() == 0) continue;
            RatFn c = W[k].coeff(mu, zero) * RatFn::constant(vars, Rat(mu.fact()));
            g.set(k, mu, c);
        }
    }
    return g;
}

// Honest inverse jet in the chart coordinates: requires the closed-form
// inverse of the base map, verifies g(f) = id and f(g) = id to order q.
inline JetMapSection jet_invert(const JetMapSection& f, const std::vector<RatFn>& base_inverse) {
    const int n = f.n(), q = f.order();
    const Vars& vars = f.vars();
    if (static_cast<int>(base_inverse.size()) != n)
        throw std::invalid_argument("base inverse arity mismatch");

    std::vector<RatFn> images;
    for (std::size_t j = 0; j < vars->size(); ++j)
        images.push_back(j < static_cast<std::size_t>(n) ? base_inverse[j]
                                                         : RatFn::variable(vars, static_cast<int>(j)));

    JetMapSection along = jet_invert_along(f);
    JetMapSection g(n, q, vars);
    for (const auto& [key, val] : along.section().components())
        g.set(key.first, key.second, val.subst(images));

    if (jet_compose(f, g) != JetMapSection::identity(n, q, vars) ||
        jet_compose(g, f) != JetMapSection::identity(n, q, vars))
        throw std::invalid_argument("supplied base inverse does not invert the map");
    return g;
}

// Transport of an order-q vector-field jet section by an order-(q+1) map jet:
// the transported section, expressed in the chart via the closed-form base
// inverse.  Transport coefficients lam^k_mu = sum_{l+v=mu} C(mu;l,v)
// f^k_{l+1_r} xi^r_v are composed with the inverse jets of f.
inline JetSection jet_act(const JetMapSection& f, const JetSection& xi,
                          const std::vector<RatFn>& base_inverse) {
    if (xi.m() != xi.n()) throw std::invalid_argument("action needs vector-field jets");
    if (f.n() != xi.n() || f.order() != xi.order() + 1)
        throw std::invalid_argument("action needs a map jet one order above the section");
    f.validate();
    const int n = xi.n(), q = xi.order();
    const Vars& vars = xi.vars();

    // transport coefficients at the source point
    JetSection lam(n, n, q, vars);
    for (const MultiIndex& mu : multi_indices_up_to(n, q))
        for (int k = 0; k < n; ++k) {
            RatFn acc = RatFn::zero(vars);
            for (const auto& [l, v] : splittings(mu)) {
                RatFn cf = RatFn::constant(vars, Rat(multinomial(mu, l, v)));
                for (int r = 0; r < n; ++r) acc += cf * f.at(k, l.inc(r)) * xi.at(r, v);
            }
            lam.set(k, mu, acc);
        }

    // compose with the inverse jets along the graph (both live at the source
    // point, so no coefficient substitution is needed), then reparameterize.
    JetMapSection ginv = jet_invert_along(f.project(q >= 1 ? q : 1)).project(q >= 1 ? q : 1);
    std::map<std::pair<int, MultiIndex>, RatFn> comp;
    if (q == 0) {
        comp = lam.components();
    } else {
        auto outer = [&](int k, const MultiIndex& l) { return lam.at(k, l); };
        comp = detail::compose_coefficients(n, outer, ginv.section(), q);
    }

    std::vector<RatFn> images;
    for (std::size_t j = 0; j < vars->size(); ++j)
        images.push_back(j < static_cast<std::size_t>(n) ? base_inverse[j]
                                                         : RatFn::variable(vars, static_cast<int>(j)));
    // check the base inverse before trusting the reparameterization
    std::vector<RatFn> fb = f.base_part();
    for (int k = 0; k < n; ++k)
        if (fb[k].subst(images) != RatFn::variable(vars, k))
            throw std::invalid_argument("supplied base inverse does not invert the map");

    JetSection out(n, n, q, vars);
    for (const auto& [key, val] : comp) out.set(key.first, key.second, val.subst(images));
    return out;
}

}  // namespace jetcal
