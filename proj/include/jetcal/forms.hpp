#pragma once

#include "lie_algebra.hpp"
#include "multi_index.hpp"
#include "rational_function.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// What a differential form takes values in: plain functions, a Lie algebra
// coordinatized by a basis (dimension p), a full jet fiber (orders 0..q), or
// the homogeneous slice of order exactly q.
struct ValueSpace {
    enum class Kind { Scalar, Lie, Jet, Symbols };

    Kind kind = Kind::Scalar;
    int p = 0;
    int n = 0, m = 0, q = 0;

    static ValueSpace scalar() { return {}; }
    static ValueSpace lie(int p) {
        ValueSpace v;
        v.kind = Kind::Lie;
        v.p = p;
        return v;
    }
    static ValueSpace jet(int n, int m, int q) {
        ValueSpace v;
        v.kind = Kind::Jet;
        v.n = n;
        v.m = m;
        v.q = q;
        return v;
    }
    static ValueSpace symbols(int n, int m, int q) {
        ValueSpace v;
        v.kind = Kind::Symbols;
        v.n = n;
        v.m = m;
        v.q = q;
        return v;
    }

    bool operator==(const ValueSpace& o) const {
        return kind == o.kind && p == o.p && n == o.n && m == o.m && q == o.q;
    }
    bool operator!=(const ValueSpace& o) const { return !(*this == o); }

    bool is_scalar() const { return kind == Kind::Scalar; }

    std::vector<MultiIndex> index_layers() const {
        switch (kind) {
            case Kind::Jet: return multi_indices_up_to(n, q);
            case Kind::Symbols: return multi_indices_of_order(n, q);
            default: throw std::logic_error("value space has no jet layers");
        }
    }

    int dim() const {
        switch (kind) {
            case Kind::Scalar: return 1;
            case Kind::Lie: return p;
            case Kind::Jet:
            case Kind::Symbols: return m * static_cast<int>(index_layers().size());
        }
        throw std::logic_error("unreachable");
    }

    // Flat index layout for jet-like values: component k is the fast axis.
    int flat(int k, const MultiIndex& mu) const {
        auto layers = index_layers();
        for (int t = 0; t < static_cast<int>(layers.size()); ++t)
            if (layers[t] == mu) return t * m + k;
        throw std::out_of_range("multi-index outside value space");
    }
    std::pair<int, MultiIndex> unflat(int idx) const {
        auto layers = index_layers();
        if (idx < 0 || idx >= dim()) throw std::out_of_range("value index");
        return {idx % m, layers[idx / m]};
    }
};

// All strictly increasing r-tuples drawn from {0,..,n-1}, lexicographic.
inline std::vector<std::vector<int>> index_tuples(int n, int r) {
    std::vector<std::vector<int>> out;
    if (r < 0 || r > n) return out;
    std::vector<int> cur(r);
    // iterative combination enumeration
    for (int i = 0; i < r; ++i) cur[i] = i;
    if (r == 0) {
        out.push_back({});
        return out;
    }
    while (true) {
        out.push_back(cur);
        int t = r - 1;
        while (t >= 0 && cur[t] == n - r + t) --t;
        if (t < 0) break;
        ++cur[t];
        for (int s = t + 1; s < r; ++s) cur[s] = cur[s - 1] + 1;
    }
    return out;
}

// Exterior form with exact-coefficient components, optionally vector-valued.
// Components are stored on strictly increasing index tuples only.
class Form {
public:
    using Key = std::pair<int, std::vector<int>>;

    Form(Vars vars, int n, int degree, ValueSpace vs = ValueSpace::scalar())
        : vars_(std::move(vars)), n_(n), deg_(degree), vs_(vs), zero_(RatFn::zero(vars_)) {
        if (n <= 0 || degree < 0) throw std::invalid_argument("bad form signature");
    }

    const Vars& vars() const { return vars_; }
    int n() const { return n_; }
    int degree() const { return deg_; }
    const ValueSpace& values() const { return vs_; }
    const std::map<Key, RatFn>& components() const { return comp_; }

    const RatFn& get(int v, const std::vector<int>& I) const {
        auto it = comp_.find({v, I});
        return it == comp_.end() ? zero_ : it->second;
    }
    const RatFn& get(int k, const MultiIndex& mu, const std::vector<int>& I) const {
        return get(vs_.flat(k, mu), I);
    }

    // Adds val * dx^I; I may be unsorted and is normalized with the
    // permutation sign, duplicates annihilate the term.
    void add(int v, std::vector<int> I, const RatFn& val) {
        if (val.is_zero()) return;
        if (v < 0 || v >= vs_.dim()) throw std::out_of_range("value index");
        if (static_cast<int>(I.size()) != deg_) throw std::invalid_argument("tuple length != degree");
        int sign = 1;
        for (std::size_t a = 0; a < I.size(); ++a) {
            if (I[a] < 0 || I[a] >= n_) throw std::out_of_range("frame index");
            for (std::size_t b = a + 1; b < I.size(); ++b) {
                if (I[a] == I[b]) return;  // repeated covector
                if (I[a] > I[b]) sign = -sign;
            }
        }
        std::sort(I.begin(), I.end());
        accumulate({v, std::move(I)}, sign > 0 ? val : -val);
    }
    void add(int k, const MultiIndex& mu, std::vector<int> I, const RatFn& val) {
        add(vs_.flat(k, mu), std::move(I), val);
    }
    void set(int v, std::vector<int> I, const RatFn& val) {
        // normalize first, then overwrite
        Form tmp(vars_, n_, deg_, vs_);
        tmp.add(v, I, RatFn::from_int(vars_, 1));
        for (const auto& [key, sgn] : tmp.comp_) {
            comp_.erase(key);
            if (!val.is_zero()) comp_[key] = sgn * val;
        }
    }

    bool is_zero() const { return comp_.empty(); }

    bool operator==(const Form& o) const {
        return n_ == o.n_ && deg_ == o.deg_ && vs_ == o.vs_ && comp_ == o.comp_;
    }
    bool operator!=(const Form& o) const { return !(*this == o); }

    Form operator+(const Form& o) const {
        check_shape(o);
        Form out = *this;
        for (const auto& [key, val] : o.comp_) out.accumulate(key, val);
        return out;
    }
    Form operator-(const Form& o) const { return *this + (o * RatFn::from_int(vars_, -1)); }
    Form operator*(const RatFn& s) const {
        Form out(vars_, n_, deg_, vs_);
        if (s.is_zero()) return out;
        for (const auto& [key, val] : comp_) out.comp_[key] = val * s;
        return out;
    }

    // Componentwise exterior derivative in the base coordinates (the first n
    // chart variables).
    Form ext_d() const {
        Form out(vars_, n_, deg_ + 1, vs_);
        for (const auto& [key, val] : comp_)
            for (int i = 0; i < n_; ++i) {
                std::vector<int> J = key.second;
                J.insert(J.begin(), i);
                out.add(key.first, std::move(J), val.derive(i));
            }
        return out;
    }

    // Interior product with a vector field (components over the chart vars).
    Form contract(const VecField& v) const {
        if (deg_ == 0) throw std::invalid_argument("cannot contract a 0-form");
        if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("vector field arity");
        Form out(vars_, n_, deg_ - 1, vs_);
        for (const auto& [key, val] : comp_)
            for (std::size_t t = 0; t < key.second.size(); ++t) {
                std::vector<int> J = key.second;
                J.erase(J.begin() + static_cast<std::ptrdiff_t>(t));
                RatFn term = v[key.second[t]] * val;
                if (t % 2 == 1) term = -term;
                out.accumulate({key.first, std::move(J)}, term);
            }
        return out;
    }

    std::string str() const {
        if (comp_.empty()) return "0";
        std::string s;
        for (const auto& [key, val] : comp_) {
            if (!s.empty()) s += "; ";
            s += "[v" + std::to_string(key.first);
            for (int i : key.second) s += " dx" + std::to_string(i + 1);
            s += "] (" + val.str() + ")";
        }
        return s;
    }

private:
    void check_shape(const Form& o) const {
        if (n_ != o.n_ || deg_ != o.deg_ || !(vs_ == o.vs_) || !same_vars(vars_, o.vars_))
            throw std::invalid_argument("form shape mismatch");
    }

    void accumulate(Key key, const RatFn& val) {
        if (val.is_zero()) return;
        auto it = comp_.find(key);
        if (it == comp_.end()) {
            comp_.emplace(std::move(key), val);
        } else {
            it->second += val;
            if (it->second.is_zero()) comp_.erase(it);
        }
    }

    Vars vars_;
    int n_, deg_;
    ValueSpace vs_;
    std::map<Key, RatFn> comp_;
    RatFn zero_;
};

inline Form operator*(const RatFn& s, const Form& f) { return f * s; }

// Wedge product; at most one factor may be vector-valued.
inline Form wedge(const Form& a, const Form& b) {
    if (!a.values().is_scalar() && !b.values().is_scalar())
        throw std::invalid_argument("wedge of two valued forms is not defined");
    const ValueSpace vs = a.values().is_scalar() ? b.values() : a.values();
    Form out(a.vars(), a.n(), a.degree() + b.degree(), vs);
    for (const auto& [ka, va] : a.components())
        for (const auto& [kb, vb] : b.components()) {
            int v = a.values().is_scalar() ? kb.first : ka.first;
            std::vector<int> I = ka.second;
            I.insert(I.end(), kb.second.begin(), kb.second.end());
            out.add(v, std::move(I), va * vb);
        }
    return out;
}

// Bracket of two Lie-algebra valued 1-forms, normalized so that
// [A,A]^t_{ij} = c^t_{rs} A^r_i A^s_j on increasing pairs i < j.
inline Form valued_bracket(const Form& a, const Form& b, const StructureConstants& c) {
    if (a.values().kind != ValueSpace::Kind::Lie || b.values().kind != ValueSpace::Kind::Lie ||
        a.values().p != c.dim() || b.values().p != c.dim())
        throw std::invalid_argument("bracket needs Lie-valued forms matching the constants");
    if (a.degree() != 1 || b.degree() != 1)
        throw std::invalid_argument("bracket implemented for 1-forms");
    const RatFn half = RatFn::constant(a.vars(), make_rat(1, 2));
    Form out(a.vars(), a.n(), 2, a.values());
    for (const auto& [ka, va] : a.components())
        for (const auto& [kb, vb] : b.components()) {
            if (ka.second[0] == kb.second[0]) continue;
            for (int tau = 0; tau < c.dim(); ++tau) {
                const Rat& ct = c.at(tau, ka.first, kb.first);
                if (ct.is_zero()) continue;
                out.add(tau, {ka.second[0], kb.second[0]},
                        half * RatFn::constant(a.vars(), ct) * va * vb);
            }
        }
    return out;
}

// Curvature F = dA - [A,A] of a Lie-valued potential 1-form.
inline Form curvature(const Form& a, const StructureConstants& c) {
    return a.ext_d() - valued_bracket(a, a, c);
}

// Maurer-Cartan residual dw + [w,w]; identically zero exactly when w
// satisfies the structure equations of c.
inline Form maurer_cartan_residual(const Form& w, const StructureConstants& c) {
    return w.ext_d() + valued_bracket(w, w, c);
}

// Formal-series differential: sends the order-(q+1) homogeneous slice to the
// order-q slice, raising form degree by one.
inline Form spencer_delta(const Form& w) {
    const ValueSpace& vs = w.values();
    if (vs.kind != ValueSpace::Kind::Symbols || vs.q < 1)
        throw std::invalid_argument("spencer delta needs order >= 1 homogeneous values");
    Form out(w.vars(), w.n(), w.degree() + 1, ValueSpace::symbols(vs.n, vs.m, vs.q - 1));
    for (const auto& [key, val] : w.components()) {
        auto [k, nu] = vs.unflat(key.first);
        for (int i = 0; i < vs.n; ++i) {
            if (nu[i] == 0) continue;
            std::vector<int> J = key.second;
            J.insert(J.begin(), i);
            out.add(k, nu.dec(i), std::move(J), val);
        }
    }
    return out;
}

// Coordinates of a constant-coefficient form in the product basis
// (value index) x (increasing index tuples of its degree, lexicographic).
inline std::vector<Rat> constant_coordinates(const Form& w) {
    auto tuples = index_tuples(w.n(), w.degree());
    std::map<std::vector<int>, int> pos;
    for (int t = 0; t < static_cast<int>(tuples.size()); ++t) pos[tuples[t]] = t;
    std::vector<Rat> out(static_cast<std::size_t>(w.values().dim()) * tuples.size(), Rat(0));
    for (const auto& [key, val] : w.components()) {
        if (!val.num().is_constant() || !val.den().is_constant())
            throw std::invalid_argument("form has non-constant components");
        out[static_cast<std::size_t>(key.first) * tuples.size() + pos.at(key.second)] =
            val.num().constant_value() / val.den().constant_value();
    }
    return out;
}

// Matrix of the formal-series differential from degree-r forms valued in the
// order-q homogeneous slice to degree-(r+1) forms valued one order lower, in
// the product bases used by constant_coordinates (value index major).
inline Matrix<Rat> spencer_delta_matrix(int n, int m, int q, int r, const Vars& vars) {
    ValueSpace vs = ValueSpace::symbols(n, m, q);
    auto tuples = index_tuples(n, r);
    auto out_tuples = index_tuples(n, r + 1);
    const int cols = vs.dim() * static_cast<int>(tuples.size());
    const int rows = ValueSpace::symbols(n, m, q - 1).dim() * static_cast<int>(out_tuples.size());
    Matrix<Rat> M = rat_matrix(rows, cols);
    int col = 0;
    for (int v = 0; v < vs.dim(); ++v)
        for (const auto& t : tuples) {
            Form e(vars, n, r, vs);
            e.add(v, t, RatFn::from_int(vars, 1));
            auto coords = constant_coordinates(spencer_delta(e));
            for (int row = 0; row < rows; ++row) M.at(row, col) = coords[row];
            ++col;
        }
    return M;
}

}  // namespace jetcal
