#pragma once

#include "multi_index.hpp"
#include "rational.hpp"
#include "varset.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// Sparse multivariate polynomial with exact rational coefficients.
// Terms are kept in a graded-lex ordered map and never hold zero values,
// so equal polynomials have identical representations.
class Poly {
public:
    using Terms = std::map<MultiIndex, Rat>;

    Poly() = default;
    explicit Poly(Vars vars) : vars_(std::move(vars)) {}

    static Poly zero(Vars vars) { return Poly(std::move(vars)); }

    static Poly constant(Vars vars, const Rat& c) {
        Poly p(std::move(vars));
        if (!c.is_zero()) p.t_[MultiIndex::zeros(static_cast<int>(p.vars_->size()))] = c;
        return p;
    }

    static Poly variable(Vars vars, int idx) {
        Poly p(vars);
        if (idx < 0 || idx >= static_cast<int>(vars->size()))
            throw std::out_of_range("variable index");
        p.t_[MultiIndex::zeros(static_cast<int>(vars->size())).inc(idx)] = Rat(1);
        return p;
    }

    static Poly variable(const Vars& vars, const std::string& name) {
        return variable(vars, vars->require(name));
    }

    static Poly monomial(Vars vars, const MultiIndex& mu, const Rat& c) {
        Poly p(std::move(vars));
        if (mu.arity() != static_cast<int>(p.vars_->size()))
            throw std::invalid_argument("monomial arity mismatch");
        if (!c.is_zero()) p.t_[mu] = c;
        return p;
    }

    const Vars& vars() const { return vars_; }
    const Terms& terms() const { return t_; }
    int nvars() const { return static_cast<int>(vars_->size()); }

    bool is_zero() const { return t_.empty(); }

    bool is_constant() const {
        return t_.empty() || (t_.size() == 1 && t_.begin()->first.is_zero());
    }

    Rat constant_value() const {
        if (t_.empty()) return Rat(0);
        if (!is_constant()) throw std::logic_error("polynomial is not constant");
        return t_.begin()->second;
    }

    int degree() const {
        if (t_.empty()) return -1;
        return t_.rbegin()->first.order();
    }

    int degree_in(int v) const {
        int d = -1;
        for (const auto& [mu, c] : t_) d = std::max(d, mu[v]);
        return t_.empty() ? -1 : d;
    }

    // Highest graded-lex term.
    std::pair<MultiIndex, Rat> leading() const {
        if (t_.empty()) throw std::logic_error("leading term of zero");
        return *t_.rbegin();
    }

    Poly operator-() const {
        Poly r(vars_);
        for (const auto& [mu, c] : t_) r.t_[mu] = -c;
        return r;
    }

    Poly& operator+=(const Poly& o) {
        check_same_vars(vars_, o.vars_);
        for (const auto& [mu, c] : o.t_) add_term(mu, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check_same_vars(vars_, o.vars_);
        for (const auto& [mu, c] : o.t_) add_term(mu, -c);
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        check_same_vars(a.vars_, b.vars_);
        Poly r(a.vars_);
        for (const auto& [mu, c] : a.t_)
            for (const auto& [nu, d] : b.t_) r.add_term(mu + nu, c * d);
        return r;
    }

    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    friend Poly operator*(const Poly& a, const Rat& s) {
        Poly r(a.vars_);
        if (s.is_zero()) return r;
        for (const auto& [mu, c] : a.t_) r.t_[mu] = c * s;
        return r;
    }
    friend Poly operator*(const Rat& s, const Poly& a) { return a * s; }

    Poly pow(int k) const {
        if (k < 0) throw std::invalid_argument("negative polynomial power");
        Poly acc = constant(vars_, Rat(1));
        Poly b = *this;
        while (k > 0) {
            if (k & 1) acc = acc * b;
            b = b * b;
            k >>= 1;
        }
        return acc;
    }

    bool operator==(const Poly& o) const { return same_vars(vars_, o.vars_) && t_ == o.t_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    Poly derive(int v) const {
        Poly r(vars_);
        for (const auto& [mu, c] : t_) {
            if (mu[v] == 0) continue;
            r.add_term(mu.dec(v), c * Rat(mu[v]));
        }
        return r;
    }

    // Total evaluation; point binds every variable of the context.
    Rat eval(const std::vector<Rat>& point) const {
        if (point.size() != vars_->size())
            throw std::invalid_argument("evaluation point arity mismatch");
        Rat acc(0);
        for (const auto& [mu, c] : t_) {
            Rat term = c;
            for (int v = 0; v < mu.arity(); ++v)
                if (mu[v] > 0) term *= rat_pow(point[v], mu[v]);
            acc += term;
        }
        return acc;
    }

    // Smallest variable index with a positive exponent anywhere; -1 if constant.
    int min_used_var() const {
        int best = -1;
        for (const auto& [mu, c] : t_)
            for (int v = 0; v < mu.arity(); ++v)
                if (mu[v] > 0 && (best < 0 || v < best)) best = v;
        return best;
    }

    // Scales so coefficients become integers with gcd 1 and the leading
    // graded-lex coefficient positive. Returns the canonical representative.
    Poly unit_normal() const {
        if (t_.empty()) return *this;
        BigInt den_lcm = 1, num_gcd = 0;
        for (const auto& [mu, c] : t_) {
            den_lcm = int_lcm(den_lcm, rat_den(c));
            num_gcd = int_gcd(num_gcd, rat_num(c));
        }
        Rat scale = make_rat(den_lcm, num_gcd);
        if (t_.rbegin()->second * scale < 0) scale = -scale;
        return *this * scale;
    }

    // The rational factor u with (*this) == u * unit_normal().
    Rat unit_factor() const {
        if (t_.empty()) return Rat(1);
        Poly un = unit_normal();
        return t_.rbegin()->second / un.terms().rbegin()->second;
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::string s;
        // leading term first
        for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
            const auto& [mu, c] = *it;
            Rat a = c;
            if (s.empty()) {
                if (a < 0) { s += "-"; a = -a; }
            } else {
                s += (a < 0) ? " - " : " + ";
                if (a < 0) a = -a;
            }
            std::string mono;
            for (int v = 0; v < mu.arity(); ++v) {
                if (mu[v] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += vars_->name(v);
                if (mu[v] > 1) mono += "^" + std::to_string(mu[v]);
            }
            if (mono.empty()) {
                s += to_string(a);
            } else if (is_one(a)) {
                s += mono;
            } else {
                s += to_string(a) + "*" + mono;
            }
        }
        return s;
    }

private:
    void add_term(const MultiIndex& mu, const Rat& c) {
        if (c.is_zero()) return;
        auto it = t_.find(mu);
        if (it == t_.end()) {
            t_.emplace(mu, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    Vars vars_;
    Terms t_;
};

// ---- exact division and gcd ------------------------------------------------

// Quotient of an exact division f = q*g; throws if the division is inexact.
inline Poly exact_div(const Poly& f, const Poly& g) {
    check_same_vars(f.vars(), g.vars());
    if (g.is_zero()) throw std::domain_error("polynomial division by zero");
    if (f.is_zero()) return Poly::zero(f.vars());
    if (g.is_constant()) return f * (Rat(1) / g.constant_value());
    Poly r = f;
    Poly q(f.vars());
    auto [glm, glc] = g.leading();
    while (!r.is_zero()) {
        auto [rlm, rlc] = r.leading();
        if (!glm.divides(rlm)) throw std::domain_error("inexact polynomial division");
        MultiIndex m = rlm.minus(glm);
        Rat c = rlc / glc;
        Poly t = Poly::monomial(f.vars(), m, c);
        q += t;
        r -= t * g;
    }
    return q;
}

namespace detail {

// Univariate view in variable v: coefficient polynomials keyed by v-degree.
inline std::map<int, Poly> coeffs_in(const Poly& p, int v) {
    std::map<int, Poly> out;
    for (const auto& [mu, c] : p.terms()) {
        int d = mu[v];
        MultiIndex rest = mu;
        std::vector<int> e = rest.entries();
        e[v] = 0;
        auto it = out.find(d);
        if (it == out.end()) it = out.emplace(d, Poly::zero(p.vars())).first;
        it->second += Poly::monomial(p.vars(), MultiIndex(e), c);
    }
    return out;
}

inline Poly from_coeffs_in(const Vars& vars, int v, const std::map<int, Poly>& coeffs) {
    Poly acc(vars);
    for (const auto& [d, c] : coeffs) {
        MultiIndex vm = MultiIndex::zeros(static_cast<int>(vars->size()));
        for (int i = 0; i < d; ++i) vm = vm.inc(v);
        acc += c * Poly::monomial(vars, vm, Rat(1));
    }
    return acc;
}

inline Poly lead_coeff_in(const Poly& p, int v) {
    auto cs = coeffs_in(p, v);
    return cs.rbegin()->second;
}

// Pseudo-remainder of a by b in variable v; deg_v decreases strictly.
inline Poly prem(Poly a, const Poly& b, int v) {
    const int db = b.degree_in(v);
    const Poly lb = lead_coeff_in(b, v);
    while (!a.is_zero() && a.degree_in(v) >= db) {
        const int da = a.degree_in(v);
        const Poly la = lead_coeff_in(a, v);
        MultiIndex shift = MultiIndex::zeros(static_cast<int>(a.vars()->size()));
        for (int i = 0; i < da - db; ++i) shift = shift.inc(v);
        a = lb * a - la * Poly::monomial(a.vars(), shift, Rat(1)) * b;
    }
    return a;
}

}  // namespace detail

// GCD up to units; the result is unit-normal (integer coefficients, content 1,
// positive leading coefficient), or zero when both inputs are zero.
// Recursive content / primitive-part reduction with a primitive PRS.
inline Poly poly_gcd(const Poly& a, const Poly& b) {
    check_same_vars(a.vars(), b.vars());
    if (a.is_zero()) return b.unit_normal();
    if (b.is_zero()) return a.unit_normal();
    if (a.is_constant() || b.is_constant()) return Poly::constant(a.vars(), Rat(1));

    int v = std::min(a.min_used_var(), b.min_used_var());
    // contents and primitive parts with respect to v
    auto content_v = [&](const Poly& p) {
        Poly c(p.vars());
        for (const auto& [d, coeff] : detail::coeffs_in(p, v)) {
            c = poly_gcd(c, coeff);
            if (c.is_constant() && !c.is_zero()) break;
        }
        return c;
    };
    // A variable-free "content" means the poly does not involve v at all only
    // when its v-degree is zero; handle that degenerate case first.
    if (a.degree_in(v) == 0 || b.degree_in(v) == 0) {
        // v does not appear in one argument: gcd divides its content in v
        const Poly& flat = (a.degree_in(v) == 0) ? a : b;
        const Poly& other = (a.degree_in(v) == 0) ? b : a;
        return poly_gcd(flat, content_v(other));
    }

    Poly ca = content_v(a), cb = content_v(b);
    Poly c = poly_gcd(ca, cb);
    Poly A = exact_div(a, ca), B = exact_div(b, cb);
    if (A.degree_in(v) < B.degree_in(v)) std::swap(A, B);
    Poly gpp(a.vars());
    while (true) {
        Poly R = detail::prem(A, B, v);
        if (R.is_zero()) {
            // B divides A up to content: primitive part of B is the gcd
            gpp = exact_div(B, content_v(B));
            break;
        }
        if (R.degree_in(v) == 0) {
            gpp = Poly::constant(a.vars(), Rat(1));
            break;
        }
        A = B;
        B = exact_div(R, content_v(R));
    }
    return (c * gpp).unit_normal();
}

}  // namespace jetcal
