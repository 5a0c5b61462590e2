#pragma once

#include "polynomial.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

struct PoleError : std::runtime_error {
    explicit PoleError(const std::string& m) : std::runtime_error(m) {}
};

// Quotient of polynomials in canonical form: gcd(num, den) is a unit, the
// denominator is unit-normal (integer coefficients, content 1, positive
// leading coefficient), and zero is 0/1. Equal values therefore have equal
// representations, so operator== is structural.
class RatFn {
public:
    RatFn() = default;
    explicit RatFn(Poly num) : num_(std::move(num)) {
        den_ = Poly::constant(num_.vars(), Rat(1));
        normalize();
    }
    RatFn(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
        check_same_vars(num_.vars(), den_.vars());
        if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
        normalize();
    }

    static RatFn zero(const Vars& vars) { return RatFn(Poly::zero(vars)); }
    static RatFn constant(const Vars& vars, const Rat& c) { return RatFn(Poly::constant(vars, c)); }
    static RatFn variable(const Vars& vars, int idx) { return RatFn(Poly::variable(vars, idx)); }
    static RatFn variable(const Vars& vars, const std::string& name) {
        return RatFn(Poly::variable(vars, name));
    }
    static RatFn from_int(const Vars& vars, long v) { return constant(vars, Rat(v)); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    const Vars& vars() const { return num_.vars(); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rat constant_value() const { return num_.constant_value() / den_.constant_value(); }
    bool is_polynomial() const { return den_.is_constant(); }

    RatFn operator-() const {
        RatFn r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend RatFn operator+(const RatFn& a, const RatFn& b) {
        check_same_vars(a.vars(), b.vars());
        if (a.den_ == b.den_) return RatFn(a.num_ + b.num_, a.den_);
        return RatFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFn operator-(const RatFn& a, const RatFn& b) { return a + (-b); }
    friend RatFn operator*(const RatFn& a, const RatFn& b) {
        check_same_vars(a.vars(), b.vars());
        return RatFn(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFn operator/(const RatFn& a, const RatFn& b) {
        check_same_vars(a.vars(), b.vars());
        if (b.is_zero()) throw std::domain_error("division by zero rational function");
        return RatFn(a.num_ * b.den_, a.den_ * b.num_);
    }

    RatFn& operator+=(const RatFn& o) { return *this = *this + o; }
    RatFn& operator-=(const RatFn& o) { return *this = *this - o; }
    RatFn& operator*=(const RatFn& o) { return *this = *this * o; }
    RatFn& operator/=(const RatFn& o) { return *this = *this / o; }

    friend RatFn operator*(const RatFn& a, const Rat& s) { return RatFn(a.num_ * s, a.den_); }
    friend RatFn operator*(const Rat& s, const RatFn& a) { return a * s; }

    RatFn pow(int k) const {
        if (k < 0) {
            if (is_zero()) throw std::domain_error("zero raised to a negative power");
            return RatFn(den_, num_).pow(-k);
        }
        return RatFn(num_.pow(k), den_.pow(k));
    }

    RatFn derive(int v) const {
        if (den_.is_constant())
            return RatFn(num_.derive(v), den_);
        return RatFn(num_.derive(v) * den_ - num_ * den_.derive(v), den_ * den_);
    }

    Rat eval(const std::vector<Rat>& point) const {
        Rat d = den_.eval(point);
        if (d.is_zero()) throw PoleError("evaluation at a pole of the denominator");
        return num_.eval(point) / d;
    }

    // Total substitution: images[v] replaces variable v. All images share one
    // (possibly different) variable context.
    RatFn subst(const std::vector<RatFn>& images) const {
        if (images.size() != vars()->size())
            throw std::invalid_argument("substitution image count mismatch");
        const Vars& tv = images.empty() ? vars() : images[0].vars();
        RatFn n = subst_poly(num_, images, tv);
        RatFn d = subst_poly(den_, images, tv);
        if (d.is_zero()) throw PoleError("substitution lands on a pole");
        return n / d;
    }

    bool operator==(const RatFn& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const RatFn& o) const { return !(*this == o); }

    // Independent equality route: a/b == c/d iff ad == cb.
    bool cross_equal(const RatFn& o) const { return num_ * o.den_ == o.num_ * den_; }

    std::string str() const {
        if (den_.is_constant() && is_one(den_.constant_value())) return num_.str();
        return "(" + num_.str() + ")/(" + den_.str() + ")";
    }

private:
    static RatFn subst_poly(const Poly& p, const std::vector<RatFn>& images, const Vars& tv) {
        RatFn acc = RatFn::zero(tv);
        for (const auto& [mu, c] : p.terms()) {
            RatFn term = RatFn::constant(tv, c);
            for (int v = 0; v < mu.arity(); ++v)
                if (mu[v] > 0) term *= images[v].pow(mu[v]);
            acc += term;
        }
        return acc;
    }

    void normalize() {
        if (num_.is_zero()) {
            den_ = Poly::constant(num_.vars(), Rat(1));
            return;
        }
        if (!den_.is_constant()) {
            if (!num_.is_constant()) {
                Poly g = poly_gcd(num_, den_);
                if (!g.is_constant()) {
                    num_ = exact_div(num_, g);
                    den_ = exact_div(den_, g);
                }
            }
        }
        // den becomes unit-normal; num absorbs the scale
        Poly dn = den_.unit_normal();
        Rat u = den_.leading().second / dn.leading().second;
        num_ = num_ * (Rat(1) / u);
        den_ = dn;
    }

    Poly num_, den_;
};

}  // namespace jetcal
