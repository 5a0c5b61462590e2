#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jetcal {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational scalar. Canonical form is maintained by the backend:
// gcd(num, den) = 1, den > 0, zero is 0/1.
using Rat = boost::multiprecision::cpp_rational;

inline Rat make_rat(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    return Rat(num) / Rat(den);  // exact division normalizes sign and gcd
}

inline Rat make_rat(std::int64_t num, std::int64_t den = 1) {
    return make_rat(BigInt(num), BigInt(den));
}

inline BigInt rat_num(const Rat& r) { return numerator(r); }
inline BigInt rat_den(const Rat& r) { return denominator(r); }

inline bool is_zero(const Rat& r) { return r.is_zero(); }
inline bool is_one(const Rat& r) { return r == 1; }

inline Rat rat_pow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    if (e < 0) {
        if (base.is_zero()) throw std::domain_error("0 raised to a negative power");
        return Rat(1) / rat_pow(base, -e);
    }
    Rat acc(1), b = base;
    long k = e;
    while (k > 0) {
        if (k & 1) acc *= b;
        b *= b;
        k >>= 1;
    }
    return acc;
}

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// Prints "p" or "p/q"; q is always positive in canonical form.
inline std::string to_string(const Rat& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

inline BigInt int_gcd(BigInt a, BigInt b) {
    using boost::multiprecision::gcd;
    BigInt g = gcd(a, b);
    return g < 0 ? BigInt(-g) : g;
}

inline BigInt int_lcm(const BigInt& a, const BigInt& b) {
    if (a == 0 || b == 0) return 0;
    BigInt g = int_gcd(a, b);
    BigInt l = (a / g) * b;
    return l < 0 ? BigInt(-l) : l;
}

inline BigInt factorial(int k) {
    BigInt f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

}  // namespace jetcal
