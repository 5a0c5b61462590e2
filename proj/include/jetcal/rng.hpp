#pragma once

#include "polynomial.hpp"
#include "rational_function.hpp"

#include <cstdint>

namespace jetcal {

// splitmix64: tiny, fully portable generator so that seeded runs produce
// byte-identical output on every platform. Not for cryptographic use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}

    std::uint64_t next() {
        s_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi], inclusive.
    long uniform(long lo, long hi) {
        if (hi < lo) throw std::invalid_argument("empty range");
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(next() % span);
    }

    bool chance(int num, int den) { return uniform(1, den) <= num; }

    // Small nonzero rational with bounded numerator/denominator.
    Rat rat_nonzero(long max_num = 4, long max_den = 3) {
        long n = 0;
        while (n == 0) n = uniform(-max_num, max_num);
        long d = uniform(1, max_den);
        return make_rat(n, d);
    }

    Rat rat(long max_num = 4, long max_den = 3) {
        long n = uniform(-max_num, max_num);
        long d = uniform(1, max_den);
        return make_rat(n, d);
    }

    // Sparse random polynomial in the first n_active variables of the context.
    Poly poly(const Vars& vars, int n_active, int max_deg, int terms = 3) {
        Poly p(vars);
        int n = static_cast<int>(vars->size());
        for (int t = 0; t < terms; ++t) {
            std::vector<int> e(n, 0);
            int deg = static_cast<int>(uniform(0, max_deg));
            for (int d = 0; d < deg; ++d) e[uniform(0, n_active - 1)] += 1;
            p += Poly::monomial(vars, MultiIndex(e), rat(3, 2));
        }
        return p;
    }

    RatFn ratfn_poly(const Vars& vars, int n_active, int max_deg, int terms = 3) {
        return RatFn(poly(vars, n_active, max_deg, terms));
    }

    // Rational sample point away from the poles listed as denominators.
    std::vector<Rat> point(int n, long lo = 2, long hi = 9) {
        std::vector<Rat> p;
        p.reserve(n);
        for (int i = 0; i < n; ++i) p.push_back(Rat(uniform(lo, hi)));
        return p;
    }

private:
    std::uint64_t s_;
};

}  // namespace jetcal
