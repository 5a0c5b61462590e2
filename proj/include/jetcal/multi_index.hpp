#pragma once

#include "rational.hpp"

#include <algorithm>
#include <compare>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// Multi-index over n base directions: an exponent vector (mu_1,...,mu_n),
// mu_i >= 0. Used both for derivative orders and for monomial exponents on
// symbol fibers. Comparison is graded lexicographic so containers iterate
// order by order.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : e_(std::move(e)) {
        for (int v : e_)
            if (v < 0) throw std::invalid_argument("negative multi-index entry");
    }

    static MultiIndex zeros(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int i) { return zeros(n).inc(i); }

    int arity() const { return static_cast<int>(e_.size()); }
    int operator[](int i) const { return e_.at(i); }
    const std::vector<int>& entries() const { return e_; }

    int order() const { return std::accumulate(e_.begin(), e_.end(), 0); }
    bool is_zero() const { return order() == 0; }

    // mu + 1_i
    MultiIndex inc(int i) const {
        MultiIndex r = *this;
        r.e_.at(i) += 1;
        return r;
    }

    // mu - 1_i; requires mu_i > 0
    MultiIndex dec(int i) const {
        MultiIndex r = *this;
        if (r.e_.at(i) <= 0) throw std::invalid_argument("multi-index decrement below zero");
        r.e_[i] -= 1;
        return r;
    }

    MultiIndex operator+(const MultiIndex& o) const {
        MultiIndex r = *this;
        for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
        return r;
    }

    // Componentwise mu <= nu
    bool divides(const MultiIndex& o) const {
        for (std::size_t i = 0; i < e_.size(); ++i)
            if (e_[i] > o.e_[i]) return false;
        return true;
    }

    MultiIndex minus(const MultiIndex& o) const {
        MultiIndex r = *this;
        for (std::size_t i = 0; i < e_.size(); ++i) {
            r.e_[i] -= o.e_[i];
            if (r.e_[i] < 0) throw std::invalid_argument("multi-index subtraction below zero");
        }
        return r;
    }

    // mu!
    BigInt fact() const {
        BigInt f = 1;
        for (int v : e_) f *= factorial(v);
        return f;
    }

    bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
    bool operator!=(const MultiIndex& o) const { return e_ != o.e_; }

    // Graded lex: lower total order first, then lexicographic.
    bool operator<(const MultiIndex& o) const {
        int a = order(), b = o.order();
        if (a != b) return a < b;
        return e_ < o.e_;
    }

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < e_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e_[i]);
        }
        return s + ")";
    }

private:
    std::vector<int> e_;
};

// mu! / (lam! * nu!) for lam + nu = mu; the Leibniz weight.
inline Rat multinomial(const MultiIndex& mu, const MultiIndex& lam, const MultiIndex& nu) {
    return make_rat(mu.fact(), lam.fact() * nu.fact());
}

// All mu with |mu| = q, graded-lex order within the degree.
inline std::vector<MultiIndex> multi_indices_of_order(int n, int q) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(n, 0);
    // lexicographic enumeration of compositions of q into n parts
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == n - 1) {
            cur[pos] = rem;
            out.emplace_back(cur);
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[pos] = v;
            self(self, pos + 1, rem - v);
        }
    };
    if (n == 0) {
        if (q == 0) out.emplace_back(cur);
        return out;
    }
    rec(rec, 0, q);
    // enforce the container order used elsewhere
    std::sort(out.begin(), out.end());
    return out;
}

// All mu with |mu| <= q, ascending by order then lex.
inline std::vector<MultiIndex> multi_indices_up_to(int n, int q) {
    std::vector<MultiIndex> out;
    for (int d = 0; d <= q; ++d) {
        auto layer = multi_indices_of_order(n, d);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

// All splittings mu = lam + nu, as (lam, nu) pairs.
inline std::vector<std::pair<MultiIndex, MultiIndex>> splittings(const MultiIndex& mu) {
    std::vector<std::pair<MultiIndex, MultiIndex>> out;
    int n = mu.arity();
    std::vector<int> lam(n, 0);
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == n) {
            MultiIndex l(lam);
            out.emplace_back(l, mu.minus(l));
            return;
        }
        for (int v = 0; v <= mu[pos]; ++v) {
            lam[pos] = v;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace jetcal
