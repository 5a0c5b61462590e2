#pragma once

#include "matrix.hpp"
#include "rational.hpp"
#include "rational_function.hpp"
#include "rng.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace jetcal {

// Vector field on the chart: one RatFn component per base coordinate.
using VecField = std::vector<RatFn>;

inline VecField vf_bracket(const VecField& a, const VecField& b, int n) {
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("vector field arity mismatch");
    VecField out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        RatFn acc = RatFn::zero(a[0].vars());
        for (int r = 0; r < n; ++r) acc += a[r] * b[i].derive(r) - b[r] * a[i].derive(r);
        out.push_back(acc);
    }
    return out;
}

// Structure constants c^tau_{rho sigma}, antisymmetric in the lower pair.
class StructureConstants {
public:
    explicit StructureConstants(int p) : p_(p), c_(static_cast<std::size_t>(p) * p * p, Rat(0)) {
        if (p <= 0) throw std::invalid_argument("structure constants need p >= 1");
    }

    int dim() const { return p_; }

    const Rat& at(int tau, int rho, int sigma) const { return c_[idx(tau, rho, sigma)]; }

    // Stores both orientations; rejects rho == sigma with a nonzero value.
    void set(int tau, int rho, int sigma, const Rat& v) {
        if (rho == sigma && !v.is_zero())
            throw std::invalid_argument("antisymmetry forces c^t_{rr} = 0");
        c_[idx(tau, rho, sigma)] = v;
        c_[idx(tau, sigma, rho)] = -v;
    }

    // Jacobi residuals c^l_{mr}c^m_{st} + c^l_{ms}c^m_{tr} + c^l_{mt}c^m_{rs};
    // the list is empty exactly when this is a Lie algebra.
    std::vector<std::string> jacobi_violations() const {
        std::vector<std::string> out;
        for (int l = 0; l < p_; ++l)
            for (int r = 0; r < p_; ++r)
                for (int s = r + 1; s < p_; ++s)
                    for (int t = s + 1; t < p_; ++t) {
                        Rat acc(0);
                        for (int m = 0; m < p_; ++m)
                            acc += at(l, m, r) * at(m, s, t) + at(l, m, s) * at(m, t, r) +
                                   at(l, m, t) * at(m, r, s);
                        if (!acc.is_zero())
                            out.push_back("jacobi(" + std::to_string(l) + ";" + std::to_string(r) +
                                          "," + std::to_string(s) + "," + std::to_string(t) +
                                          ") = " + to_string(acc));
                    }
        return out;
    }

    bool is_lie_algebra() const { return jacobi_violations().empty(); }

private:
    std::size_t idx(int tau, int rho, int sigma) const {
        if (tau < 0 || tau >= p_ || rho < 0 || rho >= p_ || sigma < 0 || sigma >= p_)
            throw std::out_of_range("structure constant index");
        return (static_cast<std::size_t>(tau) * p_ + rho) * p_ + sigma;
    }

    int p_;
    std::vector<Rat> c_;
};

inline bool check_lie_algebra(const StructureConstants& c) { return c.is_lie_algebra(); }

namespace detail {

// Rational sample points avoiding the poles of a family of functions.
inline std::vector<std::vector<Rat>> sample_points(const std::vector<RatFn>& fns, int n_coords,
                                                   int count, std::uint64_t seed) {
    std::vector<std::vector<Rat>> pts;
    Rng rng(seed);
    int guard = 0;
    while (static_cast<int>(pts.size()) < count) {
        if (++guard > 200) throw std::runtime_error("could not sample pole-free rational points");
        std::vector<Rat> cand = rng.point(n_coords, -9, 9);
        bool ok = true;
        for (const RatFn& f : fns) {
            std::vector<Rat> full(f.vars()->size(), Rat(1));
            for (int i = 0; i < n_coords && i < static_cast<int>(full.size()); ++i) full[i] = cand[i];
            if (f.den().eval(full).is_zero()) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back(std::move(cand));
    }
    return pts;
}

}  // namespace detail

// Solves [theta_r, theta_s] = c^t_{rs} theta_t for constant c, by exact
// elimination at sampled rational points followed by a full symbolic check.
// Throws when the generators are dependent over the constants, when a bracket
// leaves their span, or when no constant solution exists.
inline StructureConstants infer_structure_constants(const std::vector<VecField>& theta, int n,
                                                    std::uint64_t seed = 0x5eedbeef) {
    const int p = static_cast<int>(theta.size());
    if (p == 0) throw std::invalid_argument("no generators");
    const Vars& vars = theta[0][0].vars();

    std::vector<RatFn> all;
    for (const auto& th : theta)
        for (const RatFn& f : th) all.push_back(f);

    // Enough points that the stacked evaluation matrix can reach rank p.
    const int npts = p + 3;
    auto pts = detail::sample_points(all, n, npts, seed);

    auto full_point = [&](const std::vector<Rat>& xp) {
        std::vector<Rat> full(vars->size(), Rat(1));
        for (int i = 0; i < n && i < static_cast<int>(full.size()); ++i) full[i] = xp[i];
        return full;
    };

    Matrix<Rat> M = rat_matrix(n * npts, p);
    for (int t = 0; t < npts; ++t) {
        auto fp = full_point(pts[t]);
        for (int i = 0; i < n; ++i)
            for (int rho = 0; rho < p; ++rho) M.at(t * n + i, rho) = theta[rho][i].eval(fp);
    }
    if (M.rank() < p)
        throw std::runtime_error("generators are linearly dependent over the constants");

    StructureConstants c(p);
    for (int rho = 0; rho < p; ++rho)
        for (int sigma = rho + 1; sigma < p; ++sigma) {
            VecField br = vf_bracket(theta[rho], theta[sigma], n);
            std::vector<Rat> rhs;
            rhs.reserve(static_cast<std::size_t>(n) * npts);
            for (int t = 0; t < npts; ++t) {
                auto fp = full_point(pts[t]);
                for (int i = 0; i < n; ++i) rhs.push_back(br[i].eval(fp));
            }
            auto sol = M.solve(rhs);
            if (!sol)
                throw std::runtime_error("bracket leaves the span of the generators");
            // symbolic verification that the constant solution reproduces the bracket
            for (int i = 0; i < n; ++i) {
                RatFn acc = RatFn::zero(vars);
                for (int tau = 0; tau < p; ++tau) acc += RatFn::constant(vars, (*sol)[tau]) * theta[tau][i];
                if (acc != br[i])
                    throw std::runtime_error("bracket has no constant-coefficient expansion");
            }
            for (int tau = 0; tau < p; ++tau) c.set(tau, rho, sigma, (*sol)[tau]);
        }
    return c;
}

}  // namespace jetcal
