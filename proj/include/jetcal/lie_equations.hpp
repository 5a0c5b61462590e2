#pragma once

#include "forms.hpp"
#include "jets.hpp"
#include "lie_algebra.hpp"
#include "matrix.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jetcal {

// One scalar equation, linear in the jet coordinates with function
// coefficients: sum over (k, mu) of coeff(x) * xi^k_mu = 0.
class LinearEquation {
public:
    using Key = std::pair<int, MultiIndex>;

    const std::map<Key, RatFn>& terms() const { return t_; }
    bool empty() const { return t_.empty(); }

    void add_term(int k, const MultiIndex& mu, const RatFn& a) {
        if (a.is_zero()) return;
        Key key{k, mu};
        auto it = t_.find(key);
        if (it == t_.end()) {
            t_.emplace(std::move(key), a);
        } else {
            it->second += a;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    void add_scaled(const LinearEquation& o, const RatFn& s) {
        if (s.is_zero()) return;
        for (const auto& [key, a] : o.t_) add_term(key.first, key.second, a * s);
    }

    int max_order() const {
        int q = 0;
        for (const auto& [key, a] : t_) q = std::max(q, key.second.order());
        return q;
    }

    LinearEquation formal_derivative(int i) const {
        LinearEquation out;
        for (const auto& [key, a] : t_) {
            out.add_term(key.first, key.second, a.derive(i));
            out.add_term(key.first, key.second.inc(i), a);
        }
        return out;
    }

    RatFn apply(const JetSection& s) const {
        RatFn acc = RatFn::zero(s.vars());
        for (const auto& [key, a] : t_) acc += a * s.at(key.first, key.second);
        return acc;
    }

private:
    std::map<Key, RatFn> t_;
};

// A finite list of linear equations on the order-q jets of maps with m
// components over an n-dimensional base.
class LinearSystem {
public:
    LinearSystem(int n, int m, int q, Vars vars) : n_(n), m_(m), q_(q), vars_(std::move(vars)) {
        if (n_ <= 0 || m_ <= 0 || q_ < 0) throw std::invalid_argument("bad system shape");
        if (static_cast<int>(vars_->size()) != n_)
            throw std::invalid_argument("chart size does not match the base dimension");
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int order() const { return q_; }
    const Vars& vars() const { return vars_; }
    const std::vector<LinearEquation>& equations() const { return eqs_; }

    void add(LinearEquation eq) {
        if (eq.empty()) return;
        if (eq.max_order() > q_)
            throw std::invalid_argument("equation order exceeds the system order");
        for (const auto& [key, a] : eq.terms()) {
            if (key.first < 0 || key.first >= m_ || key.second.arity() != n_)
                throw std::invalid_argument("equation indexes outside the jet space");
            check_same_vars(a.vars(), vars_);
        }
        eqs_.push_back(std::move(eq));
    }

private:
    int n_, m_, q_;
    Vars vars_;
    std::vector<LinearEquation> eqs_;
};

// Adds all formal derivatives of total order <= r; derivative multi-indices
// are generated in nondecreasing direction order so each distinct derivative
// appears once.
inline LinearSystem prolong(const LinearSystem& sys, int r) {
    LinearSystem out(sys.n(), sys.m(), sys.order() + r, sys.vars());
    for (const auto& eq : sys.equations()) out.add(eq);
    std::vector<std::pair<LinearEquation, int>> level;
    for (const auto& eq : sys.equations()) level.push_back({eq, 0});
    for (int t = 1; t <= r; ++t) {
        std::vector<std::pair<LinearEquation, int>> next;
        for (const auto& [eq, lo] : level)
            for (int i = lo; i < sys.n(); ++i) next.push_back({eq.formal_derivative(i), i});
        for (const auto& [eq, lo] : next) out.add(eq);
        level = std::move(next);
    }
    return out;
}

// The equations of order at most q2, viewed as a system of order q2.
inline LinearSystem subsystem_of_order(const LinearSystem& sys, int q2) {
    LinearSystem out(sys.n(), sys.m(), q2, sys.vars());
    for (const auto& eq : sys.equations())
        if (eq.max_order() <= q2) out.add(eq);
    return out;
}

// Coefficient matrix at a base point: rows are equations, columns the flat
// jet coordinates of order <= q.
inline Matrix<Rat> equation_matrix(const LinearSystem& sys, const std::vector<Rat>& point) {
    ValueSpace vs = ValueSpace::jet(sys.n(), sys.m(), sys.order());
    auto layers = vs.index_layers();
    std::map<MultiIndex, int> pos;
    for (int t = 0; t < static_cast<int>(layers.size()); ++t) pos[layers[t]] = t;
    Matrix<Rat> M = rat_matrix(static_cast<int>(sys.equations().size()), vs.dim());
    for (int e = 0; e < static_cast<int>(sys.equations().size()); ++e)
        for (const auto& [key, a] : sys.equations()[e].terms())
            M.at(e, pos.at(key.second) * sys.m() + key.first) = a.eval(point);
    return M;
}

// Top-order coefficient matrix at a base point: columns are the flat
// coordinates of the order-q symbol slice only.
inline Matrix<Rat> symbol_matrix(const LinearSystem& sys, const std::vector<Rat>& point) {
    ValueSpace vs = ValueSpace::symbols(sys.n(), sys.m(), sys.order());
    auto layers = vs.index_layers();
    std::map<MultiIndex, int> pos;
    for (int t = 0; t < static_cast<int>(layers.size()); ++t) pos[layers[t]] = t;
    Matrix<Rat> M = rat_matrix(static_cast<int>(sys.equations().size()), vs.dim());
    for (int e = 0; e < static_cast<int>(sys.equations().size()); ++e)
        for (const auto& [key, a] : sys.equations()[e].terms()) {
            if (key.second.order() != sys.order()) continue;
            M.at(e, pos.at(key.second) * sys.m() + key.first) = a.eval(point);
        }
    return M;
}

// Symbolic coefficient matrix over the base functions.
inline Matrix<RatFn> equation_matrix_fn(const LinearSystem& sys) {
    ValueSpace vs = ValueSpace::jet(sys.n(), sys.m(), sys.order());
    auto layers = vs.index_layers();
    std::map<MultiIndex, int> pos;
    for (int t = 0; t < static_cast<int>(layers.size()); ++t) pos[layers[t]] = t;
    Matrix<RatFn> M = ratfn_matrix(static_cast<int>(sys.equations().size()), vs.dim(), sys.vars());
    for (int e = 0; e < static_cast<int>(sys.equations().size()); ++e)
        for (const auto& [key, a] : sys.equations()[e].terms())
            M.at(e, pos.at(key.second) * sys.m() + key.first) = a;
    return M;
}

// Base points avoiding every coefficient pole.
inline std::vector<std::vector<Rat>> system_sample_points(const LinearSystem& sys, int count,
                                                          std::uint64_t seed) {
    std::vector<RatFn> all;
    for (const auto& eq : sys.equations())
        for (const auto& [key, a] : eq.terms()) all.push_back(a);
    return detail::sample_points(all, sys.n(), count, seed);
}

// Fiber dimension of the solution subbundle at the point.
inline int solution_dim(const LinearSystem& sys, const std::vector<Rat>& point) {
    return ValueSpace::jet(sys.n(), sys.m(), sys.order()).dim() -
           equation_matrix(sys, point).rank();
}

// Fiber dimension of the order-q symbol at the point.
inline int symbol_dim(const LinearSystem& sys, const std::vector<Rat>& point) {
    return ValueSpace::symbols(sys.n(), sys.m(), sys.order()).dim() -
           symbol_matrix(sys, point).rank();
}

inline JetSection section_from_coordinates(const std::vector<RatFn>& v, int n, int m, int q,
                                           const Vars& vars) {
    ValueSpace vs = ValueSpace::jet(n, m, q);
    if (static_cast<int>(v.size()) != vs.dim())
        throw std::invalid_argument("coordinate vector does not match the jet fiber");
    JetSection s(n, m, q, vars);
    for (int idx = 0; idx < vs.dim(); ++idx) {
        if (v[idx].is_zero()) continue;
        auto [k, mu] = vs.unflat(idx);
        s.set(k, mu, v[idx]);
    }
    return s;
}

inline std::vector<RatFn> system_residuals(const LinearSystem& sys, const JetSection& s) {
    std::vector<RatFn> out;
    for (const auto& eq : sys.equations()) out.push_back(eq.apply(s));
    return out;
}

inline bool satisfies(const LinearSystem& sys, const JetSection& s) {
    for (const auto& eq : sys.equations())
        if (!eq.apply(s).is_zero()) return false;
    return true;
}

// ---- metric geometry ---------------------------------------------------

struct MetricData {
    int n;
    Vars vars;
    Matrix<RatFn> g;
    Matrix<RatFn> ginv;
    std::vector<Matrix<RatFn>> gamma;  // gamma[k].at(i, j), symmetric in (i, j)
};

inline MetricData make_metric(const Matrix<RatFn>& g) {
    const int n = g.rows();
    if (g.cols() != n) throw std::invalid_argument("metric must be square");
    const Vars& vars = g.at(0, 0).vars();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (g.at(i, j) != g.at(j, i)) throw std::invalid_argument("metric must be symmetric");
    if (g.det().is_zero()) throw std::invalid_argument("metric is degenerate");
    MetricData md{n, vars, g, g.inverse(), {}};
    const RatFn half = RatFn::constant(vars, make_rat(1, 2));
    for (int k = 0; k < n; ++k) {
        Matrix<RatFn> gk = ratfn_matrix(n, n, vars);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                RatFn acc = RatFn::zero(vars);
                for (int r = 0; r < n; ++r)
                    acc += md.ginv.at(k, r) *
                           (g.at(r, j).derive(i) + g.at(r, i).derive(j) - g.at(i, j).derive(r));
                acc = half * acc;
                gk.at(i, j) = acc;
                gk.at(j, i) = acc;
            }
        md.gamma.push_back(std::move(gk));
    }
    return md;
}

inline Vars standard_chart(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return make_vars(names);
}

inline MetricData euclidean_metric(int n) {
    Vars vars = standard_chart(n);
    Matrix<RatFn> g = ratfn_matrix(n, n, vars);
    for (int i = 0; i < n; ++i) g.at(i, i) = RatFn::from_int(vars, 1);
    return make_metric(g);
}

// diag(-1, 1, ..., 1): the flat indefinite companion of the Euclidean metric.
inline MetricData minkowski_metric(int n) {
    Vars vars = standard_chart(n);
    Matrix<RatFn> g = ratfn_matrix(n, n, vars);
    g.at(0, 0) = RatFn::from_int(vars, -1);
    for (int i = 1; i < n; ++i) g.at(i, i) = RatFn::from_int(vars, 1);
    return make_metric(g);
}

// diag(1, 1 + x1^2, 1 + x2^2, ...): a curved diagonal metric with rational
// curvature data.
inline MetricData curved_diagonal_metric(int n) {
    Vars vars = standard_chart(n);
    Matrix<RatFn> g = ratfn_matrix(n, n, vars);
    g.at(0, 0) = RatFn::from_int(vars, 1);
    for (int i = 1; i < n; ++i) {
        RatFn x = RatFn::variable(vars, i - 1);
        g.at(i, i) = RatFn::from_int(vars, 1) + x * x;
    }
    return make_metric(g);
}

// (1 + |x|^2) times the identity: conformally flat and curved.
inline MetricData scaled_flat_metric(int n) {
    Vars vars = standard_chart(n);
    RatFn phi = RatFn::from_int(vars, 1);
    for (int i = 0; i < n; ++i) {
        RatFn x = RatFn::variable(vars, i);
        phi += x * x;
    }
    Matrix<RatFn> g = ratfn_matrix(n, n, vars);
    for (int i = 0; i < n; ++i) g.at(i, i) = phi;
    return make_metric(g);
}

// ---- the three classical systems ----------------------------------------

// Vanishing metric flow along the unknown field:
// Omega_{ij} = g_{rj} xi^r_i + g_{ir} xi^r_j + xi^r d_r g_{ij}.
inline LinearEquation metric_flow_equation(const MetricData& md, int i, int j) {
    const int n = md.n;
    LinearEquation eq;
    MultiIndex z = MultiIndex::zeros(n);
    for (int r = 0; r < n; ++r) {
        eq.add_term(r, MultiIndex::unit(n, i), md.g.at(r, j));
        eq.add_term(r, MultiIndex::unit(n, j), md.g.at(i, r));
        eq.add_term(r, z, md.g.at(i, j).derive(r));
    }
    return eq;
}

// Trace-free part E_{ij} = Omega_{ij} - (1/n) (g^{rs} Omega_{rs}) g_{ij}.
inline LinearEquation traceless_flow_equation(const MetricData& md, int i, int j) {
    LinearEquation eq = metric_flow_equation(md, i, j);
    const RatFn w = md.g.at(i, j) * make_rat(-1, md.n);
    for (int r = 0; r < md.n; ++r)
        for (int s = 0; s < md.n; ++s) {
            RatFn c = w * md.ginv.at(r, s);
            if (!c.is_zero()) eq.add_scaled(metric_flow_equation(md, r, s), c);
        }
    return eq;
}

// Covariantized second-derivative equation
// G^k_{ij} = xi^k_{ij} + gamma^k_{rj} xi^r_i + gamma^k_{ir} xi^r_j
//            - gamma^r_{ij} xi^k_r + xi^r d_r gamma^k_{ij}.
inline LinearEquation covariant_hessian_equation(const MetricData& md, int k, int i, int j) {
    const int n = md.n;
    LinearEquation eq;
    eq.add_term(k, MultiIndex::unit(n, i).inc(j), RatFn::from_int(md.vars, 1));
    MultiIndex z = MultiIndex::zeros(n);
    for (int r = 0; r < n; ++r) {
        eq.add_term(r, MultiIndex::unit(n, i), md.gamma[k].at(r, j));
        eq.add_term(r, MultiIndex::unit(n, j), md.gamma[k].at(i, r));
        eq.add_term(k, MultiIndex::unit(n, r), -md.gamma[r].at(i, j));
        eq.add_term(r, z, md.gamma[k].at(i, j).derive(r));
    }
    return eq;
}

// Isometry jets: flow equations plus all covariant second-derivative
// equations, as one order-2 system.
inline LinearSystem killing_system(const MetricData& md) {
    LinearSystem sys(md.n, md.n, 2, md.vars);
    for (int i = 0; i < md.n; ++i)
        for (int j = i; j < md.n; ++j) sys.add(metric_flow_equation(md, i, j));
    for (int k = 0; k < md.n; ++k)
        for (int i = 0; i < md.n; ++i)
            for (int j = i; j < md.n; ++j) sys.add(covariant_hessian_equation(md, k, i, j));
    return sys;
}

// Trace-free flow equations plus all covariant second-derivative equations.
inline LinearSystem weyl_system(const MetricData& md) {
    LinearSystem sys(md.n, md.n, 2, md.vars);
    for (int i = 0; i < md.n; ++i)
        for (int j = i; j < md.n; ++j) sys.add(traceless_flow_equation(md, i, j));
    for (int k = 0; k < md.n; ++k)
        for (int i = 0; i < md.n; ++i)
            for (int j = i; j < md.n; ++j) sys.add(covariant_hessian_equation(md, k, i, j));
    return sys;
}

// Trace-free flow equations plus the second-derivative equations with their
// contracted part eliminated:
// Ghat^k_{ij} = G^k_{ij} - (1/n)(delta^k_i T_j + delta^k_j T_i
//                               - g_{ij} g^{kr} T_r),   T_j = G^r_{rj}.
inline LinearSystem conformal_system(const MetricData& md) {
    const int n = md.n;
    LinearSystem sys(n, n, 2, md.vars);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sys.add(traceless_flow_equation(md, i, j));
    std::vector<LinearEquation> trace;
    const RatFn one = RatFn::from_int(md.vars, 1);
    for (int j = 0; j < n; ++j) {
        LinearEquation t;
        for (int r = 0; r < n; ++r) t.add_scaled(covariant_hessian_equation(md, r, r, j), one);
        trace.push_back(std::move(t));
    }
    const Rat inv_n = make_rat(1, n);
    const RatFn minus_inv_n = RatFn::constant(md.vars, -inv_n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                LinearEquation eq = covariant_hessian_equation(md, k, i, j);
                if (k == i) eq.add_scaled(trace[j], minus_inv_n);
                if (k == j) eq.add_scaled(trace[i], minus_inv_n);
                RatFn w = md.g.at(i, j) * inv_n;
                for (int r = 0; r < n; ++r) {
                    RatFn c = w * md.ginv.at(k, r);
                    if (!c.is_zero()) eq.add_scaled(trace[r], c);
                }
                sys.add(eq);
            }
    return sys;
}

inline LinearSystem killing_first_order(const MetricData& md) {
    LinearSystem sys(md.n, md.n, 1, md.vars);
    for (int i = 0; i < md.n; ++i)
        for (int j = i; j < md.n; ++j) sys.add(metric_flow_equation(md, i, j));
    return sys;
}

inline LinearSystem conformal_first_order(const MetricData& md) {
    LinearSystem sys(md.n, md.n, 1, md.vars);
    for (int i = 0; i < md.n; ++i)
        for (int j = i; j < md.n; ++j) sys.add(traceless_flow_equation(md, i, j));
    return sys;
}

// ---- dimension diagrams --------------------------------------------------

// Columns of the series differential applied to elementary degree-r1 forms
// whose values run over the given order-q1 symbol vectors; coordinates are
// in the constant basis of degree-(r1+1) forms with order-(q1-1) values.
inline std::vector<std::vector<Rat>> delta_image_columns(
    int n, int m, int q1, int r1, const std::vector<std::vector<Rat>>& symbol_basis,
    const Vars& vars) {
    std::vector<std::vector<Rat>> cols;
    if (r1 < 0 || r1 > n || symbol_basis.empty()) return cols;
    for (const auto& J : index_tuples(n, r1))
        for (const auto& w : symbol_basis) {
            Form f(vars, n, r1, ValueSpace::symbols(n, m, q1));
            for (int s = 0; s < static_cast<int>(w.size()); ++s)
                if (!w[s].is_zero()) f.add(s, J, RatFn::constant(vars, w[s]));
            cols.push_back(constant_coordinates(spencer_delta(f)));
        }
    return cols;
}

inline int rank_of_columns(const std::vector<std::vector<Rat>>& cols, int rows) {
    if (cols.empty() || rows == 0) return 0;
    Matrix<Rat> M = rat_matrix(rows, static_cast<int>(cols.size()));
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (static_cast<int>(cols[c].size()) != rows)
            throw std::invalid_argument("column length mismatch");
        for (int r = 0; r < rows; ++r) M.at(r, c) = cols[c][r];
    }
    return M.rank();
}

// Dimension of the space of closed degree-r constant-coefficient forms with
// values in the span of the given (independent) order-q symbol vectors.
inline int closed_cochain_dim(int n, int m, int q, int r,
                              const std::vector<std::vector<Rat>>& symbol_basis,
                              const Vars& vars) {
    if (symbol_basis.empty() || r < 0 || r > n) return 0;
    const int T = static_cast<int>(index_tuples(n, r).size());
    const int source = T * static_cast<int>(symbol_basis.size());
    auto cols = delta_image_columns(n, m, q, r, symbol_basis, vars);
    const int rows = cols.empty() ? 0 : static_cast<int>(cols[0].size());
    return source - rank_of_columns(cols, rows);
}

// Fiber dimensions, at one base point, of the three rows of the first
// Spencer-style resolution built from the equation: the subcomplex generated
// by the equation, the full jet-space complex, and the quotient complex.
struct DimensionDiagram {
    int n = 0, order = 0;
    int equation_dim = 0;  // fiber dimension of the equation subbundle
    int symbol_next = 0;   // fiber dimension of the once-prolonged symbol
    std::vector<int> equation_row, jet_row, quotient_row;  // r = 0..n

    friend bool operator==(const DimensionDiagram& a, const DimensionDiagram& b) {
        return a.n == b.n && a.order == b.order && a.equation_dim == b.equation_dim &&
               a.symbol_next == b.symbol_next && a.equation_row == b.equation_row &&
               a.jet_row == b.jet_row && a.quotient_row == b.quotient_row;
    }
    friend bool operator!=(const DimensionDiagram& a, const DimensionDiagram& b) {
        return !(a == b);
    }
};

inline DimensionDiagram sequence_dims(const LinearSystem& sys, const std::vector<Rat>& point) {
    const int n = sys.n(), m = sys.m(), q = sys.order();
    const Vars& vars = sys.vars();
    ValueSpace vsJ = ValueSpace::jet(n, m, q);
    ValueSpace vsS1 = ValueSpace::symbols(n, m, q + 1);
    ValueSpace vsS0 = ValueSpace::symbols(n, m, q);
    const int dimJ = vsJ.dim();

    auto Rbasis = equation_matrix(sys, point).nullspace();
    const int dimR = static_cast<int>(Rbasis.size());

    auto gbasis = symbol_matrix(prolong(sys, 1), point).nullspace();

    std::vector<std::vector<Rat>> full;
    for (int i = 0; i < vsS1.dim(); ++i) {
        std::vector<Rat> e(vsS1.dim(), Rat(0));
        e[i] = Rat(1);
        full.push_back(std::move(e));
    }

    DimensionDiagram d;
    d.n = n;
    d.order = q;
    d.equation_dim = dimR;
    d.symbol_next = static_cast<int>(gbasis.size());
    for (int r = 0; r <= n; ++r) {
        const auto tuples = index_tuples(n, r);
        const int T = static_cast<int>(tuples.size());
        const int sym_rows = vsS0.dim() * T;

        int rank_g = rank_of_columns(delta_image_columns(n, m, q + 1, r - 1, gbasis, vars),
                                     sym_rows);
        d.equation_row.push_back(T * dimR - rank_g);

        auto image_cols = delta_image_columns(n, m, q + 1, r - 1, full, vars);
        d.jet_row.push_back(T * dimJ - rank_of_columns(image_cols, sym_rows));

        // Third row: the table convention makes each column exact, so the
        // quotient fiber dimension is the difference of the two rows above.
        d.quotient_row.push_back(d.jet_row.back() - d.equation_row.back());
    }
    return d;
}

// Dimension, per form degree r, of wedge^r (x) J_q modulo the span of
// wedge^r (x) R_q together with the image of the series differential on
// degree-(r-1) forms with full order-(q+1) symbol values.  This agrees with
// the diagram's quotient row exactly when no closed cochain valued in the
// order-q symbol of the system escapes the image of the prolonged symbol;
// the gap at each degree is the symbol's closed-cochain count (its
// delta-cohomology, since here the prolonged symbol contributes separately
// to the row above).
inline std::vector<int> span_quotient_row(const LinearSystem& sys,
                                          const std::vector<Rat>& point) {
    const int n = sys.n(), m = sys.m(), q = sys.order();
    const Vars& vars = sys.vars();
    ValueSpace vsJ = ValueSpace::jet(n, m, q);
    ValueSpace vsS0 = ValueSpace::symbols(n, m, q);
    const int dimJ = vsJ.dim();

    auto Rbasis = equation_matrix(sys, point).nullspace();

    std::vector<std::vector<Rat>> full;
    for (int i = 0; i < ValueSpace::symbols(n, m, q + 1).dim(); ++i) {
        std::vector<Rat> e(ValueSpace::symbols(n, m, q + 1).dim(), Rat(0));
        e[i] = Rat(1);
        full.push_back(std::move(e));
    }

    std::vector<int> embed(vsS0.dim());
    for (int s = 0; s < vsS0.dim(); ++s) {
        auto [k, mu] = vsS0.unflat(s);
        embed[s] = vsJ.flat(k, mu);
    }

    std::vector<int> row;
    for (int r = 0; r <= n; ++r) {
        const int T = static_cast<int>(index_tuples(n, r).size());
        auto image_cols = delta_image_columns(n, m, q + 1, r - 1, full, vars);
        std::vector<std::vector<Rat>> cols;
        for (int t = 0; t < T; ++t)
            for (const auto& v : Rbasis) {
                std::vector<Rat> col(static_cast<std::size_t>(dimJ) * T, Rat(0));
                for (int u = 0; u < dimJ; ++u) col[static_cast<std::size_t>(u) * T + t] = v[u];
                cols.push_back(std::move(col));
            }
        for (const auto& c : image_cols) {
            std::vector<Rat> col(static_cast<std::size_t>(dimJ) * T, Rat(0));
            for (int s = 0; s < vsS0.dim(); ++s)
                for (int t = 0; t < T; ++t)
                    col[static_cast<std::size_t>(embed[s]) * T + t] =
                        c[static_cast<std::size_t>(s) * T + t];
            cols.push_back(std::move(col));
        }
        row.push_back(T * dimJ - rank_of_columns(cols, dimJ * T));
    }
    return row;
}

// The diagram recomputed at several sampled points; disagreement between
// points means the system's ranks are unstable on the sampled locus.
inline DimensionDiagram stable_sequence_dims(const LinearSystem& sys, int npoints = 2,
                                             std::uint64_t seed = 0xd1a6) {
    auto pts = system_sample_points(sys, npoints, seed);
    std::optional<DimensionDiagram> first;
    for (const auto& pt : pts) {
        DimensionDiagram d = sequence_dims(sys, pt);
        if (!first)
            first = std::move(d);
        else if (d != *first)
            throw std::runtime_error("rank instability: diagram differs between sample points");
    }
    return *first;
}

// ---- bracket closure -----------------------------------------------------

struct ClosureViolation {
    int a = 0, b = 0;   // indices into the kernel basis
    int equation = 0;   // index of the violated equation
    RatFn residual;
};

struct ClosureReport {
    bool closed = true;
    std::vector<JetSection> basis;  // spanning sections of the kernel over the base functions
    std::vector<ClosureViolation> violations;
};

// Checks whether the kernel of the system, spanned over the function field
// of the base, is closed under the differential bracket of jet sections.
inline ClosureReport bracket_closure(const LinearSystem& sys) {
    if (sys.m() != sys.n())
        throw std::invalid_argument("bracket closure needs vector-field jets (m == n)");
    auto null = equation_matrix_fn(sys).nullspace();
    ClosureReport rep;
    for (const auto& v : null)
        rep.basis.push_back(section_from_coordinates(v, sys.n(), sys.m(), sys.order(), sys.vars()));
    const int nb = static_cast<int>(rep.basis.size());
    for (int a = 0; a < nb; ++a)
        for (int b = a + 1; b < nb; ++b) {
            JetSection br = differential_bracket(rep.basis[a], rep.basis[b]);
            for (int e = 0; e < static_cast<int>(sys.equations().size()); ++e) {
                RatFn res = sys.equations()[e].apply(br);
                if (!res.is_zero()) {
                    rep.closed = false;
                    rep.violations.push_back({a, b, e, res});
                }
            }
        }
    return rep;
}

inline bool is_algebroid(const LinearSystem& sys) { return bracket_closure(sys).closed; }

}  // namespace jetcal
