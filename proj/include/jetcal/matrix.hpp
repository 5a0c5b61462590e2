#pragma once

#include "rational.hpp"
#include "rational_function.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jetcal {

// Dense matrix over an exact field (Rat or RatFn). The element type carries
// its own context, so the constructor takes zero/one exemplars instead of
// default-constructing values.
template <typename T>
class Matrix {
public:
    Matrix(int rows, int cols, T zero, T one)
        : rows_(rows), cols_(cols), zero_(std::move(zero)), one_(std::move(one)),
          d_(static_cast<std::size_t>(rows) * cols, zero_) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const T& zero() const { return zero_; }
    const T& one() const { return one_; }

    T& at(int r, int c) { return d_[idx(r, c)]; }
    const T& at(int r, int c) const { return d_[idx(r, c)]; }

    static Matrix identity(int n, const T& zero, const T& one) {
        Matrix m(n, n, zero, one);
        for (int i = 0; i < n; ++i) m.at(i, i) = one;
        return m;
    }

    Matrix transpose() const {
        Matrix m(cols_, rows_, zero_, one_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) m.at(c, r) = at(r, c);
        return m;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
        Matrix m(a.rows_, b.cols_, a.zero_, a.one_);
        for (int r = 0; r < a.rows_; ++r)
            for (int k = 0; k < a.cols_; ++k) {
                const T& av = a.at(r, k);
                if (av.is_zero()) continue;
                for (int c = 0; c < b.cols_; ++c) {
                    const T& bv = b.at(k, c);
                    if (bv.is_zero()) continue;
                    m.at(r, c) += av * bv;
                }
            }
        return m;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        a.check_shape(b);
        Matrix m = a;
        for (std::size_t i = 0; i < m.d_.size(); ++i) m.d_[i] += b.d_[i];
        return m;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        a.check_shape(b);
        Matrix m = a;
        for (std::size_t i = 0; i < m.d_.size(); ++i) m.d_[i] -= b.d_[i];
        return m;
    }

    bool is_zero() const {
        for (const T& v : d_)
            if (!v.is_zero()) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && d_ == o.d_;
    }

    // Reduced row echelon form in place; returns pivot column list.
    std::vector<int> rref() {
        std::vector<int> pivots;
        int r = 0;
        for (int c = 0; c < cols_ && r < rows_; ++c) {
            int pr = best_pivot(r, c);
            if (pr < 0) continue;
            swap_rows(r, pr);
            T inv = one_ / at(r, c);
            for (int j = c; j < cols_; ++j) at(r, j) = at(r, j) * inv;
            for (int i = 0; i < rows_; ++i) {
                if (i == r || at(i, c).is_zero()) continue;
                T f = at(i, c);
                for (int j = c; j < cols_; ++j) at(i, j) -= f * at(r, j);
            }
            pivots.push_back(c);
            ++r;
        }
        return pivots;
    }

    int rank() const {
        Matrix m = *this;
        return static_cast<int>(m.rref().size());
    }

    // Basis of the right kernel {v : M v = 0}; vectors of length cols().
    std::vector<std::vector<T>> nullspace() const {
        Matrix m = *this;
        std::vector<int> pivots = m.rref();
        std::vector<bool> is_pivot(cols_, false);
        for (int c : pivots) is_pivot[c] = true;
        std::vector<std::vector<T>> basis;
        for (int f = 0; f < cols_; ++f) {
            if (is_pivot[f]) continue;
            std::vector<T> v(cols_, zero_);
            v[f] = one_;
            for (std::size_t pi = 0; pi < pivots.size(); ++pi)
                v[pivots[pi]] = zero_ - m.at(static_cast<int>(pi), f);
            basis.push_back(std::move(v));
        }
        return basis;
    }

    // One solution of M x = b, or nullopt when inconsistent.
    std::optional<std::vector<T>> solve(const std::vector<T>& b) const {
        if (static_cast<int>(b.size()) != rows_) throw std::invalid_argument("rhs length mismatch");
        Matrix aug(rows_, cols_ + 1, zero_, one_);
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) aug.at(r, c) = at(r, c);
            aug.at(r, cols_) = b[r];
        }
        std::vector<int> pivots = aug.rref();
        if (!pivots.empty() && pivots.back() == cols_) return std::nullopt;  // 0 = 1 row
        std::vector<T> x(cols_, zero_);
        for (std::size_t pi = 0; pi < pivots.size(); ++pi)
            x[pivots[pi]] = aug.at(static_cast<int>(pi), cols_);
        return x;
    }

    // Gauss-Jordan inverse; throws on singular input.
    Matrix inverse() const {
        if (rows_ != cols_) throw std::invalid_argument("inverse of non-square matrix");
        Matrix aug(rows_, 2 * cols_, zero_, one_);
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) aug.at(r, c) = at(r, c);
            aug.at(r, cols_ + r) = one_;
        }
        std::vector<int> pivots = aug.rref();
        if (static_cast<int>(pivots.size()) != rows_)
            throw std::domain_error("singular matrix");
        for (int i = 0; i < rows_; ++i)
            if (pivots[i] != i) throw std::domain_error("singular matrix");
        Matrix inv(rows_, cols_, zero_, one_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) inv.at(r, c) = aug.at(r, cols_ + c);
        return inv;
    }

    T det() const {
        if (rows_ != cols_) throw std::invalid_argument("determinant of non-square matrix");
        Matrix m = *this;
        T d = one_;
        int r = 0;
        for (int c = 0; c < cols_ && r < rows_; ++c) {
            int pr = m.best_pivot(r, c);
            if (pr < 0) return zero_;
            if (pr != r) {
                m.swap_rows(r, pr);
                d = zero_ - d;
            }
            d = d * m.at(r, c);
            T inv = one_ / m.at(r, c);
            for (int i = r + 1; i < rows_; ++i) {
                if (m.at(i, c).is_zero()) continue;
                T f = m.at(i, c) * inv;
                for (int j = c; j < cols_; ++j) m.at(i, j) -= f * m.at(r, j);
            }
            ++r;
        }
        return r == rows_ ? d : zero_;
    }

private:
    std::size_t idx(int r, int c) const {
        if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("matrix index");
        return static_cast<std::size_t>(r) * cols_ + c;
    }

    void check_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    }

    void swap_rows(int a, int b) {
        if (a == b) return;
        for (int c = 0; c < cols_; ++c) std::swap(at(a, c), at(b, c));
    }

    // Smallest nonzero entry by a cheap size heuristic keeps exact
    // elimination from blowing up on rational-function matrices.
    int best_pivot(int from_row, int col) const {
        int best = -1;
        std::size_t best_score = 0;
        for (int r = from_row; r < rows_; ++r) {
            const T& v = at(r, col);
            if (v.is_zero()) continue;
            std::size_t score = pivot_score(v);
            if (best < 0 || score < best_score) {
                best = r;
                best_score = score;
                if (score == 0) break;
            }
        }
        return best;
    }

    static std::size_t pivot_score(const Rat& v) {
        return is_one(v) || v == -1 ? 0 : rat_num(v).str().size() + rat_den(v).str().size();
    }
    static std::size_t pivot_score(const RatFn& v) {
        if (v.is_constant()) return 0;
        return v.num().terms().size() + v.den().terms().size();
    }

    int rows_, cols_;
    T zero_, one_;
    std::vector<T> d_;
};

inline Matrix<Rat> rat_matrix(int rows, int cols) {
    return Matrix<Rat>(rows, cols, Rat(0), Rat(1));
}
inline Matrix<RatFn> ratfn_matrix(int rows, int cols, const Vars& vars) {
    return Matrix<RatFn>(rows, cols, RatFn::zero(vars), RatFn::constant(vars, Rat(1)));
}

// Fraction-free rank for large rational matrices: rows are scaled to
// integers, then Bareiss elimination runs over BigInt only.
inline int rank_bareiss(const Matrix<Rat>& m) {
    const int rows = m.rows(), cols = m.cols();
    std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
    for (int r = 0; r < rows; ++r) {
        BigInt l = 1;
        for (int c = 0; c < cols; ++c) l = int_lcm(l, rat_den(m.at(r, c)));
        for (int c = 0; c < cols; ++c) {
            const Rat v = m.at(r, c) * Rat(l);
            a[r][c] = rat_num(v);
        }
    }
    BigInt prev = 1;
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pr = -1;
        for (int r = rank; r < rows; ++r) {
            if (a[r][c] == 0) continue;
            if (pr < 0 || boost::multiprecision::abs(a[r][c]) < boost::multiprecision::abs(a[pr][c]))
                pr = r;
        }
        if (pr < 0) continue;
        std::swap(a[rank], a[pr]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int j = c + 1; j < cols; ++j)
                a[r][j] = (a[rank][c] * a[r][j] - a[r][c] * a[rank][j]) / prev;
            a[r][c] = 0;
        }
        prev = a[rank][c];
        ++rank;
    }
    return rank;
}

}  // namespace jetcal
