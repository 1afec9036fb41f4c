#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "loplab/error.hpp"

namespace loplab {

using Rational = boost::multiprecision::cpp_rational;

/// Row-major dense matrix over an arbitrary field (double or Rational).
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

namespace detail {

template <class T>
T abs_value(const T& x) {
    return x < T(0) ? T(-x) : x;
}

}  // namespace detail

/// Solves a x = rhs by Gaussian elimination with partial pivoting on the
/// absolute value. Zero multipliers are skipped, which keeps banded systems
/// close to linear cost per pivot. Throws Error when a is singular.
template <class T>
std::vector<T> solve_linear_system(DenseMatrix<T> a, std::vector<T> rhs) {
    const std::size_t n = a.rows();
    if (a.cols() != n || rhs.size() != n) throw DimensionMismatch("solve_linear_system: shape mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        T best = detail::abs_value(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            T cand = detail::abs_value(a(r, col));
            if (best < cand) {
                best = std::move(cand);
                pivot = r;
            }
        }
        if (best == T(0)) throw Error("solve_linear_system: singular matrix");
        a.swap_rows(col, pivot);
        std::swap(rhs[col], rhs[pivot]);

        for (std::size_t r = col + 1; r < n; ++r) {
            if (a(r, col) == T(0)) continue;
            const T factor = a(r, col) / a(col, col);
            a(r, col) = T(0);
            for (std::size_t c = col + 1; c < n; ++c) {
                if (a(col, c) != T(0)) a(r, c) -= factor * a(col, c);
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    std::vector<T> x(n, T(0));
    for (std::size_t i = n; i-- > 0;) {
        T acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            if (a(i, c) != T(0)) acc -= a(i, c) * x[c];
        }
        x[i] = acc / a(i, i);
    }
    return x;
}

}  // namespace loplab
