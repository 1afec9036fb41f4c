#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "loplab/error.hpp"
#include "loplab/linalg.hpp"
#include "loplab/pcm.hpp"

namespace loplab {

/// Normal equations of the incomplete LLSM problem, L y = r.
///
/// L is the Laplacian of the undirected comparison graph (degree on the
/// diagonal, -1 for every known pair) and r_i sums log a_ij over the known
/// comparisons of row i. L depends only on where comparisons are known, so
/// for an ordinal matrix r is an integer multiple of log b.
template <class T>
struct LaplacianSystem {
    DenseMatrix<T> laplacian;
    std::vector<T> rhs;

    std::size_t size() const { return rhs.size(); }
};

/// Ordinal system in units of log b: r_i = out-degree - in-degree.
inline LaplacianSystem<Rational> laplacian_system(const DagPattern& pattern) {
    const std::size_t n = pattern.size();
    LaplacianSystem<Rational> sys{DenseMatrix<Rational>(n, n), std::vector<Rational>(n, Rational(0))};
    for (const Edge& e : pattern.edges()) {
        sys.laplacian(e.from, e.from) += 1;
        sys.laplacian(e.to, e.to) += 1;
        sys.laplacian(e.from, e.to) = -1;
        sys.laplacian(e.to, e.from) = -1;
        sys.rhs[e.from] += 1;
        sys.rhs[e.to] -= 1;
    }
    return sys;
}

inline LaplacianSystem<double> laplacian_system(const GeneralPcm& pcm) {
    const std::size_t n = pcm.size();
    LaplacianSystem<double> sys{DenseMatrix<double>(n, n), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !pcm.known(i, j)) continue;
            sys.laplacian(i, i) += 1.0;
            sys.laplacian(i, j) = -1.0;
            sys.rhs[i] += std::log(pcm.value(i, j));
        }
    }
    return sys;
}

namespace detail {

template <class T>
bool residual_ok(const T& lhs, const T& rhs) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs));
    } else {
        return lhs == rhs;
    }
}

}  // namespace detail

/// Mean-zero solution of a connected Laplacian system. The last equation is
/// replaced by sum(y) = 0, which makes the matrix nonsingular; the dropped
/// equation is checked against the solution afterwards.
template <class T>
std::vector<T> solve_mean_zero(const LaplacianSystem<T>& sys) {
    const std::size_t n = sys.size();
    DenseMatrix<T> a = sys.laplacian;
    std::vector<T> rhs = sys.rhs;
    for (std::size_t c = 0; c < n; ++c) a(n - 1, c) = T(1);
    rhs[n - 1] = T(0);
    std::vector<T> y = solve_linear_system(std::move(a), std::move(rhs));

    T dropped = T(0);
    for (std::size_t c = 0; c < n; ++c) dropped += sys.laplacian(n - 1, c) * y[c];
    if (!detail::residual_ok(dropped, sys.rhs[n - 1])) throw Error("LLSM: eliminated equation is not satisfied");
    return y;
}

/// Exact LLSM coefficients c with y = c log b for every ordinal matrix of
/// the pattern, independent of b.
inline LogWeights llsm_exact(const DagPattern& pattern) {
    if (!is_weakly_connected(pattern)) throw NotConnected();
    return LogWeights(solve_mean_zero(laplacian_system(pattern)));
}

/// Mean-zero LLSM log-weights in floating point.
inline std::vector<double> llsm_log_weights(const GeneralPcm& pcm) {
    if (!is_weakly_connected(pcm)) throw NotConnected();
    return solve_mean_zero(laplacian_system(pcm));
}

inline Weights llsm_float(const GeneralPcm& pcm) { return Weights::from_logs(llsm_log_weights(pcm)); }

/// sum over all ordered known pairs i != j of (log a_ij - log(w_i / w_j))^2.
/// Each unordered pair contributes twice, as in the double sum over i and j.
inline double llsm_objective(const GeneralPcm& pcm, std::span<const double> w) {
    const std::size_t n = pcm.size();
    if (w.size() != n) throw DimensionMismatch("llsm_objective: weight vector has wrong size");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !pcm.known(i, j)) continue;
            const double r = std::log(pcm.value(i, j)) - std::log(w[i] / w[j]);
            total += r * r;
        }
    }
    return total;
}

inline double llsm_objective(const GeneralPcm& pcm, const Weights& w) { return llsm_objective(pcm, w.values()); }

}  // namespace loplab
