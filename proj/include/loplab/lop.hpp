#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "loplab/error.hpp"
#include "loplab/linalg.hpp"
#include "loplab/pcm.hpp"

namespace loplab {

/// Relative slack under which two float weights count as equal.
inline constexpr double tie_epsilon = 1e-9;

struct LopReport {
    std::vector<Edge> violations;  ///< edges i -> j with w_i < w_j
    std::vector<std::vector<std::size_t>> ranking;  ///< tie groups, best first
    bool satisfied = true;
};

/// -1, 0 or +1 for a < b, a ~ b, a > b under the relative tie slack.
inline int compare_weights(double a, double b) {
    if (std::abs(a - b) <= tie_epsilon * std::max(a, b)) return 0;
    return a < b ? -1 : 1;
}

inline int compare_weights(const Rational& a, const Rational& b) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
}

namespace detail {

template <class Vec>
std::vector<std::vector<std::size_t>> tie_groups(const Vec& w, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[b] < w[a]; });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t v : order) {
        if (groups.empty() || compare_weights(w[groups.back().front()], w[v]) != 0) groups.emplace_back();
        groups.back().push_back(v);
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return groups;
}

template <class Vec>
LopReport check_lop_impl(const DagPattern& pattern, const Vec& w, std::size_t size) {
    if (size != pattern.size()) throw DimensionMismatch("check_lop: weight vector size differs from pattern size");
    LopReport report;
    for (const Edge& e : pattern.edges()) {
        if (compare_weights(w[e.from], w[e.to]) < 0) report.violations.push_back(e);
    }
    report.satisfied = report.violations.empty();
    report.ranking = tie_groups(w, size);
    return report;
}

}  // namespace detail

inline LopReport check_lop(const DagPattern& pattern, const Weights& w) { return detail::check_lop_impl(pattern, w, w.size()); }

/// Exact check on LLSM coefficients; there is no tie slack.
inline LopReport check_lop(const DagPattern& pattern, const LogWeights& c) { return detail::check_lop_impl(pattern, c, c.size()); }

/// Pairs i < j whose order relation (>, ~, <) differs between the vectors.
inline std::vector<Edge> compare_rankings(const Weights& w1, const Weights& w2) {
    if (w1.size() != w2.size()) throw DimensionMismatch("compare_rankings: weight vectors differ in size");
    std::vector<Edge> flips;
    for (std::size_t i = 0; i < w1.size(); ++i) {
        for (std::size_t j = i + 1; j < w1.size(); ++j) {
            if (compare_weights(w1[i], w1[j]) != compare_weights(w2[i], w2[j])) flips.push_back({i, j});
        }
    }
    return flips;
}

/// min over edges of w_i - w_j; +infinity for an edgeless pattern.
inline double lop_gap(const DagPattern& pattern, const Weights& w) {
    if (w.size() != pattern.size()) throw DimensionMismatch("lop_gap: weight vector size differs from pattern size");
    double gap = std::numeric_limits<double>::infinity();
    for (const Edge& e : pattern.edges()) gap = std::min(gap, w[e.from] - w[e.to]);
    return gap;
}

/// Exact gap in units of log b; nullopt for an edgeless pattern.
inline std::optional<Rational> lop_gap(const DagPattern& pattern, const LogWeights& c) {
    if (c.size() != pattern.size()) throw DimensionMismatch("lop_gap: weight vector size differs from pattern size");
    std::optional<Rational> gap;
    for (const Edge& e : pattern.edges()) {
        Rational d = c[e.from] - c[e.to];
        if (!gap || d < *gap) gap = std::move(d);
    }
    return gap;
}

}  // namespace loplab
