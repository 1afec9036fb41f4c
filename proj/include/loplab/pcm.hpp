#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loplab/error.hpp"
#include "loplab/linalg.hpp"

// Vertices are 0-indexed inside the library. Everything that reaches a user
// (text formats, JSON, DOT) is 1-indexed.

namespace loplab {

/// Directed edge `from -> to`: alternative `from` is preferred to `to`.
struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Number of upper-triangular positions for n alternatives.
constexpr std::size_t position_count(std::size_t n) { return n * (n - 1) / 2; }

/// Row-major index of upper-triangular position (i, j), i < j:
/// (0,1) -> 0, (0,2) -> 1, ..., (0,n-1) -> n-2, (1,2) -> n-1, ...
constexpr std::size_t position_index(std::size_t n, std::size_t i, std::size_t j) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Labeled DAG in topological labeling. Every edge goes from a lower to a
/// higher label, so acyclicity holds by construction.
class DagPattern {
public:
    /// Largest n whose positions fit in a 64-bit identifier.
    static constexpr std::size_t max_id_vertices = 11;

    DagPattern(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        if (n_ < 2) throw Error("a pattern needs at least 2 alternatives");
        std::sort(edges_.begin(), edges_.end());
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const Edge& e = edges_[k];
            if (e.to >= n_) throw Error("edge endpoint out of range");
            if (e.from >= e.to) {
                throw Error("edge " + std::to_string(e.from + 1) + " -> " + std::to_string(e.to + 1) +
                            " is not in topological labeling (requires i < j)");
            }
            if (k > 0 && edges_[k - 1] == e) throw Error("duplicate edge in pattern");
        }
    }

    /// Decodes the canonical bit encoding: bit p set means position p is known.
    static DagPattern from_id(std::size_t n, std::uint64_t id) {
        if (n < 2 || n > max_id_vertices) throw Error("pattern id requires 2 <= n <= 11");
        std::vector<Edge> edges;
        std::size_t p = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j, ++p) {
                if ((id >> p) & 1U) edges.push_back({i, j});
            }
        }
        if (p < 64 && (id >> p) != 0) throw Error("pattern id has bits beyond the position range");
        return DagPattern(n, std::move(edges));
    }

    std::uint64_t id() const {
        if (n_ > max_id_vertices) throw Error("pattern id is only defined for n <= 11");
        std::uint64_t id = 0;
        for (const Edge& e : edges_) id |= std::uint64_t{1} << position_index(n_, e.from, e.to);
        return id;
    }

    std::size_t size() const { return n_; }
    std::span<const Edge> edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }

    bool has_edge(std::size_t from, std::size_t to) const {
        return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
    }

    friend bool operator==(const DagPattern&, const DagPattern&) = default;

private:
    std::size_t n_;
    std::vector<Edge> edges_;
};

class OrdinalPcm {
public:
    OrdinalPcm(DagPattern pattern, double b) : pattern_(std::move(pattern)), b_(b) {
        if (!(b_ > 1.0) || !std::isfinite(b_)) throw Error("preference intensity b must be a finite value > 1");
    }

    const DagPattern& pattern() const { return pattern_; }
    double b() const { return b_; }

private:
    DagPattern pattern_;
    double b_;
};

/// Incomplete positive reciprocal matrix. The stored value below a known
/// position is always the exact floating-point reciprocal of the one above.
class GeneralPcm {
public:
    struct Entry {
        std::size_t row = 0;
        std::size_t col = 0;
        double value = 1.0;
    };

    explicit GeneralPcm(std::size_t n) : n_(n), values_(n * n, 1.0), known_(n * n, 0) {
        if (n_ < 2) throw Error("a pairwise comparison matrix needs at least 2 alternatives");
        for (std::size_t i = 0; i < n_; ++i) known_[i * n_ + i] = 1;
    }

    GeneralPcm(std::size_t n, std::span<const Entry> entries) : GeneralPcm(n) {
        for (const Entry& e : entries) set(e.row, e.col, e.value);
    }

    static GeneralPcm from_dense(const Eigen::MatrixXd& a) {
        if (a.rows() != a.cols()) throw DimensionMismatch("matrix must be square");
        const auto n = static_cast<std::size_t>(a.rows());
        GeneralPcm pcm(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pcm.set(i, j, a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        return pcm;
    }

    std::size_t size() const { return n_; }
    bool known(std::size_t i, std::size_t j) const { return known_[i * n_ + j] != 0; }

    /// Value at a known position; throws on a missing one.
    double value(std::size_t i, std::size_t j) const {
        if (!known(i, j)) throw Error("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is missing");
        return values_[i * n_ + j];
    }

    std::optional<double> at(std::size_t i, std::size_t j) const {
        if (!known(i, j)) return std::nullopt;
        return values_[i * n_ + j];
    }

    /// Copy with (i, j) set to `value` and (j, i) to its reciprocal.
    GeneralPcm with_entry(std::size_t i, std::size_t j, double value) const {
        GeneralPcm copy = *this;
        copy.set(i, j, value);
        return copy;
    }

    /// Copy with the pair (i, j) removed.
    GeneralPcm without_entry(std::size_t i, std::size_t j) const {
        if (i == j) throw Error("diagonal entries cannot be removed");
        GeneralPcm copy = *this;
        copy.known_[i * n_ + j] = 0;
        copy.known_[j * n_ + i] = 0;
        copy.values_[i * n_ + j] = 1.0;
        copy.values_[j * n_ + i] = 1.0;
        return copy;
    }

    std::size_t missing_pairs() const {
        std::size_t missing = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) missing += known(i, j) ? 0 : 1;
        }
        return missing;
    }

    bool is_complete() const { return missing_pairs() == 0; }

    Eigen::MatrixXd to_dense() const {
        if (!is_complete()) throw Error("matrix is incomplete");
        Eigen::MatrixXd a(n_, n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values_[i * n_ + j];
        }
        return a;
    }

    friend bool operator==(const GeneralPcm&, const GeneralPcm&) = default;

private:
    void set(std::size_t i, std::size_t j, double value) {
        if (i >= n_ || j >= n_) throw Error("entry index out of range");
        if (!(value > 0.0) || !std::isfinite(value)) throw Error("comparison values must be finite and positive");
        if (i == j) {
            if (value != 1.0) throw Error("diagonal entries must be 1");
            return;
        }
        if (i > j) {
            std::swap(i, j);
            value = 1.0 / value;
        }
        values_[i * n_ + j] = value;
        values_[j * n_ + i] = 1.0 / value;
        known_[i * n_ + j] = 1;
        known_[j * n_ + i] = 1;
    }

    std::size_t n_;
    std::vector<double> values_;
    std::vector<unsigned char> known_;
};

/// Positive weight vector normalized to unit sum.
class Weights {
public:
    static constexpr double sum_tolerance = 1e-12;

    explicit Weights(std::vector<double> w) : w_(std::move(w)) {
        if (w_.empty()) throw Error("weight vector is empty");
        double sum = 0.0;
        for (double x : w_) {
            if (!(x > 0.0) || !std::isfinite(x)) throw Error("weights must be finite and strictly positive");
            sum += x;
        }
        if (std::abs(sum - 1.0) > sum_tolerance) throw Error("weights must sum to 1");
    }

    static Weights normalized(std::vector<double> raw) {
        double sum = 0.0;
        for (double x : raw) sum += x;
        for (double& x : raw) x /= sum;
        return Weights(std::move(raw));
    }

    /// exp(log_w) normalized; shifts by the maximum first to avoid overflow.
    static Weights from_logs(std::span<const double> log_w) {
        const double top = *std::max_element(log_w.begin(), log_w.end());
        std::vector<double> raw(log_w.size());
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::exp(log_w[i] - top);
        return normalized(std::move(raw));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const { return w_; }

private:
    std::vector<double> w_;
};

/// Exact LLSM log-weights of an ordinal matrix: y_i = coeff_i * log b with
/// the coefficients summing to zero.
class LogWeights {
public:
    explicit LogWeights(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) throw Error("coefficient vector is empty");
        Rational sum = 0;
        for (const Rational& x : c_) sum += x;
        if (sum != 0) throw Error("log-weight coefficients must sum to zero");
    }

    std::size_t size() const { return c_.size(); }
    const Rational& operator[](std::size_t i) const { return c_[i]; }
    std::span<const Rational> coefficients() const { return c_; }

    Weights to_weights(double b) const {
        const double log_b = std::log(b);
        std::vector<double> logs(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) logs[i] = c_[i].convert_to<double>() * log_b;
        return Weights::from_logs(logs);
    }

    friend bool operator==(const LogWeights&, const LogWeights&) = default;

private:
    std::vector<Rational> c_;
};

inline GeneralPcm realize(const OrdinalPcm& pcm) {
    std::vector<GeneralPcm::Entry> entries;
    entries.reserve(pcm.pattern().edge_count());
    for (const Edge& e : pcm.pattern().edges()) entries.push_back({e.from, e.to, pcm.b()});
    return GeneralPcm(pcm.pattern().size(), entries);
}

inline bool is_weakly_connected(const GeneralPcm& pcm) {
    const std::size_t n = pcm.size();
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t u = 0; u < n; ++u) {
            if (!seen[u] && u != v && pcm.known(v, u)) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == n;
}

inline bool is_weakly_connected(const DagPattern& pattern) {
    return is_weakly_connected(realize(OrdinalPcm(pattern, 2.0)));
}

namespace detail {

inline bool near(double x, double target) { return std::abs(x - target) <= 1e-9 * target; }

}  // namespace detail

/// Permutation `order` such that c_ij = a_{order[i], order[j]} has every known
/// above-diagonal entry equal to b, or nullopt when the preference digraph has
/// a cycle. Ties in the topological sort go to the smallest label, so an
/// already sorted matrix yields the identity.
inline std::optional<std::vector<std::size_t>> linear_order_permutation(const GeneralPcm& pcm, double b) {
    if (!(b > 1.0)) throw Error("preference intensity b must be > 1");
    const std::size_t n = pcm.size();
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !pcm.known(i, j)) continue;
            const double a = pcm.value(i, j);
            if (detail::near(a, b)) {
                ++indegree[j];
            } else if (!detail::near(a, 1.0 / b)) {
                throw Error("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                            ") is neither b nor 1/b; not an ordinal matrix for this b");
            }
        }
    }
    std::vector<std::size_t> order;
    std::vector<char> done(n, 0);
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!done[v] && indegree[v] == 0) {
                next = v;
                break;
            }
        }
        if (next == n) return std::nullopt;
        done[next] = 1;
        order.push_back(next);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != next && pcm.known(next, j) && detail::near(pcm.value(next, j), b)) --indegree[j];
        }
    }
    return order;
}

/// The intensity b of a matrix whose known off-diagonal entries all lie in
/// {b, 1/b} for one b > 1; nullopt otherwise (including when nothing is known).
inline std::optional<double> ordinal_intensity(const GeneralPcm& pcm) {
    double b = 0.0;
    const std::size_t n = pcm.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (pcm.known(i, j)) b = std::max(b, std::max(pcm.value(i, j), pcm.value(j, i)));
        }
    }
    if (!(b > 1.0)) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!pcm.known(i, j)) continue;
            const double a = pcm.value(i, j);
            if (!detail::near(a, b) && !detail::near(a, 1.0 / b)) return std::nullopt;
        }
    }
    return b;
}

/// Pattern of an ordinal matrix relabeled into topological order, together
/// with the permutation used (order[k] = original vertex placed at k).
struct SortedPattern {
    DagPattern pattern;
    std::vector<std::size_t> order;
};

inline std::optional<SortedPattern> sorted_pattern(const GeneralPcm& pcm, double b) {
    auto order = linear_order_permutation(pcm, b);
    if (!order) return std::nullopt;
    const std::size_t n = pcm.size();
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (pcm.known((*order)[i], (*order)[j])) edges.push_back({i, j});
        }
    }
    return SortedPattern{DagPattern(n, std::move(edges)), std::move(*order)};
}

inline GeneralPcm elementwise_power(const GeneralPcm& pcm, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error("exponent h must be finite and > 0");
    const std::size_t n = pcm.size();
    std::vector<GeneralPcm::Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (pcm.known(i, j)) entries.push_back({i, j, std::pow(pcm.value(i, j), h)});
        }
    }
    return GeneralPcm(n, entries);
}

}  // namespace loplab
