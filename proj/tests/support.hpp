#pragma once

// Independent oracles and random generators shared by the unit tests and the
// acceptance runner. Nothing here calls the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loplab/loplab.hpp"

namespace loplab::testing {

inline std::string data_path(const std::string& name) { return std::string(LOPLAB_DATA_DIR) + "/" + name; }

// ----- connectivity -------------------------------------------------------

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

/// Decodes an id by walking the upper triangle row by row.
inline std::vector<Edge> oracle_edges(std::size_t n, std::uint64_t id) {
    std::vector<Edge> out;
    std::size_t bit = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++bit) {
            if ((id >> bit) & 1U) out.push_back({i, j});
        }
    }
    return out;
}

inline bool oracle_connected(std::size_t n, const std::vector<Edge>& edges) {
    UnionFind uf(n);
    for (const Edge& e : edges) uf.unite(e.from, e.to);
    for (std::size_t v = 1; v < n; ++v) {
        if (uf.find(v) != uf.find(0)) return false;
    }
    return true;
}

// ----- random patterns ----------------------------------------------------

inline DagPattern random_connected_pattern(std::mt19937_64& rng, std::size_t n) {
    const std::size_t positions = n * (n - 1) / 2;
    std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << positions) - 1);
    for (;;) {
        const std::uint64_t id = pick(rng);
        auto edges = oracle_edges(n, id);
        if (oracle_connected(n, edges)) return DagPattern(n, std::move(edges));
    }
}

/// Connected pattern whose size is drawn uniformly from [lo, hi].
inline DagPattern random_connected_pattern(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    std::uniform_int_distribution<std::size_t> size(lo, hi);
    return random_connected_pattern(rng, size(rng));
}

/// Random incomplete reciprocal matrix on a connected comparison graph, with
/// entries log-uniform in [1/9, 9].
inline GeneralPcm random_general_pcm(std::mt19937_64& rng, std::size_t n) {
    const DagPattern graph = random_connected_pattern(rng, n);
    std::uniform_real_distribution<double> logv(-std::log(9.0), std::log(9.0));
    std::vector<GeneralPcm::Entry> entries;
    for (const Edge& e : graph.edges()) entries.push_back({e.from, e.to, std::exp(logv(rng))});
    return GeneralPcm(n, entries);
}

// ----- one-dimensional minimization ---------------------------------------

inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

// ----- LLSM oracle --------------------------------------------------------

/// Sum over known ordered pairs of (log a_ij - y_i + y_j)^2, written out from
/// the definition.
inline double oracle_llsm_objective(const GeneralPcm& pcm, const std::vector<double>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < pcm.size(); ++i) {
        for (std::size_t j = 0; j < pcm.size(); ++j) {
            if (i == j || !pcm.known(i, j)) continue;
            const double r = std::log(pcm.value(i, j)) - y[i] + y[j];
            total += r * r;
        }
    }
    return total;
}

/// Black-box minimizer: cyclic coordinate descent with golden-section line
/// searches, then centering. Returns mean-zero log-weights.
inline std::vector<double> oracle_llsm_log_weights(const GeneralPcm& pcm) {
    const std::size_t n = pcm.size();
    std::vector<double> y(n, 0.0);
    for (int sweep = 0; sweep < 2000; ++sweep) {
        double moved = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double before = y[k];
            y[k] = golden_section(
                [&](double v) {
                    std::vector<double> t = y;
                    t[k] = v;
                    return oracle_llsm_objective(pcm, t);
                },
                before - 10.0, before + 10.0, 1e-11);
            moved = std::max(moved, std::abs(y[k] - before));
        }
        if (moved < 1e-11) break;
    }
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    for (double& v : y) v -= mean;
    return y;
}

// ----- EM oracle ----------------------------------------------------------

inline double oracle_lambda_max(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    double best = -1.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) best = std::max(best, solver.eigenvalues()[k].real());
    return best;
}

struct OneGapOracle {
    double x = 0.0;
    double lambda_max = 0.0;
};

/// Minimizes lambda_max over the value x at a single missing pair (i, j) by
/// golden section on log x.
inline OneGapOracle oracle_one_gap(const GeneralPcm& pcm, std::size_t i, std::size_t j) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(pcm.size()), static_cast<Eigen::Index>(pcm.size()));
    for (std::size_t r = 0; r < pcm.size(); ++r) {
        for (std::size_t c = 0; c < pcm.size(); ++c) {
            if (pcm.known(r, c)) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pcm.value(r, c);
        }
    }
    auto lambda_at = [&](double t) {
        Eigen::MatrixXd m = a;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(t);
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::exp(-t);
        return oracle_lambda_max(m);
    };
    const double t = golden_section(lambda_at, -12.0, 12.0, 1e-10);
    return {std::exp(t), lambda_at(t)};
}

// ----- linear orders ------------------------------------------------------

/// True if some permutation puts every "b" entry above the diagonal.
inline bool oracle_has_linear_order(const GeneralPcm& pcm, double b) {
    const std::size_t n = pcm.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
        bool ok = true;
        for (std::size_t p = 0; p < n && ok; ++p) {
            for (std::size_t q = p + 1; q < n && ok; ++q) {
                if (pcm.known(perm[p], perm[q]) && std::abs(pcm.value(perm[p], perm[q]) - b) > 1e-9 * b) ok = false;
            }
        }
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

/// Smallest id over all relabelings that keep every edge pointing upward.
inline std::uint64_t oracle_canonical_id(const DagPattern& pattern) {
    const std::size_t n = pattern.size();
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), std::size_t{0});
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    do {
        std::vector<Edge> edges;
        bool upward = true;
        for (const Edge& e : pattern.edges()) {
            if (label[e.from] > label[e.to]) {
                upward = false;
                break;
            }
            edges.push_back({label[e.from], label[e.to]});
        }
        if (upward) best = std::min(best, DagPattern(n, std::move(edges)).id());
    } while (std::next_permutation(label.begin(), label.end()));
    return best;
}

inline std::string read_data(const std::string& name) {
    std::ifstream in(data_path(name));
    if (!in) throw Error("missing data file " + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline DagPattern read_pattern_file(const std::string& name) { return parse_pattern(read_data(name)); }

}  // namespace loplab::testing
