#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <limits>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "loplab/em.hpp"
#include "loplab/error.hpp"
#include "loplab/linalg.hpp"
#include "loplab/llsm.hpp"
#include "loplab/lop.hpp"
#include "loplab/pcm.hpp"

namespace loplab {

// ---------------------------------------------------------------------------
// Pattern enumeration over canonical ids
// ---------------------------------------------------------------------------

/// Inclusive range of known-comparison counts.
struct EdgeCountRange {
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Undirected adjacency bitmasks of the pattern with the given id.
inline std::array<std::uint16_t, DagPattern::max_id_vertices> adjacency_masks(std::size_t n, std::uint64_t id) {
    std::array<std::uint16_t, DagPattern::max_id_vertices> adj{};
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            if ((id >> p) & 1U) {
                adj[i] = static_cast<std::uint16_t>(adj[i] | (1U << j));
                adj[j] = static_cast<std::uint16_t>(adj[j] | (1U << i));
            }
        }
    }
    return adj;
}

inline bool id_is_connected(std::size_t n, std::uint64_t id) {
    const auto adj = adjacency_masks(n, id);
    const unsigned all = (1U << n) - 1U;
    unsigned seen = 1U;
    unsigned frontier = 1U;
    while (frontier != 0U) {
        unsigned next = 0U;
        for (unsigned f = frontier; f != 0U; f &= f - 1U) next |= adj[static_cast<std::size_t>(std::countr_zero(f))];
        frontier = next & ~seen;
        seen |= next;
    }
    return seen == all;
}

/// Smallest y >= x with popcount(y) == k; UINT64_MAX when no such y exists.
inline std::uint64_t next_with_popcount(std::uint64_t x, int k) {
    constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
    for (;;) {
        const int pc = std::popcount(x);
        if (pc == k) return x;
        if (pc < k) {
            while (std::popcount(x) < k) x |= x + 1;
            return x;
        }
        const std::uint64_t carried = x + (x & (~x + 1));
        if (carried < x) return none;
        x = carried;
    }
}

/// Visits every id in [first, last] whose popcount lies in `edges`, in
/// ascending order.
template <class Fn>
void for_each_id(std::uint64_t first, std::uint64_t last, EdgeCountRange edges, std::size_t positions, Fn&& fn) {
    if (first > last) return;
    if (edges.min == 0 && edges.max >= positions) {
        for (std::uint64_t id = first;; ++id) {
            fn(id);
            if (id == last) break;
        }
        return;
    }
    std::uint64_t cur = first;
    for (;;) {
        std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t k = edges.min; k <= edges.max; ++k) best = std::min(best, next_with_popcount(cur, static_cast<int>(k)));
        if (best > last) return;
        fn(best);
        if (best == last) return;
        cur = best + 1;
    }
}

/// Streams DagPatterns of size n in ascending canonical id, filtered by edge
/// count and, optionally, weak connectedness. The unfiltered stream has
/// 2^(n(n-1)/2) elements.
class PatternEnumerator {
public:
    PatternEnumerator(std::size_t n, std::optional<EdgeCountRange> edges = std::nullopt, bool require_connected = false)
        : n_(n), positions_(position_count(n)), connected_(require_connected) {
        if (n < 2 || n > DagPattern::max_id_vertices) throw Error("enumeration supports 2 <= n <= 11");
        range_ = edges.value_or(EdgeCountRange{0, positions_});
        range_.max = std::min(range_.max, positions_);
        last_ = positions_ == 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << positions_) - 1;
        done_ = range_.min > range_.max;
    }

    std::optional<DagPattern> next() {
        while (!done_) {
            std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
            for (std::size_t k = range_.min; k <= range_.max; ++k) best = std::min(best, next_with_popcount(cursor_, static_cast<int>(k)));
            if (best > last_) {
                done_ = true;
                break;
            }
            if (best == last_) done_ = true; else cursor_ = best + 1;
            if (!connected_ || id_is_connected(n_, best)) return DagPattern::from_id(n_, best);
        }
        return std::nullopt;
    }

private:
    std::size_t n_;
    std::size_t positions_;
    bool connected_;
    EdgeCountRange range_{};
    std::uint64_t cursor_ = 0;
    std::uint64_t last_ = 0;
    bool done_ = false;
};

inline std::vector<DagPattern> enumerate_patterns(std::size_t n, std::optional<EdgeCountRange> edges = std::nullopt,
                                                  bool require_connected = false) {
    std::vector<DagPattern> out;
    PatternEnumerator it(n, edges, require_connected);
    while (auto p = it.next()) out.push_back(std::move(*p));
    return out;
}

// ---------------------------------------------------------------------------
// LLSM float pre-screen
// ---------------------------------------------------------------------------

/// LLSM log-weight coefficients of a pattern id in double precision: the
/// Laplacian is grounded at the last vertex and solved by Cholesky. Only
/// differences between coefficients are meaningful. Requires a connected id.
inline std::array<double, DagPattern::max_id_vertices> llsm_coefficients_fast(std::size_t n, std::uint64_t id) {
    constexpr std::size_t cap = DagPattern::max_id_vertices;
    std::array<std::array<double, cap>, cap> l{};
    std::array<double, cap> r{};
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            if (!((id >> p) & 1U)) continue;
            l[i][i] += 1.0;
            l[j][j] += 1.0;
            l[i][j] -= 1.0;
            l[j][i] -= 1.0;
            r[i] += 1.0;
            r[j] -= 1.0;
        }
    }
    const std::size_t m = n - 1;
    for (std::size_t c = 0; c < m; ++c) {
        double d = l[c][c];
        for (std::size_t k = 0; k < c; ++k) d -= l[c][k] * l[c][k];
        d = std::sqrt(d);
        l[c][c] = d;
        for (std::size_t row = c + 1; row < m; ++row) {
            double s = l[row][c];
            for (std::size_t k = 0; k < c; ++k) s -= l[row][k] * l[c][k];
            l[row][c] = s / d;
        }
    }
    std::array<double, cap> y{};
    for (std::size_t i = 0; i < m; ++i) {
        double s = r[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
        y[i] = s / l[i][i];
    }
    for (std::size_t i = m; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < m; ++k) s -= l[k][i] * y[k];
        y[i] = s / l[i][i];
    }
    y[m] = 0.0;
    return y;
}

// ---------------------------------------------------------------------------
// Search tasks and hits
// ---------------------------------------------------------------------------

enum class Method { llsm, em };

inline const char* method_name(Method m) { return m == Method::llsm ? "llsm" : "em"; }

/// Default EM grid: the integer Saaty intensities 2..9.
inline std::vector<double> default_b_grid() { return {2, 3, 4, 5, 6, 7, 8, 9}; }

struct SearchTask {
    std::size_t n = 2;
    std::optional<EdgeCountRange> edge_count_range;
    Method method = Method::llsm;
    std::vector<double> b_values = default_b_grid();  ///< EM only
    bool require_connected = true;  ///< must stay true: disconnected patterns have no unique weights
    bool edges_only = false;  ///< EM: only count flips between alternatives joined by an edge

    void validate() const {
        if (n < 2 || n > DagPattern::max_id_vertices) throw Error("search supports 2 <= n <= 11");
        if (!require_connected) throw NotConnected();
        if (method == Method::em) {
            if (b_values.size() < 2) throw Error("EM reversal search needs at least two b values");
            for (double b : b_values) {
                if (!(b > 1.0)) throw Error("all b values must be > 1");
            }
        }
    }

    EdgeCountRange edges() const {
        EdgeCountRange r = edge_count_range.value_or(EdgeCountRange{0, position_count(n)});
        r.max = std::min(r.max, position_count(n));
        return r;
    }
};

/// EM ranking differences between two intensities.
struct EmFlip {
    double b_low = 0.0;
    double b_high = 0.0;
    std::vector<Edge> pairs;
};

struct SearchHit {
    Method method = Method::llsm;
    std::uint64_t id = 0;
    std::size_t n = 0;
    std::size_t edge_count = 0;
    std::vector<Edge> violations;  ///< LLSM: LOP-violating edges
    std::vector<Rational> coefficients;  ///< LLSM: exact coefficients of log b
    std::vector<double> b_values;  ///< EM
    std::vector<std::vector<double>> weights;  ///< EM: one vector per b
    std::vector<std::vector<Edge>> lop_violations;  ///< EM: per b
    std::vector<EmFlip> flips;  ///< EM

    DagPattern pattern() const { return DagPattern::from_id(n, id); }
};

inline bool operator==(const EmFlip& a, const EmFlip& b) {
    return a.b_low == b.b_low && a.b_high == b.b_high && a.pairs == b.pairs;
}

inline bool operator==(const SearchHit& a, const SearchHit& b) {
    return a.method == b.method && a.id == b.id && a.n == b.n && a.edge_count == b.edge_count && a.violations == b.violations &&
           a.coefficients == b.coefficients && a.b_values == b.b_values && a.weights == b.weights &&
           a.lop_violations == b.lop_violations && a.flips == b.flips;
}

/// Gap under which the float pre-screen sends a pattern to exact confirmation.
inline constexpr double prescreen_gap = 1e-6;

/// Exact LLSM verdict for one connected pattern; nullopt when LOP holds.
inline std::optional<SearchHit> llsm_hit(const DagPattern& pattern) {
    LogWeights c = llsm_exact(pattern);
    LopReport report = check_lop(pattern, c);
    if (report.satisfied) return std::nullopt;
    SearchHit hit;
    hit.method = Method::llsm;
    hit.id = pattern.id();
    hit.n = pattern.size();
    hit.edge_count = pattern.edge_count();
    hit.violations = std::move(report.violations);
    hit.coefficients.assign(c.coefficients().begin(), c.coefficients().end());
    return hit;
}

/// EM ranking comparison across the task's b values for one connected
/// pattern; nullopt when no pair of b values changes the ranking.
inline std::optional<SearchHit> em_hit(const DagPattern& pattern, const SearchTask& task, const EmOptions& opts = {}) {
    SearchHit hit;
    hit.method = Method::em;
    hit.id = pattern.id();
    hit.n = pattern.size();
    hit.edge_count = pattern.edge_count();
    hit.b_values = task.b_values;
    std::vector<Weights> ws;
    for (double b : task.b_values) {
        ws.push_back(em_weights(realize(OrdinalPcm(pattern, b)), opts));
        hit.weights.emplace_back(ws.back().values().begin(), ws.back().values().end());
        hit.lop_violations.push_back(check_lop(pattern, ws.back()).violations);
    }
    for (std::size_t a = 0; a < ws.size(); ++a) {
        for (std::size_t b = a + 1; b < ws.size(); ++b) {
            std::vector<Edge> pairs = compare_rankings(ws[a], ws[b]);
            if (task.edges_only) std::erase_if(pairs, [&](const Edge& e) { return !pattern.has_edge(e.from, e.to); });
            if (!pairs.empty()) hit.flips.push_back({task.b_values[a], task.b_values[b], std::move(pairs)});
        }
    }
    if (hit.flips.empty()) return std::nullopt;
    return hit;
}

/// Recomputes a hit from its pattern; equal to the input iff it replays.
inline std::optional<SearchHit> replay(const SearchHit& hit, const SearchTask& task) {
    const DagPattern pattern = hit.pattern();
    return hit.method == Method::llsm ? llsm_hit(pattern) : em_hit(pattern, task);
}

// ---------------------------------------------------------------------------
// Chunked, parallel, deterministic search
// ---------------------------------------------------------------------------

/// Inclusive id range processed as one unit of work.
struct ChunkRange {
    std::uint64_t first = 0;
    std::uint64_t last = 0;

    friend bool operator==(const ChunkRange&, const ChunkRange&) = default;
};

/// Splits the id space into at most 4096 contiguous chunks.
inline std::vector<ChunkRange> chunk_ranges(std::size_t n) {
    const std::size_t positions = position_count(n);
    const std::size_t chunk_bits = positions > 12 ? positions - 12 : 0;
    const std::uint64_t count = std::uint64_t{1} << (positions - chunk_bits);
    std::vector<ChunkRange> out;
    out.reserve(count);
    for (std::uint64_t c = 0; c < count; ++c) out.push_back({c << chunk_bits, ((c + 1) << chunk_bits) - 1});
    return out;
}

struct ChunkResult {
    ChunkRange range;
    std::uint64_t scanned = 0;    ///< ids within the edge-count filter
    std::uint64_t connected = 0;  ///< of those, weakly connected
    std::vector<SearchHit> hits;  ///< ascending id
    bool skipped = false;         ///< counts only; hits come from elsewhere
};

struct SearchSummary {
    std::uint64_t scanned = 0;
    std::uint64_t connected = 0;
    std::vector<SearchHit> hits;  ///< ascending id

    std::optional<std::size_t> min_edge_count() const {
        std::optional<std::size_t> best;
        for (const auto& h : hits) best = best ? std::min(*best, h.edge_count) : h.edge_count;
        return best;
    }
};

struct SearchRunOptions {
    unsigned threads = 1;
    /// Chunks for which this returns true are only counted, not solved.
    std::function<bool(const ChunkRange&)> skip;
    /// Called on the calling thread, once per chunk, in completion order.
    std::function<void(const ChunkResult&)> on_chunk;
};

inline ChunkResult process_chunk(const SearchTask& task, ChunkRange range, bool count_only) {
    ChunkResult out;
    out.range = range;
    out.skipped = count_only;
    for_each_id(range.first, range.last, task.edges(), position_count(task.n), [&](std::uint64_t id) {
        ++out.scanned;
        const bool connected = id_is_connected(task.n, id);
        if (connected) ++out.connected;
        // Disconnected patterns have no unique weights, so they are never solved.
        if (count_only || !connected) return;
        if (task.method == Method::llsm) {
            const auto c = llsm_coefficients_fast(task.n, id);
            const DagPattern pattern = DagPattern::from_id(task.n, id);
            bool suspicious = false;
            for (const Edge& e : pattern.edges()) suspicious = suspicious || (c[e.from] - c[e.to] < prescreen_gap);
            if (!suspicious) return;
            if (auto hit = llsm_hit(pattern)) out.hits.push_back(std::move(*hit));
        } else {
            if (auto hit = em_hit(DagPattern::from_id(task.n, id), task)) out.hits.push_back(std::move(*hit));
        }
    });
    return out;
}

/// Runs a search over all chunks. Workers own their solver state and pull
/// chunk indices from a shared counter; results are handed to the calling
/// thread, which merges them. The hit list is sorted by id, so the result
/// does not depend on the thread count.
inline SearchSummary run_search(const SearchTask& task, const SearchRunOptions& opts = {}) {
    task.validate();
    const auto chunks = chunk_ranges(task.n);
    const unsigned workers = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(chunks.size())));

    std::mutex mutex;
    std::condition_variable ready;
    std::deque<ChunkResult> queue;
    std::exception_ptr failure;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    unsigned active = workers;

    auto work = [&] {
        while (!stop) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks.size()) break;
            try {
                ChunkResult r = process_chunk(task, chunks[c], opts.skip && opts.skip(chunks[c]));
                std::lock_guard lock(mutex);
                queue.push_back(std::move(r));
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
            ready.notify_one();
        }
        std::lock_guard lock(mutex);
        --active;
        ready.notify_one();
    };

    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);

    SearchSummary summary;
    for (;;) {
        ChunkResult r;
        {
            std::unique_lock lock(mutex);
            ready.wait(lock, [&] { return !queue.empty() || active == 0; });
            if (queue.empty()) break;
            r = std::move(queue.front());
            queue.pop_front();
        }
        summary.scanned += r.scanned;
        summary.connected += r.connected;
        if (!stop && opts.on_chunk) opts.on_chunk(r);
        for (auto& h : r.hits) summary.hits.push_back(std::move(h));
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
    std::sort(summary.hits.begin(), summary.hits.end(), [](const SearchHit& a, const SearchHit& b) { return a.id < b.id; });
    return summary;
}

inline std::vector<SearchHit> search_llsm_violations(SearchTask task, unsigned threads = 1) {
    task.method = Method::llsm;
    return run_search(task, {threads, {}, {}}).hits;
}

inline std::vector<SearchHit> search_em_reversals(SearchTask task, unsigned threads = 1) {
    task.method = Method::em;
    return run_search(task, {threads, {}, {}}).hits;
}

// ---------------------------------------------------------------------------
// Isomorphism classes under order-preserving relabelings
// ---------------------------------------------------------------------------

/// Smallest id over all relabelings that keep the pattern in topological
/// labeling (one per linear extension of the DAG).
inline std::uint64_t canonical_id(const DagPattern& pattern) {
    const std::size_t n = pattern.size();
    std::vector<std::uint32_t> preds(n, 0);
    for (const Edge& e : pattern.edges()) preds[e.to] |= 1U << e.from;
    std::vector<std::size_t> label(n);
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();

    std::function<void(std::size_t, std::uint32_t)> extend = [&](std::size_t pos, std::uint32_t placed) {
        if (pos == n) {
            std::uint64_t id = 0;
            for (const Edge& e : pattern.edges()) id |= std::uint64_t{1} << position_index(n, label[e.from], label[e.to]);
            best = std::min(best, id);
            return;
        }
        for (std::size_t v = 0; v < n; ++v) {
            if ((placed >> v) & 1U) continue;
            if ((preds[v] & ~placed) != 0U) continue;
            label[v] = pos;
            extend(pos + 1, placed | (1U << v));
        }
    };
    extend(0, 0);
    return best;
}

inline std::size_t count_isomorphism_classes(const std::vector<SearchHit>& hits) {
    std::vector<std::uint64_t> ids;
    ids.reserve(hits.size());
    for (const auto& h : hits) ids.push_back(canonical_id(h.pattern()));
    std::sort(ids.begin(), ids.end());
    return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

// ---------------------------------------------------------------------------
// Parametric family: 1 -> 2, 1 -> C_m, 2 -> C_1, C_i -> C_{i+1}
// ---------------------------------------------------------------------------

struct FamilyParams {
    std::size_t k = 1;  ///< cluster size
    std::size_t m = 2;  ///< cluster count

    void validate() const {
        if (k < 1) throw Error("family requires k >= 1");
        if (m < 2) throw Error("family requires m >= 2");
    }
    std::size_t n() const { return k * m + 2; }
    std::size_t expected_edges() const { return 1 + 2 * k + (m - 1) * k * k; }
};

/// 0-indexed vertices of cluster C_i (i = 1..m).
inline std::vector<std::size_t> family_cluster(const FamilyParams& p, std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t v = (i - 1) * p.k + 2; v < i * p.k + 2; ++v) out.push_back(v);
    return out;
}

inline DagPattern generate_family(const FamilyParams& p) {
    p.validate();
    std::vector<Edge> edges{{0, 1}};
    for (std::size_t v : family_cluster(p, p.m)) edges.push_back({0, v});
    for (std::size_t v : family_cluster(p, 1)) edges.push_back({1, v});
    for (std::size_t i = 1; i < p.m; ++i) {
        for (std::size_t u : family_cluster(p, i)) {
            for (std::size_t v : family_cluster(p, i + 1)) edges.push_back({u, v});
        }
    }
    return DagPattern(p.n(), std::move(edges));
}

/// (y_1 - y_2) / log b = (-k^2 (m-1) + 2k + m - 1) / (k^2 + 2k + m - 1).
inline Rational family_gap_closed_form(const FamilyParams& p) {
    p.validate();
    const Rational k(static_cast<long long>(p.k));
    const Rational m(static_cast<long long>(p.m));
    return (-k * k * (m - 1) + 2 * k + m - 1) / (k * k + 2 * k + m - 1);
}

/// Solution (y_1, y_2, y_C1, ..., y_Cm) / log b of the cluster-collapsed
/// normal equations, anchored so that the full weight vector has mean zero.
inline std::vector<Rational> family_reduced_solution(const FamilyParams& p) {
    p.validate();
    const std::size_t m = p.m;
    const std::size_t dim = m + 2;
    const Rational k(static_cast<long long>(p.k));
    auto cluster = [](std::size_t i) { return i + 1; };  // C_i -> column index
    DenseMatrix<Rational> a(dim, dim);
    std::vector<Rational> rhs(dim, Rational(0));

    a(0, 0) = k + 1;
    a(0, 1) = -1;
    a(0, cluster(m)) -= k;
    rhs[0] = k + 1;

    a(1, 1) = k + 1;
    a(1, 0) = -1;
    a(1, cluster(1)) -= k;
    rhs[1] = k - 1;

    a(cluster(1), cluster(1)) = k + 1;
    a(cluster(1), 1) = -1;
    a(cluster(1), cluster(2)) -= k;
    rhs[cluster(1)] = k - 1;

    for (std::size_t i = 2; i < m; ++i) {
        a(cluster(i), cluster(i)) = 2 * k;
        a(cluster(i), cluster(i - 1)) = -k;
        a(cluster(i), cluster(i + 1)) = -k;
    }

    // The C_m equation, (k+1) y_Cm - y_1 - k y_C(m-1) = -(k+1), is implied by
    // the others; it is replaced by y_1 + y_2 + k sum y_Ci = 0 and checked.
    DenseMatrix<Rational> anchored = a;
    for (std::size_t c = 0; c < dim; ++c) anchored(cluster(m), c) = c < 2 ? Rational(1) : k;
    rhs[cluster(m)] = 0;
    std::vector<Rational> y = solve_linear_system(std::move(anchored), rhs);

    const Rational check = (k + 1) * y[cluster(m)] - y[0] - k * y[cluster(m - 1)];
    if (check != -(k + 1)) throw Error("family reduced system: dropped equation not satisfied");
    return y;
}

inline Rational family_gap_via_reduced_system(const FamilyParams& p) {
    const auto y = family_reduced_solution(p);
    return y[0] - y[1];
}

}  // namespace loplab
