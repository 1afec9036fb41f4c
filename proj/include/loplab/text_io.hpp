#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "loplab/error.hpp"
#include "loplab/pcm.hpp"

// Matrix text: one row per line, whitespace-separated entries, each a
// decimal, a fraction p/q, or `*` for a missing comparison. Diagonal is `1`.
//
// Pattern text: first line `n`, then one `i j` line per edge (1-indexed,
// i < j). Blank lines and lines starting with `#` are ignored by both.

namespace loplab {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline std::vector<std::vector<std::string>> tokenized_lines(std::string_view text) {
    std::vector<std::vector<std::string>> lines;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        auto toks = split_ws(line);
        if (toks.empty() || toks.front().starts_with('#')) continue;
        lines.push_back(std::move(toks));
    }
    return lines;
}

inline double parse_decimal(std::string_view tok) {
    double value = 0.0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("invalid number '" + std::string(tok) + "'");
    return value;
}

inline std::size_t parse_index(const std::string& tok) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("invalid integer '" + tok + "'");
    return value;
}

}  // namespace detail

/// Parses one matrix entry; nullopt for `*`.
inline std::optional<double> parse_entry(std::string_view tok) {
    if (tok == "*") return std::nullopt;
    const auto slash = tok.find('/');
    double value = 0.0;
    if (slash == std::string_view::npos) {
        value = detail::parse_decimal(tok);
    } else {
        const double num = detail::parse_decimal(tok.substr(0, slash));
        const double den = detail::parse_decimal(tok.substr(slash + 1));
        if (den == 0.0) throw ParseError("zero denominator in '" + std::string(tok) + "'");
        value = num / den;
    }
    if (!(value > 0.0) || !std::isfinite(value)) throw ParseError("entries must be positive, got '" + std::string(tok) + "'");
    return value;
}

/// Shortest text for a value: `p` or `p/q` when a fraction with q <= 1000
/// reproduces the double exactly, otherwise the shortest round-trip decimal.
inline std::string format_entry(double value) {
    for (long q = 1; q <= 1000; ++q) {
        const double p = std::round(value * static_cast<double>(q));
        if (p < 1.0 || p > 1e15) continue;
        if (p / static_cast<double>(q) == value) {
            const auto pi = static_cast<long long>(p);
            if (std::gcd(pi, static_cast<long long>(q)) != 1) continue;
            return q == 1 ? std::to_string(pi) : std::to_string(pi) + "/" + std::to_string(q);
        }
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline GeneralPcm parse_matrix(std::string_view text) {
    const auto rows = detail::tokenized_lines(text);
    const std::size_t n = rows.size();
    if (n < 2) throw ParseError("matrix needs at least 2 rows");
    std::vector<std::vector<std::optional<double>>> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw ParseError("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                             " entries, expected " + std::to_string(n));
        }
        for (const auto& tok : rows[i]) cells[i].push_back(parse_entry(tok));
    }
    std::vector<GeneralPcm::Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        if (!cells[i][i] || *cells[i][i] != 1.0) throw ParseError("diagonal entry " + std::to_string(i + 1) + " must be 1");
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& upper = cells[i][j];
            const auto& lower = cells[j][i];
            const std::string where = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            if (upper.has_value() != lower.has_value()) throw ParseError("entry " + where + " is missing on one side only");
            if (!upper) continue;
            if (std::abs(*upper * *lower - 1.0) > 1e-9) throw ParseError("entries at " + where + " are not reciprocal");
            entries.push_back({i, j, *upper});
        }
    }
    return GeneralPcm(n, entries);
}

inline std::string render_matrix(const GeneralPcm& pcm) {
    std::string out;
    const std::size_t n = pcm.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) out += ' ';
            const auto v = pcm.at(i, j);
            out += v ? format_entry(*v) : std::string("*");
        }
        out += '\n';
    }
    return out;
}

inline DagPattern parse_pattern(std::string_view text) {
    const auto lines = detail::tokenized_lines(text);
    if (lines.empty() || lines.front().size() != 1) throw ParseError("pattern must start with a line holding n");
    const std::size_t n = detail::parse_index(lines.front().front());
    if (n < 2) throw ParseError("pattern needs n >= 2");
    std::vector<Edge> edges;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].size() != 2) throw ParseError("pattern line " + std::to_string(k + 1) + " must be 'i j'");
        const std::size_t i = detail::parse_index(lines[k][0]);
        const std::size_t j = detail::parse_index(lines[k][1]);
        if (i < 1 || j < 1 || i > n || j > n) throw ParseError("edge vertex out of range 1.." + std::to_string(n));
        edges.push_back({i - 1, j - 1});
    }
    try {
        return DagPattern(n, std::move(edges));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

inline std::string render_pattern(const DagPattern& pattern) {
    std::string out = std::to_string(pattern.size()) + "\n";
    for (const Edge& e : pattern.edges()) out += std::to_string(e.from + 1) + " " + std::to_string(e.to + 1) + "\n";
    return out;
}

/// Deterministic Graphviz digraph: nodes 1..n, then edges in canonical order.
inline std::string render_dot(const DagPattern& pattern, std::string_view name = "pattern") {
    std::string out = "digraph " + std::string(name) + " {\n";
    for (std::size_t v = 0; v < pattern.size(); ++v) out += "  " + std::to_string(v + 1) + ";\n";
    for (const Edge& e : pattern.edges()) out += "  " + std::to_string(e.from + 1) + " -> " + std::to_string(e.to + 1) + ";\n";
    out += "}\n";
    return out;
}

}  // namespace loplab
