#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "loplab/loplab.hpp"

namespace loplab::cli {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_violation = 2 };

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// A pattern file starts with a line holding only n; a matrix row has n >= 2 entries.
inline bool looks_like_pattern(const std::string& text) {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        auto toks = detail::split_ws(line);
        if (toks.empty() || toks.front().starts_with('#')) continue;
        return toks.size() == 1;
    }
    return false;
}

inline unsigned default_threads() {
    if (const char* env = std::getenv("LOPLAB_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

inline std::string fmt(double x, int precision = 10) {
    std::ostringstream out;
    out << std::setprecision(precision) << x;
    return out.str();
}

inline std::string pairs_text(const std::vector<Edge>& pairs) {
    if (pairs.empty()) return "none";
    std::string out;
    for (const Edge& e : pairs) out += (out.empty() ? "" : ", ") + std::string("(") + std::to_string(e.from + 1) + "," + std::to_string(e.to + 1) + ")";
    return out;
}

inline std::string ranking_text(const std::vector<std::vector<std::size_t>>& ranking) {
    std::string out;
    for (const auto& group : ranking) {
        if (!out.empty()) out += " > ";
        if (group.size() > 1) out += "{";
        for (std::size_t k = 0; k < group.size(); ++k) out += (k ? " ~ " : "") + std::to_string(group[k] + 1);
        if (group.size() > 1) out += "}";
    }
    return out;
}

/// Brings a report on the sorted relabeling back to the input's labels.
inline LopReport relabel(LopReport r, const std::vector<std::size_t>& order) {
    for (Edge& e : r.violations) e = {order[e.from], order[e.to]};
    for (auto& group : r.ranking) {
        for (std::size_t& v : group) v = order[v];
        std::sort(group.begin(), group.end());
    }
    return r;
}

inline Weights permuted(const Weights& w, const std::vector<std::size_t>& order) {
    std::vector<double> out(w.size());
    for (std::size_t k = 0; k < order.size(); ++k) out[k] = w[order[k]];
    return Weights(std::move(out));
}

struct AnalyzeOptions {
    std::string file;
    std::string method = "both";
    std::optional<double> b;
    bool rational = true;
    bool json = false;
    std::optional<double> random_index;
    std::size_t ri_samples = 10'000;
    std::uint64_t seed = 0;
};

inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    const std::string text = read_file(o.file);
    const bool is_pattern = looks_like_pattern(text);

    std::optional<GeneralPcm> pcm;
    std::optional<double> b;
    std::optional<SortedPattern> sorted;
    Json input;
    if (is_pattern) {
        DagPattern pattern = parse_pattern(text);
        b = o.b.value_or(2.0);
        pcm = realize(OrdinalPcm(pattern, *b));
        std::vector<std::size_t> identity(pattern.size());
        std::iota(identity.begin(), identity.end(), std::size_t{0});
        input = Json{{"kind", "pattern"}, {"n", pattern.size()}, {"b", *b},
                     {"edges", pairs_json(std::vector<Edge>(pattern.edges().begin(), pattern.edges().end()))}};
        sorted = SortedPattern{std::move(pattern), std::move(identity)};
    } else {
        pcm = parse_matrix(text);
        b = ordinal_intensity(*pcm);
        if (o.b && b && std::abs(*o.b - *b) > 1e-9 * *b) throw Error("--b disagrees with the intensity found in the matrix");
        if (b) sorted = sorted_pattern(*pcm, *b);
        input = Json{{"kind", "matrix"}, {"n", pcm->size()}, {"b", b ? Json(*b) : Json(nullptr)}};
        if (sorted) {
            std::vector<Edge> edges;
            for (const Edge& e : sorted->pattern.edges()) edges.push_back({sorted->order[e.from], sorted->order[e.to]});
            input["edges"] = pairs_json(edges);
        }
        input["matrix"] = render_matrix(*pcm);
    }
    if (!is_weakly_connected(*pcm)) throw NotConnected();

    const bool run_llsm = o.method == "llsm" || o.method == "both";
    const bool run_em = o.method == "em" || o.method == "both";
    Json methods = Json::object();
    std::vector<std::string> lines;
    bool any_violation = false;
    bool any_lop = false;

    auto lop_for = [&](const Weights& w) -> std::optional<LopReport> {
        if (!sorted) return std::nullopt;
        return relabel(check_lop(sorted->pattern, permuted(w, sorted->order)), sorted->order);
    };

    if (run_llsm) {
        Json m;
        const Weights w = llsm_float(*pcm);
        std::optional<LopReport> lop;
        std::optional<LogWeights> exact;
        if (sorted && b) {
            exact = llsm_exact(sorted->pattern);
            lop = relabel(check_lop(sorted->pattern, *exact), sorted->order);
        } else {
            lop = lop_for(w);
        }
        m["weights"] = std::vector<double>(w.values().begin(), w.values().end());
        m["objective"] = llsm_objective(*pcm, w);
        lines.push_back("LLSM weights: " + [&] {
            std::string s;
            for (double x : w.values()) s += (s.empty() ? "" : " ") + fmt(x);
            return s;
        }());
        if (exact && o.rational) {
            std::vector<Rational> original(exact->size());
            for (std::size_t k = 0; k < exact->size(); ++k) original[sorted->order[k]] = (*exact)[k];
            Json coeffs = Json::array();
            std::string s;
            for (const auto& c : original) {
                coeffs.push_back(rational_text(c));
                s += (s.empty() ? "" : " ") + rational_text(c);
            }
            m["coefficients"] = std::move(coeffs);
            lines.push_back("LLSM log-weights / log b: " + s);
        }
        m["lop"] = lop ? lop_json(*lop) : Json(nullptr);
        if (lop) {
            any_lop = true;
            any_violation = any_violation || !lop->satisfied;
            lines.push_back("LLSM ranking: " + ranking_text(lop->ranking));
            lines.push_back("LLSM LOP: " + std::string(lop->satisfied ? "satisfied" : "violated on " + pairs_text(lop->violations)));
        }
        methods["llsm"] = std::move(m);
    }

    if (run_em) {
        Json m;
        PerronResult perron_result;
        std::vector<GeneralPcm::Entry> filled;
        GeneralPcm completed = *pcm;
        if (pcm->is_complete()) {
            perron_result = perron(*pcm);
        } else {
            CompletionResult c = em_complete(*pcm);
            perron_result = c.perron;
            filled = c.filled;
            completed = c.completed;
        }
        const Weights w = perron_result.weights();
        const auto lop = lop_for(w);
        const std::size_t n = pcm->size();
        std::optional<double> ri = o.random_index;
        if (!ri && n >= 3) ri = estimate_random_index(n, o.ri_samples, o.seed);
        std::optional<double> cr;
        if (ri && *ri > static_cast<double>(n)) cr = cr_index(completed, *ri - static_cast<double>(n));

        m["weights"] = std::vector<double>(w.values().begin(), w.values().end());
        m["lambda_max"] = perron_result.lambda_max;
        m["random_index"] = ri ? Json(*ri) : Json(nullptr);
        m["cr"] = cr ? Json(*cr) : Json(nullptr);
        Json f = Json::array();
        for (const auto& e : filled) f.push_back({e.row + 1, e.col + 1, e.value});
        m["filled"] = std::move(f);
        m["lop"] = lop ? lop_json(*lop) : Json(nullptr);
        std::string s;
        for (double x : w.values()) s += (s.empty() ? "" : " ") + fmt(x);
        lines.push_back("EM weights: " + s);
        lines.push_back("EM lambda_max: " + fmt(perron_result.lambda_max, 12));
        if (cr) lines.push_back("EM CR: " + fmt(*cr, 6) + " (Saaty's acceptability threshold 0.1, informational)");
        if (lop) {
            any_lop = true;
            any_violation = any_violation || !lop->satisfied;
            lines.push_back("EM ranking: " + ranking_text(lop->ranking));
            lines.push_back("EM LOP: " + std::string(lop->satisfied ? "satisfied" : "violated on " + pairs_text(lop->violations)));
        }
        methods["em"] = std::move(m);
    }

    const double elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (o.json) {
        Json report{{"schema", json_schema_version},
                    {"command", "analyze"},
                    {"input", std::move(input)},
                    {"methods", std::move(methods)},
                    {"lop_satisfied", any_lop ? Json(!any_violation) : Json(nullptr)},
                    {"timing_ms", elapsed}};
        out << report.dump(2) << '\n';
    } else {
        out << "alternatives: " << pcm->size();
        if (b) out << ", b = " << fmt(*b);
        out << '\n';
        if (!sorted) out << "no linear order of the alternatives; LOP not applicable\n";
        for (const auto& l : lines) out << l << '\n';
    }
    return any_violation ? exit_violation : exit_ok;
}

inline EdgeCountRange parse_edge_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const auto v = static_cast<std::size_t>(std::stoul(text));
            return {v, v};
        }
        return {static_cast<std::size_t>(std::stoul(text.substr(0, dots))), static_cast<std::size_t>(std::stoul(text.substr(dots + 2)))};
    } catch (const std::exception&) {
        throw Error("invalid edge range '" + text + "' (expected N or MIN..MAX)");
    }
}

/// "2..9" (integers) or a comma-separated list.
inline std::vector<double> parse_b_grid(const std::string& text) {
    std::vector<double> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const int lo = std::stoi(text.substr(0, dots));
            const int hi = std::stoi(text.substr(dots + 2));
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            std::istringstream in(text);
            for (std::string tok; std::getline(in, tok, ',');) out.push_back(detail::parse_decimal(tok));
        }
    } catch (const std::exception&) {
        throw Error("invalid b grid '" + text + "'");
    }
    return out;
}

struct SearchOptions {
    std::size_t n = 0;
    std::string method = "llsm";
    std::optional<std::string> edges;
    std::string b_grid = "2..9";
    std::optional<std::string> out_file;
    std::optional<std::string> resume;
    unsigned threads = 0;
    bool edges_only = false;
    bool json = false;
};

inline int cmd_search(const SearchOptions& o, std::ostream& out) {
    if (o.n > 8) throw Error("search supports n <= 8");
    SearchTask task;
    task.n = o.n;
    task.method = o.method == "em" ? Method::em : Method::llsm;
    if (o.edges) task.edge_count_range = parse_edge_range(*o.edges);
    task.b_values = parse_b_grid(o.b_grid);
    task.edges_only = o.edges_only;

    SearchFiles files;
    if (o.out_file) files.out = *o.out_file;
    if (o.resume) files.journal = *o.resume;
    const unsigned threads = o.threads > 0 ? o.threads : default_threads();
    const auto summary = run_search_with_files(task, threads, files);
    const auto min_edges = summary.min_edge_count();
    const std::size_t classes = count_isomorphism_classes(summary.hits);

    if (o.json) {
        Json j{{"schema", json_schema_version},
               {"command", "search"},
               {"n", task.n},
               {"method", method_name(task.method)},
               {"scanned", summary.scanned},
               {"connected", summary.connected},
               {"hits", summary.hits.size()},
               {"isomorphism_classes", classes},
               {"min_edge_count", min_edges ? Json(*min_edges) : Json(nullptr)}};
        out << j.dump(2) << '\n';
    } else {
        out << "scanned " << summary.scanned << " patterns (" << summary.connected << " weakly connected), "
            << summary.hits.size() << " hits";
        if (min_edges) out << ", minimum edge count " << *min_edges;
        out << ", " << classes << " up to order-preserving relabeling\n";
    }
    return exit_ok;
}

struct FamilyOptions {
    std::size_t k = 1;
    std::size_t m = 2;
    double b = 2.0;
    std::string emit = "pattern";
    bool gap = false;
};

/// Largest family size for which --gap also runs the full Laplacian solve.
inline constexpr std::size_t full_solve_limit = 64;

inline int cmd_family(const FamilyOptions& o, std::ostream& out) {
    const FamilyParams params{o.k, o.m};
    const DagPattern pattern = generate_family(params);
    if (o.gap) {
        const Rational closed = family_gap_closed_form(params);
        const Rational reduced = family_gap_via_reduced_system(params);
        out << "closed form:    " << closed << " (" << fmt(closed.convert_to<double>()) << ")\n";
        out << "reduced system: " << reduced << '\n';
        if (pattern.size() <= full_solve_limit) {
            const LogWeights c = llsm_exact(pattern);
            out << "full solve:     " << (c[0] - c[1]) << '\n';
        }
        if (closed != reduced) throw Error("closed form and reduced system disagree");
        return exit_ok;
    }
    if (o.emit == "dot") {
        out << render_dot(pattern, "family");
    } else if (o.emit == "matrix") {
        out << render_matrix(realize(OrdinalPcm(pattern, o.b)));
    } else {
        out << render_pattern(pattern);
    }
    return exit_ok;
}

inline int cmd_export_dot(const std::string& file, std::ostream& out) {
    out << render_dot(parse_pattern(read_file(file)));
    return exit_ok;
}

inline int cmd_random_index(std::size_t n, std::size_t samples, std::uint64_t seed, std::ostream& out) {
    const double mean = estimate_random_index(n, samples, seed);
    out << "mean lambda_max " << fmt(mean, 17) << " (excess " << fmt(mean - static_cast<double>(n), 17) << ") over " << samples
        << " samples, seed " << seed << '\n';
    return exit_ok;
}

/// Entry point shared by the executable and the tests.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear order preservation analysis for ordinal pairwise comparison matrices", "loplab"};
    app.require_subcommand(1);

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "compute EM/LLSM weights of a matrix or pattern file and check LOP");
    a->add_option("file", analyze.file, "matrix or pattern file")->required();
    a->add_option("--method", analyze.method, "em, llsm or both")->check(CLI::IsMember({"em", "llsm", "both"}));
    a->add_option("--b", analyze.b, "preference intensity for pattern input (default 2)")->check(CLI::PositiveNumber);
    a->add_flag("--rational,!--no-rational", analyze.rational, "print exact LLSM coefficients of log b");
    bool text_flag = false;
    a->add_flag("--json", analyze.json, "JSON report");
    a->add_flag("--text", text_flag, "text report (default)");
    a->add_option("--random-index", analyze.random_index, "mean random lambda_max for CR instead of Monte Carlo");
    a->add_option("--ri-samples", analyze.ri_samples, "Monte Carlo samples for the random index");
    a->add_option("--seed", analyze.seed, "seed for the random index");

    SearchOptions search;
    auto* s = app.add_subcommand("search", "exhaustive search for LOP violations or EM ranking reversals");
    s->add_option("--n", search.n, "number of alternatives (2..8)")->required()->check(CLI::Range(2, 8));
    s->add_option("--method", search.method, "llsm or em")->check(CLI::IsMember({"llsm", "em"}));
    s->add_option("--edges", search.edges, "known comparison count N or MIN..MAX");
    s->add_option("--b-grid", search.b_grid, "EM intensities, 'LO..HI' or comma list (default 2..9)");
    s->add_option("--out", search.out_file, "JSON-lines file of hits");
    s->add_option("--resume", search.resume, "journal file; resumes if it exists");
    s->add_option("--threads", search.threads, "worker threads (default LOPLAB_THREADS or all cores)");
    s->add_flag("--edges-only", search.edges_only, "EM: count only flips between compared alternatives");
    s->add_flag("--json", search.json, "JSON summary");

    FamilyOptions family;
    auto* f = app.add_subcommand("family", "generate the clustered DAG family and its LLSM gap");
    f->add_option("--k", family.k, "cluster size (>= 1)")->required()->check(CLI::PositiveNumber);
    f->add_option("--m", family.m, "cluster count (>= 2)")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
    f->add_option("--b", family.b, "intensity for --emit matrix");
    f->add_option("--emit", family.emit, "pattern, matrix or dot")->check(CLI::IsMember({"pattern", "matrix", "dot"}));
    f->add_flag("--gap", family.gap, "print (y_1 - y_2) / log b by closed form and by solving");

    std::string dot_file;
    auto* d = app.add_subcommand("export-dot", "render a pattern file as a Graphviz digraph");
    d->add_option("file", dot_file, "pattern file")->required();

    std::size_t ri_n = 3;
    std::size_t ri_samples = 10'000;
    std::uint64_t ri_seed = 0;
    auto* r = app.add_subcommand("random-index", "Monte Carlo mean lambda_max of random Saaty-scale matrices");
    r->add_option("--n", ri_n, "matrix size (>= 3)")->required();
    r->add_option("--samples", ri_samples, "number of random matrices");
    r->add_option("--seed", ri_seed, "seed (default 0)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_error;
    }

    try {
        if (*a) return cmd_analyze(analyze, out);
        if (*s) return cmd_search(search, out);
        if (*f) return cmd_family(family, out);
        if (*d) return cmd_export_dot(dot_file, out);
        if (*r) return cmd_random_index(ri_n, ri_samples, ri_seed, out);
    } catch (const NotConnected& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}

}  // namespace loplab::cli
