#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loplab/json_io.hpp"
#include "loplab/search.hpp"

// Journal file: a `# loplab-search ...` header naming the task, then one
// `done <first_id> <last_id>` line (inclusive) per finished chunk. Hits of a
// chunk are appended to the JSON-lines output before its `done` line, so a
// resumed run keeps exactly the hits of journaled chunks and recomputes the rest.

namespace loplab {

inline std::string journal_header(const SearchTask& task) {
    std::ostringstream out;
    const auto edges = task.edges();
    out << "# loplab-search n=" << task.n << " method=" << method_name(task.method) << " edges=" << edges.min << ".."
        << edges.max;
    if (task.method == Method::em) {
        out << " b=";
        for (std::size_t i = 0; i < task.b_values.size(); ++i) out << (i ? "," : "") << Json(task.b_values[i]).dump();
        out << " edges_only=" << (task.edges_only ? 1 : 0);
    }
    return out.str();
}

struct JournalState {
    std::vector<ChunkRange> done;

    bool contains(const ChunkRange& r) const { return std::find(done.begin(), done.end(), r) != done.end(); }
    bool covers(std::uint64_t id) const {
        return std::any_of(done.begin(), done.end(), [&](const ChunkRange& r) { return r.first <= id && id <= r.last; });
    }
};

inline JournalState read_journal(const std::filesystem::path& path, const SearchTask& task) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open journal " + path.string());
    JournalState state;
    std::string line;
    if (!std::getline(in, line) || line != journal_header(task)) {
        throw Error("journal " + path.string() + " belongs to a different search task");
    }
    while (std::getline(in, line)) {
        if (line.empty() || line.starts_with('#')) continue;
        std::istringstream fields(line);
        std::string word;
        ChunkRange r;
        if (!(fields >> word >> r.first >> r.last) || word != "done") throw ParseError("malformed journal line '" + line + "'");
        state.done.push_back(r);
    }
    return state;
}

inline std::vector<SearchHit> read_hits(const std::filesystem::path& path) {
    std::vector<SearchHit> hits;
    std::ifstream in(path);
    if (!in) return hits;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        hits.push_back(hit_from_json(Json::parse(line)));
    }
    return hits;
}

inline void write_hits(const std::filesystem::path& path, const std::vector<SearchHit>& hits) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& h : hits) out << hit_json(h).dump() << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

struct SearchFiles {
    std::optional<std::filesystem::path> out;      ///< JSON lines, sorted by id when the run ends
    std::optional<std::filesystem::path> journal;  ///< resumed from if it exists, created otherwise
};

/// run_search with JSON-lines output and resumable journaling. The calling
/// thread is the only writer of both files.
inline SearchSummary run_search_with_files(const SearchTask& task, unsigned threads, const SearchFiles& files) {
    task.validate();
    if (files.journal && !files.out) throw Error("a journal requires an output file to hold the hits");

    JournalState state;
    std::vector<SearchHit> kept;
    std::ofstream journal;
    std::ofstream stream;
    if (files.journal) {
        if (std::filesystem::exists(*files.journal)) {
            state = read_journal(*files.journal, task);
            for (auto& h : read_hits(*files.out)) {
                if (state.covers(h.id)) kept.push_back(std::move(h));
            }
            write_hits(*files.out, kept);
            journal.open(*files.journal, std::ios::app);
        } else {
            journal.open(*files.journal, std::ios::trunc);
            journal << journal_header(task) << '\n' << std::flush;
            std::ofstream(*files.out, std::ios::trunc);
        }
        if (!journal) throw Error("cannot open journal " + files.journal->string());
        stream.open(*files.out, std::ios::app);
        if (!stream) throw Error("cannot open " + files.out->string());
    }

    SearchRunOptions opts;
    opts.threads = threads;
    opts.skip = [&](const ChunkRange& r) { return state.contains(r); };
    if (files.journal) {
        opts.on_chunk = [&](const ChunkResult& r) {
            if (r.skipped) return;
            for (const auto& h : r.hits) stream << hit_json(h).dump() << '\n';
            stream.flush();
            journal << "done " << r.range.first << ' ' << r.range.last << '\n';
            journal.flush();
        };
    }

    SearchSummary summary = run_search(task, opts);
    for (auto& h : kept) summary.hits.push_back(std::move(h));
    std::sort(summary.hits.begin(), summary.hits.end(), [](const SearchHit& a, const SearchHit& b) { return a.id < b.id; });
    stream.close();
    if (files.out) write_hits(*files.out, summary.hits);
    return summary;
}

}  // namespace loplab
