#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include <unistd.h>

#include "support.hpp"

using namespace loplab;
using namespace loplab::testing;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("loplab_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

SearchTask llsm_task(std::size_t n, std::optional<EdgeCountRange> edges = std::nullopt) {
    SearchTask t;
    t.n = n;
    t.method = Method::llsm;
    t.edge_count_range = edges;
    return t;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Enumeration, NextWithPopcountVisitsEverySubsetInOrder) {
    for (int k = 1; k <= 4; ++k) {
        std::vector<std::uint64_t> expected;
        for (std::uint64_t x = 0; x < 256; ++x) {
            if (std::popcount(x) == k) expected.push_back(x);
        }
        std::vector<std::uint64_t> got{(std::uint64_t{1} << k) - 1};
        while (got.back() < expected.back()) got.push_back(next_with_popcount(got.back() + 1, k));
        EXPECT_EQ(got, expected);
    }
    EXPECT_EQ(next_with_popcount(0, 0), 0U);
    EXPECT_EQ(next_with_popcount(1, 0), std::numeric_limits<std::uint64_t>::max());
    EXPECT_EQ(enumerate_patterns(4, EdgeCountRange{0, 1}).size(), 7U);
}

TEST(Enumeration, CountsConnectedPatternsPerEdgeCount) {
    std::size_t total = 0;
    for (std::size_t m = 0; m <= 10; ++m) {
        std::size_t oracle = 0;
        for (std::uint64_t id = 0; id < 1024; ++id) {
            if (static_cast<std::size_t>(std::popcount(id)) == m && oracle_connected(5, oracle_edges(5, id))) ++oracle;
        }
        EXPECT_EQ(enumerate_patterns(5, EdgeCountRange{m, m}, true).size(), oracle) << "m=" << m;
        total += oracle;
    }
    EXPECT_EQ(total, 728U);
    EXPECT_EQ(enumerate_patterns(5, std::nullopt, false).size(), 1024U);
}

TEST(Prescreen, FastCoefficientsMatchExact) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 300; ++trial) {
        const DagPattern p = random_connected_pattern(rng, 2, 8);
        const auto fast = llsm_coefficients_fast(p.size(), p.id());
        const LogWeights exact = llsm_exact(p);
        // The fast solve is grounded at the last vertex, so compare differences.
        const std::size_t last = p.size() - 1;
        for (std::size_t i = 0; i < last; ++i) {
            EXPECT_NEAR(fast[i] - fast[last], (exact[i] - exact[last]).convert_to<double>(), 1e-10);
        }
    }
}

TEST(SearchTask, Validation) {
    SearchTask t = llsm_task(5);
    t.require_connected = false;
    EXPECT_THROW(t.validate(), NotConnected);
    SearchTask em;
    em.method = Method::em;
    em.b_values = {2.0};
    EXPECT_THROW(em.validate(), Error);
    em.b_values = {0.5, 2.0};
    EXPECT_THROW(em.validate(), Error);
}

TEST(LlsmSearch, NoViolationsUpToSixVertices) {
    for (std::size_t n = 2; n <= 6; ++n) EXPECT_TRUE(search_llsm_violations(llsm_task(n)).empty()) << "n=" << n;
}

TEST(LlsmSearch, NoViolationsUpToSixWithoutPrescreen) {
    for (std::size_t n = 2; n <= 6; ++n) {
        PatternEnumerator patterns(n, std::nullopt, true);
        while (auto p = patterns.next()) ASSERT_FALSE(llsm_hit(*p).has_value()) << "id=" << p->id();
    }
}

TEST(LlsmSearch, PipelineAgreesWithDirectExactCheck) {
    const auto hits = search_llsm_violations(llsm_task(7));
    std::set<std::uint64_t> ids;
    for (const auto& h : hits) ids.insert(h.id);
    ASSERT_EQ(ids.size(), hits.size());
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 3000; ++trial) {
        const DagPattern p = random_connected_pattern(rng, 7);
        ASSERT_EQ(llsm_hit(p).has_value(), ids.contains(p.id())) << "id=" << p.id();
    }
    for (const auto& h : hits) ASSERT_TRUE(llsm_hit(h.pattern()).has_value());
}

TEST(LlsmSearch, DeterministicAcrossThreadCounts) {
    const auto task = llsm_task(7, EdgeCountRange{11, 12});
    SearchRunOptions one;
    one.threads = 1;
    SearchRunOptions many;
    many.threads = 4;
    const auto a = run_search(task, one);
    const auto b = run_search(task, many);
    EXPECT_EQ(a.scanned, b.scanned);
    EXPECT_EQ(a.connected, b.connected);
    EXPECT_EQ(a.hits, b.hits);
    EXPECT_FALSE(a.hits.empty());
    EXPECT_TRUE(std::is_sorted(a.hits.begin(), a.hits.end(), [](const SearchHit& x, const SearchHit& y) { return x.id < y.id; }));
}

TEST(LlsmSearch, HitsReplay) {
    const auto task = llsm_task(7, EdgeCountRange{11, 11});
    for (const auto& h : search_llsm_violations(task)) {
        const auto again = replay(h, task);
        ASSERT_TRUE(again.has_value());
        EXPECT_EQ(*again, h);
    }
}

TEST(LlsmSearch, ChunksCoverTheIdSpace) {
    for (std::size_t n = 2; n <= 8; ++n) {
        const auto chunks = chunk_ranges(n);
        EXPECT_LE(chunks.size(), 4096U);
        EXPECT_EQ(chunks.front().first, 0U);
        EXPECT_EQ(chunks.back().last, (std::uint64_t{1} << position_count(n)) - 1);
        for (std::size_t c = 1; c < chunks.size(); ++c) EXPECT_EQ(chunks[c].first, chunks[c - 1].last + 1);
    }
}

TEST(Journal, ResumeEqualsUninterruptedRun) {
    const auto dir = scratch_dir("resume");
    const auto task = llsm_task(7, EdgeCountRange{11, 11});
    const SearchFiles full{dir / "full.jsonl", dir / "full.journal"};
    const auto reference = run_search_with_files(task, 2, full);
    ASSERT_FALSE(reference.hits.empty());

    // Keep the header and the first half of the done lines, as if the run had
    // been killed; leave the hit file untouched, including hits from chunks
    // whose done line was lost.
    auto lines = read_lines(*full.journal);
    lines.resize(1 + (lines.size() - 1) / 2);
    {
        std::ofstream out(*full.journal, std::ios::trunc);
        for (const auto& l : lines) out << l << '\n';
    }
    const auto resumed = run_search_with_files(task, 3, full);
    EXPECT_EQ(resumed.hits, reference.hits);
    EXPECT_EQ(resumed.scanned, reference.scanned);
    EXPECT_EQ(resumed.connected, reference.connected);
    EXPECT_EQ(read_hits(*full.out), reference.hits);

    const SearchFiles plain{dir / "plain.jsonl", std::nullopt};
    run_search_with_files(task, 1, plain);
    EXPECT_EQ(read_lines(*plain.out), read_lines(*full.out));
    std::filesystem::remove_all(dir);
}

TEST(Journal, RejectsJournalOfAnotherTask) {
    const auto dir = scratch_dir("mismatch");
    const SearchFiles files{dir / "hits.jsonl", dir / "run.journal"};
    run_search_with_files(llsm_task(5), 1, files);
    EXPECT_THROW(run_search_with_files(llsm_task(6), 1, files), Error);
    std::filesystem::remove_all(dir);
}

TEST(Json, HitsRoundTripByteIdentical) {
    auto hits = search_llsm_violations(llsm_task(7, EdgeCountRange{11, 11}));
    SearchTask em;
    em.n = 8;
    em.method = Method::em;
    em.b_values = {3.0, 4.0};
    const auto em_result = em_hit(generate_family({2, 3}), em);
    ASSERT_TRUE(em_result.has_value());
    hits.push_back(*em_result);
    for (const auto& h : hits) {
        const std::string text = hit_json(h).dump();
        const SearchHit back = hit_from_json(Json::parse(text));
        EXPECT_EQ(back, h);
        EXPECT_EQ(hit_json(back).dump(), text);
    }
}

TEST(EmSearch, FamilyFlipsTopPairBetweenThreeAndFour) {
    SearchTask task;
    task.n = 8;
    task.method = Method::em;
    task.b_values = {3.0, 4.0};
    const auto hit = em_hit(generate_family({2, 3}), task);
    ASSERT_TRUE(hit.has_value());
    ASSERT_EQ(hit->flips.size(), 1U);
    EXPECT_EQ(hit->flips[0].pairs, (std::vector<Edge>{{0, 1}}));
    ASSERT_EQ(hit->lop_violations.size(), 2U);
    EXPECT_EQ(hit->lop_violations[0], (std::vector<Edge>{{0, 1}}));
    EXPECT_TRUE(hit->lop_violations[1].empty());
    const auto again = replay(*hit, task);
    ASSERT_TRUE(again.has_value());
    EXPECT_EQ(*again, *hit);
}

TEST(EmSearch, NoReversalsUpToFourVertices) {
    for (std::size_t n = 2; n <= 4; ++n) {
        SearchTask task;
        task.n = n;
        task.method = Method::em;
        EXPECT_TRUE(search_em_reversals(task).empty()) << "n=" << n;
    }
}

TEST(EmSearch, SpanningTreesNeverReverse) {
    SearchTask task;
    task.n = 6;
    task.method = Method::em;
    task.edge_count_range = EdgeCountRange{5, 5};
    EXPECT_TRUE(search_em_reversals(task).empty());
}

TEST(Isomorphism, CanonicalIdMatchesPermutationOracle) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const DagPattern p = random_connected_pattern(rng, 2, 6);
        EXPECT_EQ(canonical_id(p), oracle_canonical_id(p)) << "id=" << p.id();
    }
}

TEST(Isomorphism, RelabeledCopiesCollapse) {
    // 1 -> 3 and 2 -> 3 is the same shape as 1 -> 3, 2 -> 3 with 1 and 2 swapped.
    const DagPattern a(3, {{0, 2}, {1, 2}});
    const DagPattern b(4, {{0, 1}, {0, 2}, {2, 3}});
    const DagPattern c(4, {{0, 1}, {0, 2}, {1, 3}});
    EXPECT_EQ(canonical_id(a), a.id());
    EXPECT_EQ(canonical_id(b), canonical_id(c));
}

TEST(Family, EdgeCountAndDataFile) {
    for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t m = 2; m <= 5; ++m) {
            const FamilyParams p{k, m};
            const DagPattern g = generate_family(p);
            EXPECT_EQ(g.size(), k * m + 2);
            EXPECT_EQ(g.edge_count(), p.expected_edges());
            EXPECT_TRUE(is_weakly_connected(g));
        }
    }
    EXPECT_EQ(generate_family({2, 3}), read_pattern_file("family_k2_m3.pattern"));
    EXPECT_THROW((void)generate_family({0, 3}), Error);
    EXPECT_THROW((void)generate_family({2, 1}), Error);
}

TEST(Family, ClosedFormReducedAndFullAgree) {
    for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t m = 2; m <= 6; ++m) {
            const FamilyParams p{k, m};
            const LogWeights c = llsm_exact(generate_family(p));
            EXPECT_EQ(family_gap_closed_form(p), c[0] - c[1]);
            EXPECT_EQ(family_gap_via_reduced_system(p), c[0] - c[1]);
        }
    }
}

TEST(Family, ClusterMembersShareCoefficients) {
    const FamilyParams p{3, 4};
    const LogWeights c = llsm_exact(generate_family(p));
    const auto reduced = family_reduced_solution(p);
    EXPECT_EQ(reduced[0], c[0]);
    EXPECT_EQ(reduced[1], c[1]);
    for (std::size_t i = 1; i <= p.m; ++i) {
        for (std::size_t v : family_cluster(p, i)) EXPECT_EQ(c[v], reduced[i + 1]);
    }
}

TEST(Family, SignsOfSmallMembers) {
    EXPECT_EQ(family_gap_closed_form({2, 2}), Rational(1, 9));
    EXPECT_EQ(family_gap_closed_form({3, 2}), Rational(-1, 8));
    EXPECT_EQ(family_gap_closed_form({2, 3}), Rational(-1, 5));
}
