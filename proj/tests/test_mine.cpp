#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "itertrace/mine.hpp"

#include "oracles.hpp"

using namespace itertrace;

namespace {

TokenSequence seq_of(std::vector<std::int32_t> tokens) {
    TokenSequence seq;
    std::int32_t max_token = -1;
    for (const auto t : tokens) max_token = std::max(max_token, t);
    for (std::int32_t id = 0; id <= max_token; ++id) {
        seq.names.push_back("t" + std::to_string(id));
        seq.ids.emplace(seq.names.back(), id);
    }
    seq.record_index.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) seq.record_index[i] = i;
    seq.tokens = std::move(tokens);
    return seq;
}

std::vector<std::int32_t> tokens_of(const std::string& s) {
    std::vector<std::int32_t> out;
    for (char c : s) out.push_back(static_cast<std::int32_t>(c));
    return out;
}

/// Distinct init tokens from a high id range, so they repeat exactly once.
std::vector<std::int32_t> with_init(std::size_t init_len, std::vector<std::int32_t> body) {
    std::vector<std::int32_t> s;
    for (std::size_t i = 0; i < init_len; ++i) s.push_back(static_cast<std::int32_t>(1000 + i));
    s.insert(s.end(), body.begin(), body.end());
    return s;
}

std::vector<std::int32_t> repeat(std::vector<std::int32_t> unit, std::size_t times) {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < times; ++i) out.insert(out.end(), unit.begin(), unit.end());
    return out;
}

}  // namespace

TEST_CASE("enumerate_repeats on banana matches the hand enumeration") {
    const auto tokens = tokens_of("banana");
    const auto tree = SuffixTree(std::span<const std::int32_t>(tokens), -1);
    const auto repeats = enumerate_repeats(tree, 2, 10);

    std::set<std::pair<std::vector<std::int32_t>, std::int64_t>> got;
    for (const auto& r : repeats) {
        got.insert({{tree.text().begin() + r.start, tree.text().begin() + r.start + r.length},
                    r.count});
    }
    const std::set<std::pair<std::vector<std::int32_t>, std::int64_t>> want{
        {tokens_of("a"), 3},
        {tokens_of("na"), 2},
        {tokens_of("ana"), 2},
    };
    CHECK(got == want);
}

TEST_CASE("enumerate_repeats truncates mid-edge while keeping the count") {
    const auto tokens = tokens_of("banana");
    const auto tree = SuffixTree(std::span<const std::int32_t>(tokens), -1);
    const auto repeats = enumerate_repeats(tree, 2, 2);
    std::set<std::pair<std::vector<std::int32_t>, std::int64_t>> got;
    for (const auto& r : repeats) {
        got.insert({{tree.text().begin() + r.start, tree.text().begin() + r.start + r.length},
                    r.count});
    }
    // "ana" is cut to "an" at the cap; occurrences of "an" equal those of "ana"
    const std::set<std::pair<std::vector<std::int32_t>, std::int64_t>> want{
        {tokens_of("a"), 3},
        {tokens_of("na"), 2},
        {tokens_of("an"), 2},
    };
    CHECK(got == want);
}

TEST_CASE("enumerate_repeats is empty when the count bar is too high") {
    const auto tokens = tokens_of("banana");
    const auto tree = SuffixTree(std::span<const std::int32_t>(tokens), -1);
    CHECK(enumerate_repeats(tree, 99, 10).empty());
}

TEST_CASE("enumerate_repeats agrees with the brute-force enumeration") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = oracle::random_tokens(rng, 60, 3 + static_cast<std::int32_t>(rng() % 3));
        const auto min_count = 2 + static_cast<std::int64_t>(rng() % 3);
        const auto max_len = 1 + static_cast<std::int64_t>(rng() % 12);

        const auto tree = SuffixTree(std::span<const std::int32_t>(s), -1);
        std::vector<oracle::Repeat> got;
        for (const auto& r : enumerate_repeats(tree, min_count, max_len)) {
            oracle::Repeat item;
            item.tokens.assign(tree.text().begin() + r.start,
                               tree.text().begin() + r.start + r.length);
            item.count = r.count;
            got.push_back(std::move(item));
        }
        std::sort(got.begin(), got.end());
        const auto want = oracle::enumerate_repeats(s, min_count, max_len);
        CHECK(got == want);
    }
}

TEST_CASE("mine_pattern finds the iteration body after an init prefix") {
    const auto seq = seq_of({900, 901, 1, 2, 3, 1, 2, 3, 1, 2, 3});
    const auto p = mine_pattern(seq, {.iterations = 3, .epsilon0 = 1});
    CHECK(p.tokens == std::vector<std::int32_t>{1, 2, 3});
    CHECK(p.count == 3);
    CHECK(p.length() == 3);
    CHECK(p.epsilon_used == 1);
    CHECK(p.first_token == 2);
}

TEST_CASE("mine_pattern truncates pure tandem traces to the length bound") {
    const auto seq = seq_of({1, 2, 1, 2, 1, 2});
    const auto p = mine_pattern(seq, {.iterations = 3, .epsilon0 = 1});
    CHECK(p.tokens == std::vector<std::int32_t>{1});  // the length cap is 1 here
    CHECK(p.count == 3);
}

TEST_CASE("mine_pattern doubles epsilon until the band catches the count") {
    // body repeats 7 times but 10 iterations are declared: bands (9,10] and
    // (8,10] are empty, (6,10] catches it.
    const auto seq = seq_of(with_init(30, repeat({1, 2, 3}, 7)));
    const auto p = mine_pattern(seq, {.iterations = 10, .epsilon0 = 1});
    CHECK(p.tokens == std::vector<std::int32_t>{1, 2, 3});
    CHECK(p.count == 7);
    CHECK(p.epsilon_used == 4);
}

TEST_CASE("mine_pattern reports NoPatternFound when epsilon is exhausted") {
    const auto seq = seq_of({1, 2, 3, 4, 5, 6});
    try {
        mine_pattern(seq, {.iterations = 3, .epsilon0 = 1});
        FAIL("expected NoPatternFound");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoPatternFound);
    }
}

TEST_CASE("mine_pattern validates the iteration count") {
    const auto seq = seq_of({1, 2});
    try {
        mine_pattern(seq, {.iterations = 3, .epsilon0 = 1});
        FAIL("expected InvalidIterationCount");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidIterationCount);
    }
    try {
        mine_pattern(seq, {.iterations = 1, .epsilon0 = 1});
        FAIL("expected InvalidIterationCount");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidIterationCount);
    }
}

TEST_CASE("mine_pattern never returns a candidate outside the criteria") {
    std::mt19937_64 rng(404);
    int found = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto s = oracle::random_tokens(rng, 120, 4);
        const std::int64_t iters = 2 + static_cast<std::int64_t>(rng() % 6);
        if (static_cast<std::int64_t>(s.size()) < iters) continue;
        const auto seq = seq_of(s);
        try {
            const auto p = mine_pattern(seq, {.iterations = iters, .epsilon0 = 1});
            ++found;
            CHECK(p.count <= iters);
            CHECK(p.count > iters - p.epsilon_used);
            CHECK(p.length() * iters < static_cast<std::int64_t>(s.size()));
            CHECK(oracle::count_occurrences(s, p.tokens) == p.count);
            // determinism
            const auto again = mine_pattern(seq, {.iterations = iters, .epsilon0 = 1});
            CHECK(again.tokens == p.tokens);
            CHECK(again.epsilon_used == p.epsilon_used);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoPatternFound);
        }
    }
    CHECK(found > 5);  // the property must actually exercise the positive path
}

TEST_CASE("mine_patterns_multi recovers one pattern per loop") {
    auto body = repeat({10, 11}, 50);
    const auto tail = repeat({20, 21, 22}, 20);
    body.insert(body.end(), tail.begin(), tail.end());
    const auto seq = seq_of(body);
    const auto patterns = mine_patterns_multi(
        seq, {{.iterations = 50, .epsilon0 = 1}, {.iterations = 20, .epsilon0 = 1}});
    REQUIRE(patterns.size() == 2);
    CHECK(patterns[0].tokens == std::vector<std::int32_t>{10, 11});
    CHECK(patterns[0].count == 50);
    CHECK(patterns[1].tokens == std::vector<std::int32_t>{20, 21, 22});
    CHECK(patterns[1].count == 20);
}

TEST_CASE("mine_patterns_multi with one loop matches mine_pattern") {
    const auto seq = seq_of(with_init(2, repeat({1, 2, 3}, 3)));
    const auto multi = mine_patterns_multi(seq, {{.iterations = 3, .epsilon0 = 1}});
    const auto single = mine_pattern(seq, {.iterations = 3, .epsilon0 = 1});
    REQUIRE(multi.size() == 1);
    CHECK(multi[0].tokens == single.tokens);
    CHECK(multi[0].count == single.count);
}

TEST_CASE("mine_patterns_multi rejects duplicate iteration counts") {
    const auto seq = seq_of(with_init(2, repeat({1, 2, 3}, 10)));
    try {
        mine_patterns_multi(seq, {{.iterations = 10}, {.iterations = 10}});
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidConfig);
    }
}

TEST_CASE("mine_patterns_multi rejects loops that resolve to the same pattern") {
    // one body repeating 10 times; declared counts 10 and 11 both land on it
    const auto seq = seq_of(with_init(40, repeat({1, 2, 3}, 10)));
    try {
        mine_patterns_multi(seq, {{.iterations = 10}, {.iterations = 11}});
        FAIL("expected AmbiguousLoops");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AmbiguousLoops);
    }
}

TEST_CASE("suffix tree arena stays within the linear bound on mining input") {
    const auto seq = seq_of(with_init(5, repeat({1, 2, 3, 4, 5, 6, 7}, 100)));
    const auto tree = build_suffix_tree(seq);
    CHECK(tree.node_count() <= 2 * (seq.size() + 1));
}
