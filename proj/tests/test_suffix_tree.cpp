#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <string>

#include "itertrace/suffix_tree.hpp"

#include "oracles.hpp"

using namespace itertrace;

namespace {

std::vector<std::int32_t> tokens_of(const std::string& s) {
    std::vector<std::int32_t> out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<std::int32_t>(c));
    return out;
}

SuffixTree build(const std::vector<std::int32_t>& tokens) {
    return SuffixTree(std::span<const std::int32_t>(tokens), -1);
}

/// Path string of a node, via its earliest suffix start and depth.
std::vector<std::int32_t> path_of(const SuffixTree& tree, const SuffixTree::Node& node) {
    const auto& text = tree.text();
    return {text.begin() + node.first_leaf, text.begin() + node.first_leaf + node.depth};
}

}  // namespace

TEST_CASE("banana tree has the expected shape") {
    const auto tokens = tokens_of("banana");
    const auto tree = build(tokens);
    CHECK(tree.leaf_node_count() == 7);
    CHECK(tree.internal_node_count() == 4);
    CHECK(tree.occurrences(tokens_of("ana")) == 2);
    CHECK(tree.occurrences(tokens_of("na")) == 2);
    CHECK(tree.occurrences(tokens_of("a")) == 3);
    CHECK(tree.occurrences(tokens_of("banana")) == 1);
    CHECK(tree.occurrences(tokens_of("x")) == 0);
    CHECK(tree.node_count() <= 2 * (tokens.size() + 1));
}

TEST_CASE("leaf counts equal brute-force occurrence counts on random strings") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = oracle::random_tokens(rng, 200, 4 + static_cast<std::int32_t>(rng() % 5));
        const auto tree = build(s);
        CHECK(tree.node_count() <= 2 * (s.size() + 1));
        CHECK(tree.leaf_node_count() == s.size() + 1);
        for (const auto& node : tree.nodes()) {
            if (node.is_leaf() || node.parent < 0) continue;  // skip leaves and root
            const auto path = path_of(tree, node);
            CHECK(node.leaf_count == oracle::count_occurrences(s, path));
        }
    }
}

TEST_CASE("root-to-leaf paths spell exactly the suffix set") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = oracle::random_tokens(rng, 40, 3);
        auto with_term = s;
        with_term.push_back(-1);

        std::set<std::vector<std::int32_t>> suffixes;
        for (std::size_t i = 0; i < with_term.size(); ++i) {
            suffixes.insert({with_term.begin() + static_cast<std::ptrdiff_t>(i), with_term.end()});
        }

        const auto tree = build(s);
        std::set<std::vector<std::int32_t>> leaf_paths;
        for (const auto& node : tree.nodes()) {
            if (!node.is_leaf()) continue;
            leaf_paths.insert(path_of(tree, node));
        }
        CHECK(leaf_paths == suffixes);
    }
}

TEST_CASE("single-token string") {
    const auto tree = build({7});
    CHECK(tree.leaf_node_count() == 2);  // "7$" and "$"
    CHECK(tree.occurrences(std::vector<std::int32_t>{7}) == 1);
}

TEST_CASE("run of one repeated token") {
    const std::vector<std::int32_t> s(12, 3);
    const auto tree = build(s);
    for (std::size_t len = 1; len <= s.size(); ++len) {
        const std::vector<std::int32_t> needle(len, 3);
        CHECK(tree.occurrences(needle) == static_cast<std::int64_t>(s.size() - len + 1));
    }
}
