#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "itertrace/errors.hpp"
#include "itertrace/streams.hpp"
#include "itertrace/suffix_tree.hpp"

namespace itertrace {

struct MiningConfig {
    std::int64_t iterations = 0;              // declared loop trip count, from the user
    std::int64_t epsilon0 = 1;                // starting slack on the repetition count
    std::optional<std::int64_t> epsilon_cap;  // exclusive; defaults to iterations
};

struct PatternCandidate {
    std::vector<std::int32_t> tokens;
    std::int64_t count = 0;        // occurrences in the token sequence
    std::int64_t first_token = 0;  // earliest occurrence, as a token index
    std::int64_t epsilon_used = 0;

    std::int64_t length() const { return static_cast<std::int64_t>(tokens.size()); }
};

struct RepeatCandidate {
    std::int32_t start = 0;   // token index of the earliest occurrence
    std::int32_t length = 0;
    std::int64_t count = 0;
};

inline SuffixTree build_suffix_tree(const TokenSequence& seq) {
    return SuffixTree(std::span<const std::int32_t>(seq.tokens), seq.terminator());
}

/// Emits, per internal node with enough occurrences, the longest admissible
/// prefix of its path string: length min(depth, max_len), provided that still
/// reaches below the parent. A prefix cut mid-edge keeps the node's occurrence
/// count, because every occurrence of the prefix continues along that edge.
inline std::vector<RepeatCandidate> enumerate_repeats(const SuffixTree& tree,
                                                      std::int64_t min_count,
                                                      std::int64_t max_len) {
    std::vector<RepeatCandidate> out;
    if (max_len < 1) return out;
    const auto& nodes = tree.nodes();
    for (std::size_t v = 1; v < nodes.size(); ++v) {
        const auto& node = nodes[v];
        if (node.is_leaf() || node.leaf_count < min_count) continue;
        const auto len = std::min<std::int64_t>(node.depth, max_len);
        if (len <= nodes[static_cast<std::size_t>(node.parent)].depth) continue;
        out.push_back({node.first_leaf, static_cast<std::int32_t>(len), node.leaf_count});
    }
    return out;
}

namespace detail {

inline std::int64_t max_pattern_length(std::int64_t sequence_len, std::int64_t iterations) {
    // Largest integer strictly below sequence_len / iterations.
    return (sequence_len - 1) / iterations;
}

inline bool candidate_preferred(const RepeatCandidate& a, const RepeatCandidate& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.count != b.count) return a.count > b.count;
    return a.start < b.start;
}

inline PatternCandidate mine_pattern_impl(const SuffixTree& tree, std::int64_t sequence_len,
                                          const MiningConfig& cfg, const std::string& loop_label) {
    const auto iters = cfg.iterations;
    if (iters < 2 || cfg.epsilon0 < 1 || cfg.epsilon0 >= iters) {
        throw Error(ErrorKind::InvalidIterationCount,
                    "pattern-mining" + loop_label + ": need iterations >= 2 and 1 <= epsilon0 < iterations (got iterations=" +
                        std::to_string(iters) + ", epsilon0=" + std::to_string(cfg.epsilon0) + ")");
    }
    if (sequence_len < iters) {
        throw Error(ErrorKind::InvalidIterationCount,
                    "pattern-mining" + loop_label + ": sequence of " + std::to_string(sequence_len) +
                        " operations cannot contain " + std::to_string(iters) + " iterations");
    }
    const auto cap = cfg.epsilon_cap.value_or(iters);
    const auto max_len = max_pattern_length(sequence_len, iters);

    for (std::int64_t eps = cfg.epsilon0; eps < cap; eps *= 2) {
        std::optional<RepeatCandidate> best;
        for (const auto& cand : enumerate_repeats(tree, iters - eps + 1, max_len)) {
            if (cand.count > iters) continue;
            if (!best || candidate_preferred(cand, *best)) best = cand;
        }
        if (best) {
            PatternCandidate pattern;
            pattern.tokens.assign(tree.text().begin() + best->start,
                                  tree.text().begin() + best->start + best->length);
            pattern.count = best->count;
            pattern.first_token = best->start;
            pattern.epsilon_used = eps;
            return pattern;
        }
    }
    throw Error(ErrorKind::NoPatternFound,
                "pattern-mining" + loop_label + ": no repeated substring satisfies the repetition and length criteria for iterations=" +
                    std::to_string(iters) + " (epsilon exhausted at cap " + std::to_string(cap) +
                    "); the trace may not be iterative at the declared count");
}

}  // namespace detail

/// Mines the basic-iteration signature: the longest substring repeating more
/// than iterations - epsilon times (but at most iterations times) and shorter
/// than the per-iteration operation budget. The slack epsilon doubles, up to
/// an exclusive cap at the iteration count, whenever no candidate fits.
inline PatternCandidate mine_pattern(const TokenSequence& seq, const MiningConfig& cfg) {
    const auto tree = build_suffix_tree(seq);
    return detail::mine_pattern_impl(tree, static_cast<std::int64_t>(seq.size()), cfg, "");
}

inline PatternCandidate mine_pattern(const SuffixTree& tree, std::int64_t sequence_len,
                                     const MiningConfig& cfg) {
    return detail::mine_pattern_impl(tree, sequence_len, cfg, "");
}

/// Multi-loop mining over a shared tree: one candidate per loop spec, in input
/// order. Loops must declare pairwise distinct iteration counts, and two loops
/// resolving to the same token content are rejected as ambiguous.
inline std::vector<PatternCandidate> mine_patterns_multi(const TokenSequence& seq,
                                                         const std::vector<MiningConfig>& loops) {
    if (loops.empty()) {
        throw Error(ErrorKind::InvalidConfig, "pattern-mining: no loop specs given");
    }
    {
        std::set<std::int64_t> seen;
        for (const auto& loop : loops) {
            if (!seen.insert(loop.iterations).second) {
                throw Error(ErrorKind::InvalidConfig,
                            "pattern-mining: loop iteration counts must be pairwise distinct (duplicate " +
                                std::to_string(loop.iterations) + ")");
            }
        }
    }
    const auto tree = build_suffix_tree(seq);
    std::vector<PatternCandidate> out;
    out.reserve(loops.size());
    for (std::size_t k = 0; k < loops.size(); ++k) {
        out.push_back(detail::mine_pattern_impl(tree, static_cast<std::int64_t>(seq.size()),
                                                loops[k],
                                                " (loop " + std::to_string(k + 1) + ")"));
    }
    for (std::size_t a = 0; a < out.size(); ++a) {
        for (std::size_t b = a + 1; b < out.size(); ++b) {
            if (out[a].tokens == out[b].tokens) {
                throw Error(ErrorKind::AmbiguousLoops,
                            "pattern-mining: loops " + std::to_string(a + 1) + " and " +
                                std::to_string(b + 1) + " mined the same pattern; the loop specs are ambiguous");
            }
        }
    }
    return out;
}

}  // namespace itertrace
