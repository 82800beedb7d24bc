#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itertrace/streams.hpp"

namespace itertrace {

struct MatchConfig {
    std::int64_t k0 = 0;  // budget of unmatched tokens tolerated per occurrence
};

/// Default budget when the caller gives none: a quarter of the pattern length,
/// rounded up. Statistic-style insertions are small relative to the iteration
/// body, and the value is always overridable.
inline std::int64_t default_k0(std::int64_t pattern_len) {
    return (pattern_len + 3) / 4;
}

/// Inclusive token-index range of one approximate occurrence. The first and
/// last tokens of a span always match the pattern's first and last symbols;
/// extra counts the skipped interior tokens, so end - start + 1 equals the
/// pattern length plus extra.
struct MatchSpan {
    std::int64_t start_token = 0;
    std::int64_t end_token = 0;
    std::int64_t extra = 0;

    friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

/// Greedy left-to-right scan for approximate occurrences. From an anchor whose
/// token equals the pattern head, each token either matches the next pattern
/// symbol or is skipped against the budget; exceeding the budget abandons the
/// anchor and the scan resumes one token later. A completed match is recorded
/// as [anchor, last matched index] and scanning resumes right after it, so
/// spans are pairwise disjoint and strictly increasing.
inline std::vector<MatchSpan> approx_match(std::span<const std::int32_t> tokens,
                                           std::span<const std::int32_t> pattern,
                                           const MatchConfig& cfg) {
    std::vector<MatchSpan> spans;
    const auto n = static_cast<std::int64_t>(tokens.size());
    const auto m = static_cast<std::int64_t>(pattern.size());
    if (m == 0 || n < m) return spans;

    std::int64_t anchor = 0;
    while (anchor < n) {
        if (tokens[anchor] != pattern[0]) {
            ++anchor;
            continue;
        }
        std::int64_t pos = anchor;
        std::int64_t matched = 0;
        std::int64_t extra = 0;
        std::int64_t last = anchor;
        bool complete = true;
        while (matched < m) {
            if (pos == n) {
                complete = false;
                break;
            }
            if (tokens[pos] == pattern[matched]) {
                last = pos;
                ++matched;
                ++pos;
            } else {
                if (++extra > cfg.k0) {
                    complete = false;
                    break;
                }
                ++pos;
            }
        }
        if (complete) {
            spans.push_back({anchor, last, extra});
            anchor = last + 1;
        } else {
            ++anchor;
        }
    }
    return spans;
}

inline std::vector<MatchSpan> approx_match(const TokenSequence& seq,
                                           std::span<const std::int32_t> pattern,
                                           const MatchConfig& cfg) {
    return approx_match(std::span<const std::int32_t>(seq.tokens), pattern, cfg);
}

enum class SpanViolationKind {
    OrderViolation,
    OverlapViolation,
    BoundsViolation,
    LengthViolation,
    BudgetViolation,
    ContentViolation,
};

struct SpanViolation {
    SpanViolationKind kind;
    std::string message;
};

inline const char* to_string(SpanViolationKind k) {
    switch (k) {
        case SpanViolationKind::OrderViolation: return "OrderViolation";
        case SpanViolationKind::OverlapViolation: return "OverlapViolation";
        case SpanViolationKind::BoundsViolation: return "BoundsViolation";
        case SpanViolationKind::LengthViolation: return "LengthViolation";
        case SpanViolationKind::BudgetViolation: return "BudgetViolation";
        case SpanViolationKind::ContentViolation: return "ContentViolation";
    }
    return "ContentViolation";
}

/// Checks a span list against the matching contract: ordering, disjointness,
/// budget, and that deleting the skipped tokens from each span leaves exactly
/// the pattern. Empty result means valid.
inline std::vector<SpanViolation> validate_spans(const std::vector<MatchSpan>& spans,
                                                 std::span<const std::int32_t> tokens,
                                                 std::span<const std::int32_t> pattern,
                                                 const MatchConfig& cfg) {
    std::vector<SpanViolation> out;
    const auto n = static_cast<std::int64_t>(tokens.size());
    const auto m = static_cast<std::int64_t>(pattern.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        const std::string label = "span " + std::to_string(i + 1);
        if (s.start_token > s.end_token) {
            out.push_back({SpanViolationKind::OrderViolation, label + ": start after end"});
            continue;
        }
        if (s.start_token < 0 || s.end_token >= n) {
            out.push_back({SpanViolationKind::BoundsViolation, label + ": outside the token sequence"});
            continue;
        }
        if (i > 0 && spans[i - 1].end_token >= s.start_token) {
            out.push_back({SpanViolationKind::OverlapViolation,
                           label + ": overlaps or precedes the previous span"});
        }
        if (s.extra > cfg.k0) {
            out.push_back({SpanViolationKind::BudgetViolation,
                           label + ": extra " + std::to_string(s.extra) + " exceeds budget " +
                               std::to_string(cfg.k0)});
        }
        if (s.end_token - s.start_token + 1 != m + s.extra) {
            out.push_back({SpanViolationKind::LengthViolation,
                           label + ": length != pattern length + extra"});
            continue;
        }
        // Greedy subsequence walk; with the length identity above, consuming
        // the whole pattern means exactly `extra` tokens were skipped.
        std::int64_t matched = 0;
        for (std::int64_t pos = s.start_token; pos <= s.end_token && matched < m; ++pos) {
            if (tokens[pos] == pattern[matched]) ++matched;
        }
        const bool ends_ok = m > 0 && tokens[s.start_token] == pattern[0] &&
                             tokens[s.end_token] == pattern[m - 1];
        if (matched != m || !ends_ok) {
            out.push_back({SpanViolationKind::ContentViolation,
                           label + ": span tokens minus skips do not spell the pattern"});
        }
    }
    return out;
}

}  // namespace itertrace
