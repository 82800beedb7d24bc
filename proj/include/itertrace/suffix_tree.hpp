#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "itertrace/errors.hpp"

namespace itertrace {

/// Suffix tree over an integer token string, built online in linear time with
/// suffix links. Children are ordered maps keyed by the first edge token; the
/// alphabet is the set of distinct operation names and can run into the
/// thousands, so dense child arrays are not an option.
///
/// The tree is built over tokens plus a unique terminator, which makes every
/// suffix end at a leaf: a string of n tokens yields exactly n + 1 leaves and
/// at most 2(n + 1) nodes in total.
class SuffixTree {
public:
    using Token = std::int32_t;

    struct Node {
        std::int32_t parent = -1;
        std::int32_t edge_begin = 0;  // edge label is text[edge_begin, edge_end)
        std::int32_t edge_end = 0;
        std::int32_t link = 0;
        std::int32_t depth = 0;       // tokens spelled from root to this node
        std::int32_t first_leaf = -1; // smallest suffix index in this subtree
        std::int64_t leaf_count = 0;  // occurrences of the node's path string
        std::map<Token, std::int32_t> children;

        bool is_leaf() const { return children.empty(); }
    };

    SuffixTree(std::span<const Token> tokens, Token terminator) {
        text_.reserve(tokens.size() + 1);
        text_.assign(tokens.begin(), tokens.end());
        text_.push_back(terminator);
        nodes_.reserve(2 * text_.size());
        nodes_.emplace_back();  // root
        for (std::int32_t pos = 0; pos < static_cast<std::int32_t>(text_.size()); ++pos) {
            extend(pos);
        }
        finalize();
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Token>& text() const { return text_; }
    std::size_t node_count() const { return nodes_.size(); }
    static constexpr std::int32_t root() { return 0; }

    std::size_t leaf_node_count() const {
        std::size_t n = 0;
        for (const auto& node : nodes_) n += node.is_leaf() ? 1 : 0;
        return n;
    }
    std::size_t internal_node_count() const { return nodes_.size() - leaf_node_count(); }

    /// Occurrence count of a token string in the original (terminator-free)
    /// string; 0 when it does not occur.
    std::int64_t occurrences(std::span<const Token> pattern) const {
        if (pattern.empty()) return 0;
        std::int32_t node = 0;
        std::size_t matched = 0;
        while (matched < pattern.size()) {
            const auto it = nodes_[node].children.find(pattern[matched]);
            if (it == nodes_[node].children.end()) return 0;
            node = it->second;
            const auto& nd = nodes_[node];
            for (std::int32_t k = nd.edge_begin; k < nd.edge_end && matched < pattern.size(); ++k) {
                if (text_[k] != pattern[matched]) return 0;
                ++matched;
            }
        }
        return nodes_[node].leaf_count;
    }

private:
    static constexpr std::int32_t kOpenEnd = std::numeric_limits<std::int32_t>::max();

    std::vector<Token> text_;
    std::vector<Node> nodes_;

    std::int32_t active_node_ = 0;
    std::int32_t active_edge_ = 0;  // index into text_ of the active edge's first token
    std::int32_t active_len_ = 0;
    std::int32_t remainder_ = 0;
    std::int32_t need_link_ = 0;

    std::int32_t new_node(std::int32_t begin, std::int32_t end) {
        nodes_.emplace_back();
        auto& n = nodes_.back();
        n.edge_begin = begin;
        n.edge_end = end;
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t edge_length(std::int32_t node, std::int32_t pos) const {
        const auto& n = nodes_[node];
        const std::int32_t end = n.edge_end == kOpenEnd ? pos + 1 : n.edge_end;
        return end - n.edge_begin;
    }

    void add_link(std::int32_t node) {
        if (need_link_ != 0) nodes_[need_link_].link = node;
        need_link_ = node;
    }

    void extend(std::int32_t pos) {
        need_link_ = 0;
        ++remainder_;
        while (remainder_ > 0) {
            if (active_len_ == 0) active_edge_ = pos;
            const Token edge_tok = text_[active_edge_];
            auto it = nodes_[active_node_].children.find(edge_tok);
            if (it == nodes_[active_node_].children.end()) {
                const auto leaf = new_node(pos, kOpenEnd);
                nodes_[active_node_].children[edge_tok] = leaf;
                add_link(active_node_);
            } else {
                const auto next = it->second;
                const auto len = edge_length(next, pos);
                if (active_len_ >= len) {
                    active_edge_ += len;
                    active_len_ -= len;
                    active_node_ = next;
                    continue;
                }
                if (text_[nodes_[next].edge_begin + active_len_] == text_[pos]) {
                    ++active_len_;
                    add_link(active_node_);
                    break;
                }
                const auto split = new_node(nodes_[next].edge_begin,
                                            nodes_[next].edge_begin + active_len_);
                nodes_[active_node_].children[edge_tok] = split;
                const auto leaf = new_node(pos, kOpenEnd);
                nodes_[split].children[text_[pos]] = leaf;
                nodes_[next].edge_begin += active_len_;
                nodes_[split].children[text_[nodes_[next].edge_begin]] = next;
                add_link(split);
            }
            --remainder_;
            if (active_node_ == 0 && active_len_ > 0) {
                --active_len_;
                active_edge_ = pos - remainder_ + 1;
            } else if (active_node_ != 0) {
                active_node_ = nodes_[active_node_].link;
            }
        }
    }

    // One pass down for parents and depths, one pass back up for leaf counts
    // and first occurrences.
    void finalize() {
        const auto n = static_cast<std::int32_t>(text_.size());
        std::vector<std::int32_t> order;
        order.reserve(nodes_.size());
        std::vector<std::int32_t> stack{0};
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (const auto& [tok, child_id] : nodes_[v].children) {
                auto& child = nodes_[child_id];
                if (child.edge_end == kOpenEnd) child.edge_end = n;
                child.parent = v;
                child.depth = nodes_[v].depth + (child.edge_end - child.edge_begin);
                stack.push_back(child_id);
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto& node = nodes_[*it];
            if (node.is_leaf()) {
                node.leaf_count = 1;
                node.first_leaf = n - node.depth;
            }
            if (node.parent >= 0) {
                auto& parent = nodes_[node.parent];
                parent.leaf_count += node.leaf_count;
                if (parent.first_leaf < 0 || node.first_leaf < parent.first_leaf) {
                    parent.first_leaf = node.first_leaf;
                }
            }
        }
    }
};

}  // namespace itertrace
