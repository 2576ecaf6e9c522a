#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace zerotemp {

// Generalized suffix automaton over a small alphabet (at most 3 symbols).
// Each node remembers one occurrence (text id, end position) of its strings.
class SuffixAutomaton {
public:
    static constexpr std::int32_t none = -1;

    struct Node {
        std::int32_t len = 0;
        std::int32_t link = none;
        std::array<std::int32_t, 3> next{none, none, none};
        std::int32_t text = 0;
        std::int32_t end = 0;
        std::int8_t last = -1;  // final symbol shared by every string of the node
    };

    explicit SuffixAutomaton(std::size_t max_nodes = 64'000'000) : max_nodes_(max_nodes) { nodes_.emplace_back(); }

    // Appends a text; symbols are raw values below 3.
    void add_text(const std::string& text) {
        const auto id = texts_++;
        std::int32_t last = 0;
        for (std::size_t i = 0; i < text.size(); ++i)
            last = extend(last, static_cast<unsigned char>(text[i]), id, static_cast<std::int32_t>(i));
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    std::int32_t text_count() const noexcept { return texts_; }
    const Node& node(std::int32_t v) const { return nodes_[static_cast<std::size_t>(v)]; }
    std::int32_t go(std::int32_t v, int s) const { return nodes_[static_cast<std::size_t>(v)].next[static_cast<std::size_t>(s)]; }

    // Node reached by reading the whole string, or none.
    std::int32_t find(const std::string& s) const {
        std::int32_t v = 0;
        for (unsigned char ch : s) {
            v = go(v, ch);
            if (v == none) return none;
        }
        return v;
    }

private:
    std::int32_t make(const Node& n) {
        if (nodes_.size() >= max_nodes_) fail(ErrorKind::ResourceLimit, "suffix automaton exceeds its node budget");
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t clone(std::int32_t p, std::int32_t q, int c) {
        Node cl = nodes_[static_cast<std::size_t>(q)];
        cl.len = nodes_[static_cast<std::size_t>(p)].len + 1;
        const auto id = make(cl);
        nodes_[static_cast<std::size_t>(q)].link = id;
        while (p != none && nodes_[static_cast<std::size_t>(p)].next[static_cast<std::size_t>(c)] == q) {
            nodes_[static_cast<std::size_t>(p)].next[static_cast<std::size_t>(c)] = id;
            p = nodes_[static_cast<std::size_t>(p)].link;
        }
        return id;
    }

    std::int32_t extend(std::int32_t last, int c, std::int32_t text, std::int32_t pos) {
        const auto cu = static_cast<std::size_t>(c);
        if (nodes_[static_cast<std::size_t>(last)].next[cu] != none) {
            const auto q = nodes_[static_cast<std::size_t>(last)].next[cu];
            if (nodes_[static_cast<std::size_t>(last)].len + 1 == nodes_[static_cast<std::size_t>(q)].len) return q;
            return clone(last, q, c);
        }
        Node n;
        n.len = nodes_[static_cast<std::size_t>(last)].len + 1;
        n.text = text;
        n.end = pos;
        n.last = static_cast<std::int8_t>(c);
        const auto cur = make(n);
        auto p = last;
        while (p != none && nodes_[static_cast<std::size_t>(p)].next[cu] == none) {
            nodes_[static_cast<std::size_t>(p)].next[cu] = cur;
            p = nodes_[static_cast<std::size_t>(p)].link;
        }
        if (p == none) {
            nodes_[static_cast<std::size_t>(cur)].link = 0;
        } else {
            const auto q = nodes_[static_cast<std::size_t>(p)].next[cu];
            if (nodes_[static_cast<std::size_t>(p)].len + 1 == nodes_[static_cast<std::size_t>(q)].len)
                nodes_[static_cast<std::size_t>(cur)].link = q;
            else
                nodes_[static_cast<std::size_t>(cur)].link = clone(p, q, c);
        }
        return cur;
    }

    std::vector<Node> nodes_;
    std::size_t max_nodes_;
    std::int32_t texts_ = 0;
};

}  // namespace zerotemp
