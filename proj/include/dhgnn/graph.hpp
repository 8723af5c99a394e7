#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dhgnn {

enum class Direction { Forward, Backward };

inline const char* direction_name(Direction d) {
    return d == Direction::Forward ? "forward" : "backward";
}

using Edge = std::pair<int, int>;

// Immutable directed graph over n nodes with two CSR views of the same edge
// set: the forward view lists each node's outgoing targets, the backward
// view lists its incoming sources. Rows are sorted ascending and duplicate
// edges are removed at construction. Self-loops are kept if present in the
// input.
class DirectedGraph {
  public:
    DirectedGraph() = default;

    // Throws MalformedInputError when an endpoint is out of range.
    static DirectedGraph from_edges(std::vector<Edge> edges, int n);

    int num_nodes() const { return n_; }
    std::int64_t num_edges() const { return m_; }

    std::span<const int> neighbors(int v, Direction dir) const {
        const auto& off = dir == Direction::Forward ? fwd_offsets_ : bwd_offsets_;
        const auto& tgt = dir == Direction::Forward ? fwd_targets_ : bwd_targets_;
        return {tgt.data() + off[v], tgt.data() + off[v + 1]};
    }

    int degree(int v, Direction dir) const {
        const auto& off = dir == Direction::Forward ? fwd_offsets_ : bwd_offsets_;
        return static_cast<int>(off[v + 1] - off[v]);
    }

    bool has_edge(int src, int dst) const;

    // Swaps the two CSR views; O(n + m) copy.
    DirectedGraph reversed() const;

    // Closure of the edge set under reversal.
    DirectedGraph symmetrized() const;

    // All edges as (src, dst) pairs in forward CSR order.
    std::vector<Edge> edge_list() const;

  private:
    int n_ = 0;
    std::int64_t m_ = 0;
    std::vector<std::int64_t> fwd_offsets_, bwd_offsets_;
    std::vector<int> fwd_targets_, bwd_targets_;
};

// Nodes at shortest-path distance exactly k from v following dir; v itself
// excluded. Result sorted ascending.
std::vector<int> k_hop_neighbors(const DirectedGraph& g, int v, int k,
                                 Direction dir);

}  // namespace dhgnn
