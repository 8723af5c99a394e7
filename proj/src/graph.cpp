#include "dhgnn/graph.hpp"

#include <algorithm>

#include "dhgnn/errors.hpp"

namespace dhgnn {

namespace {

// Builds one CSR view from (key, value) pairs; rows sorted, no dedup here.
void build_csr(const std::vector<Edge>& edges, int n, bool by_source,
               std::vector<std::int64_t>& offsets, std::vector<int>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [s, d] : edges) offsets[(by_source ? s : d) + 1]++;
    for (int i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.resize(edges.size());
    std::vector<std::int64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [s, d] : edges) {
        int key = by_source ? s : d;
        targets[cursor[key]++] = by_source ? d : s;
    }
    for (int i = 0; i < n; ++i)
        std::sort(targets.begin() + offsets[i], targets.begin() + offsets[i + 1]);
}

}  // namespace

DirectedGraph DirectedGraph::from_edges(std::vector<Edge> edges, int n) {
    if (n < 0) throw MalformedInputError("node count must be non-negative");
    for (const auto& [s, d] : edges) {
        if (s < 0 || s >= n || d < 0 || d >= n)
            throw MalformedInputError("edge endpoint out of range: (" +
                                      std::to_string(s) + ", " + std::to_string(d) +
                                      ") with n=" + std::to_string(n));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    DirectedGraph g;
    g.n_ = n;
    g.m_ = static_cast<std::int64_t>(edges.size());
    build_csr(edges, n, true, g.fwd_offsets_, g.fwd_targets_);
    build_csr(edges, n, false, g.bwd_offsets_, g.bwd_targets_);
    return g;
}

bool DirectedGraph::has_edge(int src, int dst) const {
    auto row = neighbors(src, Direction::Forward);
    return std::binary_search(row.begin(), row.end(), dst);
}

DirectedGraph DirectedGraph::reversed() const {
    DirectedGraph g;
    g.n_ = n_;
    g.m_ = m_;
    g.fwd_offsets_ = bwd_offsets_;
    g.fwd_targets_ = bwd_targets_;
    g.bwd_offsets_ = fwd_offsets_;
    g.bwd_targets_ = fwd_targets_;
    return g;
}

DirectedGraph DirectedGraph::symmetrized() const {
    std::vector<Edge> edges = edge_list();
    edges.reserve(edges.size() * 2);
    const std::size_t orig = edges.size();
    for (std::size_t i = 0; i < orig; ++i)
        edges.emplace_back(edges[i].second, edges[i].first);
    return from_edges(std::move(edges), n_);
}

std::vector<Edge> DirectedGraph::edge_list() const {
    std::vector<Edge> edges;
    edges.reserve(m_);
    for (int v = 0; v < n_; ++v)
        for (int u : neighbors(v, Direction::Forward)) edges.emplace_back(v, u);
    return edges;
}

std::vector<int> k_hop_neighbors(const DirectedGraph& g, int v, int k,
                                 Direction dir) {
    if (v < 0 || v >= g.num_nodes()) throw ContractError("k_hop_neighbors: node out of range");
    if (k < 1) throw ContractError("k_hop_neighbors: k must be >= 1");

    std::vector<int> dist(g.num_nodes(), -1);
    std::vector<int> frontier{v};
    dist[v] = 0;
    std::vector<int> ring;
    for (int depth = 1; depth <= k && !frontier.empty(); ++depth) {
        std::vector<int> next;
        for (int u : frontier) {
            for (int w : g.neighbors(u, dir)) {
                if (dist[w] < 0) {
                    dist[w] = depth;
                    next.push_back(w);
                }
            }
        }
        frontier = std::move(next);
        if (depth == k) ring = frontier;
    }
    std::sort(ring.begin(), ring.end());
    return ring;
}

}  // namespace dhgnn
