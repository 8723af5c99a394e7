#include "dhgnn/homophily.hpp"

#include "dhgnn/errors.hpp"

namespace dhgnn {

std::optional<double> node_homophily(const DirectedGraph& g,
                                     const std::vector<int>& labels, int v,
                                     int k, Direction dir) {
    std::vector<int> ring = k_hop_neighbors(g, v, k, dir);
    if (ring.empty()) return std::nullopt;
    std::int64_t same = 0;
    for (int u : ring)
        if (labels[u] == labels[v]) same++;
    return static_cast<double>(same) / static_cast<double>(ring.size());
}

std::vector<HopStat> avg_homophily_curve(const DirectedGraph& g,
                                         const std::vector<int>& labels,
                                         int max_k, Direction dir) {
    if (max_k < 1) throw ContractError("avg_homophily_curve: max_k must be >= 1");
    const int n = g.num_nodes();
    std::vector<double> sums(max_k, 0.0);
    std::vector<std::int64_t> counts(max_k, 0);

    // One BFS per node, accumulating every ring up to max_k in a single pass.
    std::vector<int> dist(n, -1);
    std::vector<int> touched;
    for (int v = 0; v < n; ++v) {
        touched.clear();
        dist[v] = 0;
        touched.push_back(v);
        std::vector<int> frontier{v};
        for (int depth = 1; depth <= max_k && !frontier.empty(); ++depth) {
            std::vector<int> next;
            std::int64_t same = 0;
            for (int u : frontier) {
                for (int w : g.neighbors(u, dir)) {
                    if (dist[w] < 0) {
                        dist[w] = depth;
                        touched.push_back(w);
                        next.push_back(w);
                        if (labels[w] == labels[v]) same++;
                    }
                }
            }
            if (!next.empty()) {
                sums[depth - 1] += static_cast<double>(same) /
                                   static_cast<double>(next.size());
                counts[depth - 1]++;
            }
            frontier = std::move(next);
        }
        for (int u : touched) dist[u] = -1;
    }

    std::vector<HopStat> curve(max_k);
    for (int k = 0; k < max_k; ++k) {
        curve[k].count = counts[k];
        if (counts[k] > 0) curve[k].mean = sums[k] / static_cast<double>(counts[k]);
    }
    return curve;
}

std::optional<double> edge_homophily(const DirectedGraph& g,
                                     const std::vector<int>& labels) {
    if (g.num_edges() == 0) return std::nullopt;
    std::int64_t same = 0;
    for (int v = 0; v < g.num_nodes(); ++v)
        for (int u : g.neighbors(v, Direction::Forward))
            if (labels[u] == labels[v]) same++;
    return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

std::vector<std::vector<double>> class_connection_matrix(
    const DirectedGraph& g, const std::vector<int>& labels, int num_classes,
    bool normalize) {
    std::vector<std::vector<double>> mat(num_classes,
                                         std::vector<double>(num_classes, 0.0));
    for (int v = 0; v < g.num_nodes(); ++v)
        for (int u : g.neighbors(v, Direction::Forward))
            mat[labels[v]][labels[u]] += 1.0;
    if (normalize) {
        for (auto& row : mat) {
            double total = 0.0;
            for (double x : row) total += x;
            if (total > 0.0)
                for (double& x : row) x /= total;
        }
    }
    return mat;
}

}  // namespace dhgnn
