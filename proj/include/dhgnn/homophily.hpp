#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dhgnn/graph.hpp"

namespace dhgnn {

// Fraction of v's exact-k-hop neighbors sharing v's label; nullopt when the
// k-hop ring is empty.
std::optional<double> node_homophily(const DirectedGraph& g,
                                     const std::vector<int>& labels, int v,
                                     int k, Direction dir);

struct HopStat {
    std::optional<double> mean;  // unset when no node contributes at this hop
    std::int64_t count = 0;      // nodes with a defined ratio at this hop
};

// Per hop k = 1..max_k, the mean of node_homophily over nodes where it is
// defined. Nodes with empty rings are excluded from the average.
std::vector<HopStat> avg_homophily_curve(const DirectedGraph& g,
                                         const std::vector<int>& labels,
                                         int max_k, Direction dir);

// Fraction of directed edges whose endpoints share a label; nullopt for m=0.
std::optional<double> edge_homophily(const DirectedGraph& g,
                                     const std::vector<int>& labels);

// C x C matrix counting edges from class-i sources to class-j targets. When
// normalize, each row is divided by its row sum (all-zero rows stay zero).
std::vector<std::vector<double>> class_connection_matrix(
    const DirectedGraph& g, const std::vector<int>& labels, int num_classes,
    bool normalize);

}  // namespace dhgnn
