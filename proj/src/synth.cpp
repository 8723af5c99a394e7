#include "dhgnn/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dhgnn/errors.hpp"

namespace dhgnn {

namespace {

void shuffle_in_place(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_int(static_cast<int>(i))]);
}

// Shuffled receiver pool handed out round-robin so in-degrees stay even.
struct Pool {
    std::vector<int> nodes;
    std::size_t cursor = 0;
    bool empty() const { return nodes.empty(); }
    int next(int avoid) {
        int t = nodes[cursor++ % nodes.size()];
        if (t == avoid && nodes.size() > 1) t = nodes[cursor++ % nodes.size()];
        return t;
    }
};

}  // namespace

LabeledDataset synth_directed_homophily(int n, int num_classes, double fwd_hom, double bwd_hom,
                                        int avg_out_degree, double feature_noise, Rng& rng) {
    if (n < 2 || num_classes < 2 || num_classes > n) throw ConfigError("synth: need n >= 2 and 2 <= classes <= n");
    if (fwd_hom < 0.0 || fwd_hom > 1.0 || bwd_hom < 0.0 || bwd_hom > 1.0)
        throw ConfigError("synth: homophily targets must be in [0, 1]");
    if (avg_out_degree < 1) throw ConfigError("synth: degree must be >= 1");
    if (feature_noise < 0.0) throw ConfigError("synth: feature noise must be >= 0");

    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % num_classes;
    shuffle_in_place(labels, rng);

    // Per class, intra-receivers (fraction bwd_hom) vs inter-receivers.
    std::vector<Pool> intra_pool(num_classes), inter_pool(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (labels[i] == c) members.push_back(i);
        shuffle_in_place(members, rng);
        auto g1 = static_cast<std::size_t>(std::clamp<long>(
            std::lround(bwd_hom * static_cast<double>(members.size())), 0L, static_cast<long>(members.size())));
        intra_pool[c].nodes.assign(members.begin(), members.begin() + g1);
        inter_pool[c].nodes.assign(members.begin() + g1, members.end());
    }

    // Emitter roles: a fwd_hom share of nodes sends only intra-class edges,
    // the rest only inter-class ones. Inter emitters run hotter (up to 2.5x
    // the average degree) so the cross-class edges carry real mass; the
    // leftover budget spreads evenly over the intra emitters.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    shuffle_in_place(order, rng);
    int n_inter = static_cast<int>(std::clamp<long>(std::lround((1.0 - fwd_hom) * n), 0L, n));
    std::vector<bool> inter_emitter(n, false);
    for (int i = 0; i < n_inter; ++i) inter_emitter[order[i]] = true;
    long total = static_cast<long>(n) * avg_out_degree;
    int n_intra_emit = n - n_inter;
    long k_inter = 0;
    if (n_inter > 0) {
        k_inter = std::min<long>(std::lround(2.5 * avg_out_degree),
                                 (total - n_intra_emit) / n_inter);
        k_inter = std::max<long>(k_inter, 1);
    }
    long intra_budget = total - k_inter * n_inter;

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(total));
    long handed = 0;
    int intra_seen = 0;
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        int own = labels[v];
        long quota;
        if (inter_emitter[v]) {
            quota = k_inter;
        } else {
            // even split of the remaining budget across intra emitters
            ++intra_seen;
            quota = intra_budget * intra_seen / n_intra_emit - handed;
            handed += quota;
        }
        for (long e = 0; e < quota; ++e) {
            int cls = own;
            if (inter_emitter[v]) {
                int other = rng.uniform_int(num_classes - 1);
                cls = other >= own ? other + 1 : other;
            }
            bool intra = !inter_emitter[v];
            Pool& pool = intra ? (intra_pool[cls].empty() ? inter_pool[cls] : intra_pool[cls])
                               : (inter_pool[cls].empty() ? intra_pool[cls] : inter_pool[cls]);
            int target = pool.next(v);
            if (target == v) continue;  // lone candidate was the emitter itself
            edges.emplace_back(v, target);
        }
    }

    LabeledDataset ds;
    ds.graph = DirectedGraph::from_edges(std::move(edges), n);
    ds.labels = std::move(labels);
    ds.num_classes = num_classes;
    // feature_noise mixes the class centroid with white noise: 0 keeps the
    // exact one-hot, 1 leaves nothing but noise
    double signal = std::max(0.0, 1.0 - feature_noise);
    ds.features = Tensor::zeros(n, num_classes);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < num_classes; ++j)
            ds.features.at(i, j) = (j == ds.labels[i] ? signal : 0.0) + feature_noise * rng.normal();
    return ds;
}

}  // namespace dhgnn
