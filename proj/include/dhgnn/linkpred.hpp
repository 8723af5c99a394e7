#pragma once

#include <vector>

#include "dhgnn/dataset.hpp"
#include "dhgnn/train.hpp"

namespace dhgnn {

struct LinkSplit {
    std::vector<Edge> train_pos, val_pos, test_pos;
    std::vector<Edge> train_neg, val_neg, test_neg;
    DirectedGraph message_graph;  // train positives only; held-out edges never message
};

// Partitions the edges and samples matching negatives. Existence task:
// negatives are uniform directed non-edges of the ORIGINAL graph (reversed
// pairs allowed when the reverse edge is absent). Direction task: the
// negative of each positive (u,v) is (v,u), keeping only positives whose
// reverse is a non-edge.
LinkSplit make_link_split(const DirectedGraph& g, double train_ratio, double val_ratio,
                          double test_ratio, bool direction_task, Rng& rng);

struct LinkEpochMetrics {
    int epoch = 0;
    LossBreakdown loss;
    double train_acc = 0.0, val_acc = 0.0;
};

struct LinkResult {
    std::vector<LinkEpochMetrics> history;
    int best_epoch = 0;
    double best_val_acc = 0.0;
    double test_acc = 0.0;
    double untrained_test_acc = 0.0;   // initial parameters, before any step
    double direction_sensitivity = 0.0;  // test positives with score(u,v) != score(v,u)
    ParamSnapshot best_params;
    ModelConfig model_config;
};

// Full link-prediction run: encoders + fusion on the message graph, pair
// scorers trained with binary cross-entropy under the usual objective
// composition and stop-gradient wiring.
LinkResult train_link(const LabeledDataset& ds, const TrainConfig& cfg, const Ablation& abl);

}  // namespace dhgnn
