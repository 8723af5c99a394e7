#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhgnn/dataset.hpp"
#include "dhgnn/losses.hpp"
#include "dhgnn/model.hpp"
#include "dhgnn/rng.hpp"

namespace dhgnn {

// Flat training configuration; mirrors the JSON config file key-for-key.
// The 17 core keys are required in config files, the protocol switches
// below them are optional with these defaults.
struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 0.0;
    int epochs = 1000;
    int patience = 200;
    std::uint64_t seed = 1;
    int layers = 2;
    int gate_mlp_layers = 2;
    int adj_mlp_layers = 2;
    double input_fc_dropout = 0.0;
    double dropout = 0.0;
    double adj_coef = 0.5;     // beta
    double imp_coef = 0.0;     // lambda1
    double branch_coef = 0.9;  // lambda2
    std::string task = "node";  // "node" | "link"
    int hidden = 64;
    int chunks = 8;
    double gamma = 2.0;

    bool noise_enabled = true;
    bool adj_rows_shared = false;
    double link_train_ratio = 0.8;
    double link_val_ratio = 0.1;
    double link_test_ratio = 0.1;
    bool link_direction_task = false;
    int threads = 1;
    int num_splits = 0;  // 0: splits from the dataset, or 10 generated ones

    void validate() const;
    ModelConfig model_config() const;
    Task task_kind() const;
    static TrainConfig from_json_text(const std::string& text);
    static TrainConfig from_json_file(const std::string& path);
};

struct EpochMetrics {
    int epoch = 0;
    LossBreakdown loss;
    double train_acc = 0.0, val_acc = 0.0;
    double branch_fwd_val_acc = 0.0, branch_bwd_val_acc = 0.0;
};

// Deep value copies of all parameters, in registration order.
struct ParamSnapshot {
    std::vector<std::pair<std::string, std::vector<double>>> values;
};
ParamSnapshot snapshot_params(ModelParams& mp);
void restore_params(ModelParams& mp, const ParamSnapshot& snap);

struct SplitResult {
    int split = 0;
    std::vector<EpochMetrics> history;
    int best_epoch = 0;
    double best_val_acc = 0.0;
    double test_acc = 0.0;
    double train_acc_at_best = 0.0;
    ParamSnapshot best_params;
};

struct TrainSummary {
    std::vector<SplitResult> splits;
    double mean_test_acc = 0.0, std_test_acc = 0.0;
    double mean_val_acc = 0.0;
};

// Glorot-uniform weights, zero biases; draw order = registration order.
void init_params(ModelParams& mp, Rng& rng);

std::vector<int> predict(const Tensor& logits);
double accuracy(const Tensor& logits, const std::vector<int>& labels, const std::vector<int>& mask);

// One (seed, split) node-classification run with early stopping on
// validation accuracy; returns the best-epoch parameters.
SplitResult train_node_split(const LabeledDataset& ds, const SplitMasks& split, const TrainConfig& cfg,
                             const Ablation& abl, std::uint64_t seed, int split_index);

// All splits, fanned across cfg.threads workers; per-split seeds derived
// from cfg.seed so results are independent of scheduling.
TrainSummary train_all_splits(const LabeledDataset& ds, const std::vector<SplitMasks>& splits,
                              const TrainConfig& cfg, const Ablation& abl);

// Stratified class-preserving random splits (train/val/test ratios; test
// gets the remainder). Falls back to unstratified with a warning when some
// class has fewer than 3 nodes.
std::vector<SplitMasks> make_node_splits(const std::vector<int>& labels, int num_splits,
                                         double train_ratio, double val_ratio, Rng& rng,
                                         std::string* warning = nullptr);

}  // namespace dhgnn
