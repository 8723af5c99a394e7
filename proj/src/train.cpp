#include "dhgnn/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dhgnn/errors.hpp"
#include "dhgnn/ops.hpp"
#include "dhgnn/optimizer.hpp"

using nlohmann::json;

namespace dhgnn {

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("lr must be > 0");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (patience < 1 || patience > epochs) throw ConfigError("patience must be in [1, epochs]");
    if (imp_coef < 0.0) throw ConfigError("imp_coef must be >= 0");
    if (branch_coef < 0.0 || branch_coef > 1.0) throw ConfigError("branch_coef must be in [0, 1]");
    if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
    if (task != "node" && task != "link") throw ConfigError("task must be 'node' or 'link'");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (num_splits < 0) throw ConfigError("num_splits must be >= 0");
    double rsum = link_train_ratio + link_val_ratio + link_test_ratio;
    if (link_train_ratio <= 0.0 || link_val_ratio < 0.0 || link_test_ratio <= 0.0 ||
        std::abs(rsum - 1.0) > 1e-9)
        throw ConfigError("link split ratios must be positive and sum to 1");
    model_config().validate();
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig mc;
    mc.hidden = hidden;
    mc.layers = layers;
    mc.chunks = chunks;
    mc.gate_mlp_layers = gate_mlp_layers;
    mc.adj_mlp_layers = adj_mlp_layers;
    mc.beta = adj_coef;
    mc.input_dropout = input_fc_dropout;
    mc.dropout = dropout;
    mc.noise_enabled = noise_enabled;
    mc.adj_rows_shared = adj_rows_shared;
    return mc;
}

Task TrainConfig::task_kind() const {
    return task == "link" ? Task::LinkPrediction : Task::NodeClassification;
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

    TrainConfig cfg;
    std::set<std::string> seen;
    auto required = [&](const char* key) -> const json& {
        auto it = j.find(key);
        if (it == j.end()) throw ConfigError(std::string("missing config key '") + key + "'");
        seen.insert(key);
        return *it;
    };
    auto optional = [&](const char* key) -> const json* {
        auto it = j.find(key);
        if (it == j.end()) return nullptr;
        seen.insert(key);
        return &*it;
    };
    auto read = [&](const json& v, auto& dst, const char* key) {
        try {
            dst = v.get<std::decay_t<decltype(dst)>>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    };

    read(required("lr"), cfg.lr, "lr");
    read(required("weight_decay"), cfg.weight_decay, "weight_decay");
    read(required("epochs"), cfg.epochs, "epochs");
    read(required("patience"), cfg.patience, "patience");
    read(required("seed"), cfg.seed, "seed");
    read(required("layers"), cfg.layers, "layers");
    read(required("gate_mlp_layers"), cfg.gate_mlp_layers, "gate_mlp_layers");
    read(required("adj_mlp_layers"), cfg.adj_mlp_layers, "adj_mlp_layers");
    read(required("input_fc_dropout"), cfg.input_fc_dropout, "input_fc_dropout");
    read(required("dropout"), cfg.dropout, "dropout");
    read(required("adj_coef"), cfg.adj_coef, "adj_coef");
    read(required("imp_coef"), cfg.imp_coef, "imp_coef");
    read(required("branch_coef"), cfg.branch_coef, "branch_coef");
    read(required("task"), cfg.task, "task");
    read(required("hidden"), cfg.hidden, "hidden");
    read(required("chunks"), cfg.chunks, "chunks");
    read(required("gamma"), cfg.gamma, "gamma");

    if (const json* v = optional("noise_enabled")) read(*v, cfg.noise_enabled, "noise_enabled");
    if (const json* v = optional("adj_rows_shared")) read(*v, cfg.adj_rows_shared, "adj_rows_shared");
    if (const json* v = optional("link_train_ratio")) read(*v, cfg.link_train_ratio, "link_train_ratio");
    if (const json* v = optional("link_val_ratio")) read(*v, cfg.link_val_ratio, "link_val_ratio");
    if (const json* v = optional("link_test_ratio")) read(*v, cfg.link_test_ratio, "link_test_ratio");
    if (const json* v = optional("link_direction_task")) read(*v, cfg.link_direction_task, "link_direction_task");
    if (const json* v = optional("threads")) read(*v, cfg.threads, "threads");
    if (const json* v = optional("num_splits")) read(*v, cfg.num_splits, "num_splits");

    for (auto it = j.begin(); it != j.end(); ++it)
        if (!seen.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");

    cfg.validate();
    return cfg;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::vector<int> predict(const Tensor& logits) {
    std::vector<int> out(logits.rows);
    for (int i = 0; i < logits.rows; ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels, const std::vector<int>& mask) {
    if (mask.empty()) throw ContractError("accuracy: empty mask");
    int hits = 0;
    for (int i : mask) {
        int best = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        if (best == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(mask.size());
}

namespace {

Tensor linear_head(Tape* t, const Tensor& h, const LinearHead& head) {
    return add(t, matmul(t, h, head.w), head.b);
}

}  // namespace

SplitResult train_node_split(const LabeledDataset& ds, const SplitMasks& split, const TrainConfig& cfg,
                             const Ablation& abl, std::uint64_t seed, int split_index) {
    if (split.train.empty() || split.val.empty() || split.test.empty())
        throw ContractError("train: split has an empty mask");
    ModelConfig mc = cfg.model_config();
    Rng rng(seed);
    ModelParams mp = ModelParams::build(mc, Task::NodeClassification, ds.feature_dim(), ds.num_classes,
                                        ds.num_nodes());
    init_params(mp, rng);

    std::vector<Tensor*> ptrs;
    for (auto& [name, p] : mp.named()) ptrs.push_back(p);
    AdamW opt(ptrs, cfg.lr, cfg.weight_decay);

    double eff_lambda2 = abl.branch ? cfg.branch_coef : 0.0;
    bool use_imp = abl.imp && abl.fusion;  // constant q makes the term identically 0

    SplitResult res;
    res.split = split_index;
    res.best_val_acc = -1.0;
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Tape tape;
        ForwardResult fr = model_forward(&tape, ds.features, ds.graph, mp, mc, abl, true, rng);
        Tensor l_cls = focal_loss(&tape, fr.fused, ds.labels, split.train, cfg.gamma);
        Tensor l_imp, l_bf, l_bb;
        if (use_imp) l_imp = importance_loss(&tape, fr.q);
        if (abl.branch) {
            l_bf = cross_entropy(&tape, linear_head(&tape, fr.h_fwd, mp.branch_fwd), ds.labels, split.train);
            l_bb = cross_entropy(&tape, linear_head(&tape, fr.h_bwd, mp.branch_bwd), ds.labels, split.train);
        }
        TotalLoss tl = total_loss(&tape, l_cls, use_imp ? &l_imp : nullptr, abl.branch ? &l_bf : nullptr,
                                  abl.branch ? &l_bb : nullptr, cfg.imp_coef, eff_lambda2);
        for (int i = 0; i < fr.q.rows; ++i) {
            tl.parts.q_sum_fwd += fr.q.at(i, 0);
            tl.parts.q_sum_bwd += fr.q.at(i, 1);
        }
        if (!std::isfinite(tl.parts.l_total))
            throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));

        opt.zero_grad();
        tape.backward(tl.value);
        opt.step();

        EpochMetrics em;
        em.epoch = epoch;
        em.loss = tl.parts;
        ForwardResult ev = model_forward(nullptr, ds.features, ds.graph, mp, mc, abl, false, rng);
        em.train_acc = accuracy(ev.fused, ds.labels, split.train);
        em.val_acc = accuracy(ev.fused, ds.labels, split.val);
        if (abl.branch) {
            em.branch_fwd_val_acc = accuracy(linear_head(nullptr, ev.h_fwd, mp.branch_fwd), ds.labels, split.val);
            em.branch_bwd_val_acc = accuracy(linear_head(nullptr, ev.h_bwd, mp.branch_bwd), ds.labels, split.val);
        }
        res.history.push_back(em);

        if (em.val_acc > res.best_val_acc) {
            res.best_val_acc = em.val_acc;
            res.best_epoch = epoch;
            res.train_acc_at_best = em.train_acc;
            res.best_params = snapshot_params(mp);
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    restore_params(mp, res.best_params);
    ForwardResult fin = model_forward(nullptr, ds.features, ds.graph, mp, mc, abl, false, rng);
    res.test_acc = accuracy(fin.fused, ds.labels, split.test);
    return res;
}

TrainSummary train_all_splits(const LabeledDataset& ds, const std::vector<SplitMasks>& splits,
                              const TrainConfig& cfg, const Ablation& abl) {
    if (splits.empty()) throw ContractError("train: no splits given");
    TrainSummary summary;
    summary.splits.resize(splits.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            std::size_t k = next.fetch_add(1);
            if (k >= splits.size()) break;
            try {
                summary.splits[k] = train_node_split(ds, splits[k], cfg, abl,
                                                     Rng::derive(cfg.seed, k), static_cast<int>(k));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(splits.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    double mean = 0.0, mean_val = 0.0;
    for (const auto& r : summary.splits) {
        mean += r.test_acc;
        mean_val += r.best_val_acc;
    }
    mean /= summary.splits.size();
    mean_val /= summary.splits.size();
    double var = 0.0;
    for (const auto& r : summary.splits) var += (r.test_acc - mean) * (r.test_acc - mean);
    summary.mean_test_acc = mean;
    summary.std_test_acc = std::sqrt(var / summary.splits.size());
    summary.mean_val_acc = mean_val;
    return summary;
}

}  // namespace dhgnn
