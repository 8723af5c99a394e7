#include "dhgnn/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhgnn/errors.hpp"
#include "dhgnn/ops.hpp"
#include "dhgnn/optimizer.hpp"

namespace dhgnn {

namespace {

void shuffle_edges(std::vector<Edge>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_int(static_cast<int>(i))]);
}

// existence accuracy at threshold 0.5 (logit 0) over positives then negatives
double pair_accuracy(const Tensor& emb, const std::vector<Edge>& pos, const std::vector<Edge>& neg,
                     const PairScorer& sc) {
    std::vector<Edge> all = pos;
    all.insert(all.end(), neg.begin(), neg.end());
    if (all.empty()) throw ContractError("link evaluation: no pairs");
    Tensor logits = pair_logits(nullptr, emb, all, sc);
    int hits = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        bool predicted = (*logits.data)[i] > 0.0;
        bool actual = i < pos.size();
        if (predicted == actual) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(all.size());
}

std::vector<double> pair_targets(std::size_t num_pos, std::size_t num_neg) {
    std::vector<double> y(num_pos + num_neg, 0.0);
    std::fill(y.begin(), y.begin() + num_pos, 1.0);
    return y;
}

}  // namespace

LinkSplit make_link_split(const DirectedGraph& g, double train_ratio, double val_ratio,
                          double test_ratio, bool direction_task, Rng& rng) {
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw ConfigError("link split ratios must sum to 1");
    int n = g.num_nodes();
    std::vector<Edge> edges = g.edge_list();
    if (edges.empty()) throw MalformedInputError("link split: graph has no edges");
    shuffle_edges(edges, rng);

    auto m = static_cast<long>(edges.size());
    long c1 = std::clamp(std::lround(train_ratio * m), 0L, m);
    long c2 = std::clamp(std::lround((train_ratio + val_ratio) * m), c1, m);

    LinkSplit split;
    split.train_pos.assign(edges.begin(), edges.begin() + c1);
    split.val_pos.assign(edges.begin() + c1, edges.begin() + c2);
    split.test_pos.assign(edges.begin() + c2, edges.end());
    split.message_graph = DirectedGraph::from_edges(split.train_pos, n);

    if (direction_task) {
        auto reverse_negatives = [&](std::vector<Edge>& pos, std::vector<Edge>& neg) {
            std::vector<Edge> kept;
            for (auto [u, v] : pos) {
                if (u != v && !g.has_edge(v, u)) {
                    kept.emplace_back(u, v);
                    neg.emplace_back(v, u);
                }
            }
            pos = std::move(kept);
            if (pos.empty()) throw MalformedInputError("link split: no reverse-free positives for the direction task");
        };
        reverse_negatives(split.train_pos, split.train_neg);
        reverse_negatives(split.val_pos, split.val_neg);
        reverse_negatives(split.test_pos, split.test_neg);
        // direction task re-derives the message graph from the kept positives
        split.message_graph = DirectedGraph::from_edges(split.train_pos, n);
        return split;
    }

    auto possible = static_cast<long long>(n) * (n - 1);
    if (static_cast<long long>(g.num_edges()) >= possible)
        throw MalformedInputError("link split: graph too dense to sample negatives");

    std::set<Edge> taken;
    auto sample_negatives = [&](std::size_t count, std::vector<Edge>& out) {
        while (out.size() < count) {
            int u = rng.uniform_int(n), v = rng.uniform_int(n);
            if (u == v || g.has_edge(u, v)) continue;
            if (!taken.insert({u, v}).second) continue;
            out.emplace_back(u, v);
        }
    };
    sample_negatives(split.train_pos.size(), split.train_neg);
    sample_negatives(split.val_pos.size(), split.val_neg);
    sample_negatives(split.test_pos.size(), split.test_neg);
    return split;
}

LinkResult train_link(const LabeledDataset& ds, const TrainConfig& cfg, const Ablation& abl) {
    ModelConfig mc = cfg.model_config();
    mc.validate();
    Rng rng(cfg.seed);
    LinkSplit split = make_link_split(ds.graph, cfg.link_train_ratio, cfg.link_val_ratio,
                                      cfg.link_test_ratio, cfg.link_direction_task, rng);

    ModelParams mp = ModelParams::build(mc, Task::LinkPrediction, ds.feature_dim(), mc.hidden,
                                        ds.num_nodes());
    init_params(mp, rng);

    std::vector<Tensor*> ptrs;
    for (auto& [name, p] : mp.named()) ptrs.push_back(p);
    AdamW opt(ptrs, cfg.lr, cfg.weight_decay);

    std::vector<Edge> train_pairs = split.train_pos;
    train_pairs.insert(train_pairs.end(), split.train_neg.begin(), split.train_neg.end());
    std::vector<double> train_y = pair_targets(split.train_pos.size(), split.train_neg.size());

    double eff_lambda2 = abl.branch ? cfg.branch_coef : 0.0;
    bool use_imp = abl.imp && abl.fusion;

    LinkResult res;
    res.model_config = mc;
    res.best_val_acc = -1.0;
    {
        // untrained reference averaged over fresh initializations: a single
        // random draw can stray far from chance on structured graphs
        const int probes = 10;
        double acc = 0.0;
        for (int j = 0; j < probes; ++j) {
            ModelParams fresh = ModelParams::build(mc, Task::LinkPrediction, ds.feature_dim(),
                                                   mc.hidden, ds.num_nodes());
            Rng ir(Rng::derive(cfg.seed, 7000 + j));
            init_params(fresh, ir);
            ForwardResult ev = model_forward(nullptr, ds.features, split.message_graph, fresh, mc,
                                             abl, false, rng);
            acc += pair_accuracy(ev.fused, split.test_pos, split.test_neg, fresh.scorer_main);
        }
        res.untrained_test_acc = acc / probes;
    }

    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Tape tape;
        ForwardResult fr = model_forward(&tape, ds.features, split.message_graph, mp, mc, abl, true, rng);
        Tensor l_cls = bce_with_logits(&tape, pair_logits(&tape, fr.fused, train_pairs, mp.scorer_main), train_y);
        Tensor l_imp, l_bf, l_bb;
        if (use_imp) l_imp = importance_loss(&tape, fr.q);
        if (abl.branch) {
            l_bf = bce_with_logits(&tape, pair_logits(&tape, fr.h_fwd, train_pairs, mp.scorer_fwd), train_y);
            l_bb = bce_with_logits(&tape, pair_logits(&tape, fr.h_bwd, train_pairs, mp.scorer_bwd), train_y);
        }
        TotalLoss tl = total_loss(&tape, l_cls, use_imp ? &l_imp : nullptr, abl.branch ? &l_bf : nullptr,
                                  abl.branch ? &l_bb : nullptr, cfg.imp_coef, eff_lambda2);
        for (int i = 0; i < fr.q.rows; ++i) {
            tl.parts.q_sum_fwd += fr.q.at(i, 0);
            tl.parts.q_sum_bwd += fr.q.at(i, 1);
        }
        if (!std::isfinite(tl.parts.l_total))
            throw NumericalError("non-finite link loss at epoch " + std::to_string(epoch));

        opt.zero_grad();
        tape.backward(tl.value);
        opt.step();

        LinkEpochMetrics em;
        em.epoch = epoch;
        em.loss = tl.parts;
        ForwardResult ev = model_forward(nullptr, ds.features, split.message_graph, mp, mc, abl, false, rng);
        em.train_acc = pair_accuracy(ev.fused, split.train_pos, split.train_neg, mp.scorer_main);
        em.val_acc = pair_accuracy(ev.fused, split.val_pos, split.val_neg, mp.scorer_main);
        res.history.push_back(em);

        if (em.val_acc > res.best_val_acc) {
            res.best_val_acc = em.val_acc;
            res.best_epoch = epoch;
            res.best_params = snapshot_params(mp);
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    restore_params(mp, res.best_params);
    ForwardResult fin = model_forward(nullptr, ds.features, split.message_graph, mp, mc, abl, false, rng);
    res.test_acc = pair_accuracy(fin.fused, split.test_pos, split.test_neg, mp.scorer_main);

    long sensitive = 0, considered = 0;
    for (auto [u, v] : split.test_pos) {
        if (u == v) continue;
        ++considered;
        Tensor s = pair_logits(nullptr, fin.fused, {{u, v}, {v, u}}, mp.scorer_main);
        if ((*s.data)[0] != (*s.data)[1]) ++sensitive;
    }
    res.direction_sensitivity = considered ? static_cast<double>(sensitive) / considered : 0.0;
    return res;
}

}  // namespace dhgnn
