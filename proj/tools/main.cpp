#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhgnn/checkpoint.hpp"
#include "dhgnn/dataset.hpp"
#include "dhgnn/errors.hpp"
#include "dhgnn/gradcheck.hpp"
#include "dhgnn/homophily.hpp"
#include "dhgnn/linkpred.hpp"
#include "dhgnn/losses.hpp"
#include "dhgnn/model.hpp"
#include "dhgnn/ops.hpp"
#include "dhgnn/synth.hpp"
#include "dhgnn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dhgnn;

namespace {

json config_to_json(const TrainConfig& c) {
    return json{{"lr", c.lr},
                {"weight_decay", c.weight_decay},
                {"epochs", c.epochs},
                {"patience", c.patience},
                {"seed", c.seed},
                {"layers", c.layers},
                {"gate_mlp_layers", c.gate_mlp_layers},
                {"adj_mlp_layers", c.adj_mlp_layers},
                {"input_fc_dropout", c.input_fc_dropout},
                {"dropout", c.dropout},
                {"adj_coef", c.adj_coef},
                {"imp_coef", c.imp_coef},
                {"branch_coef", c.branch_coef},
                {"task", c.task},
                {"hidden", c.hidden},
                {"chunks", c.chunks},
                {"gamma", c.gamma},
                {"noise_enabled", c.noise_enabled},
                {"adj_rows_shared", c.adj_rows_shared},
                {"link_train_ratio", c.link_train_ratio},
                {"link_val_ratio", c.link_val_ratio},
                {"link_test_ratio", c.link_test_ratio},
                {"link_direction_task", c.link_direction_task},
                {"threads", c.threads},
                {"num_splits", c.num_splits}};
}

json loss_to_json(const EpochMetrics& em) {
    return json{{"epoch", em.epoch},
                {"l_cls", em.loss.l_cls},
                {"l_imp", em.loss.l_imp},
                {"l_branch_fwd", em.loss.l_branch_fwd},
                {"l_branch_bwd", em.loss.l_branch_bwd},
                {"l_total", em.loss.l_total},
                {"lambda1", em.loss.lambda1},
                {"lambda2", em.loss.lambda2},
                {"q_sum_fwd", em.loss.q_sum_fwd},
                {"q_sum_bwd", em.loss.q_sum_bwd},
                {"train_acc", em.train_acc},
                {"val_acc", em.val_acc},
                {"branch_fwd_val_acc", em.branch_fwd_val_acc},
                {"branch_bwd_val_acc", em.branch_bwd_val_acc}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw MalformedInputError("cannot open for writing: " + path.string());
    out << text;
    if (!out.flush()) throw MalformedInputError("write failed: " + path.string());
}

std::vector<SplitMasks> resolve_splits(const LabeledDataset& ds, const TrainConfig& cfg) {
    if (cfg.num_splits == 0 && !ds.splits.empty()) return ds.splits;
    int count = cfg.num_splits == 0 ? 10 : cfg.num_splits;
    Rng rng(Rng::derive(cfg.seed, 0x53504c49));  // independent stream for splits
    std::string warning;
    auto splits = make_node_splits(ds.labels, count, 0.48, 0.32, rng, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    return splits;
}

Ablation parse_off(const std::string& list) {
    Ablation abl;
    if (list.empty()) return abl;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t pos = list.find(',', start);
        std::string tok = list.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        if (tok == "gate") abl.gate = false;
        else if (tok == "resgate") abl.resgate = false;
        else if (tok == "fusion") abl.fusion = false;
        else if (tok == "branch") abl.branch = false;
        else if (tok == "imp") abl.imp = false;
        else throw ConfigError("unknown ablation component '" + tok + "'");
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return abl;
}

void save_split_checkpoint(const fs::path& path, const LabeledDataset& ds, const TrainConfig& cfg,
                           const ParamSnapshot& snap) {
    ModelConfig mc = cfg.model_config();
    ModelParams mp = ModelParams::build(mc, Task::NodeClassification, ds.feature_dim(), ds.num_classes,
                                        ds.num_nodes());
    restore_params(mp, snap);
    save_checkpoint(path.string(), mp, mc);
}

// ---------------------------------------------------------------- analyze

void cmd_analyze(const std::string& data_dir, int max_hops, const std::string& out_file) {
    if (max_hops < 1) throw ConfigError("--max-hops must be >= 1");
    LabeledDataset ds = load_dataset(data_dir);

    json report;
    report["nodes"] = ds.num_nodes();
    report["edges"] = ds.graph.num_edges();
    report["classes"] = ds.num_classes;
    auto eh = edge_homophily(ds.graph, ds.labels);
    report["edge_homophily"] = eh ? json(*eh) : json(nullptr);

    std::string csv = "hop,direction,mean_homophily,count\n";
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
        auto curve = avg_homophily_curve(ds.graph, ds.labels, max_hops, dir);
        json arr = json::array();
        for (int k = 1; k <= max_hops; ++k) {
            const auto& stat = curve[k - 1];
            arr.push_back({{"hop", k},
                           {"mean", stat.mean ? json(*stat.mean) : json(nullptr)},
                           {"count", stat.count}});
            char buf[96];
            if (stat.mean)
                std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%lld\n", k, direction_name(dir), *stat.mean,
                              static_cast<long long>(stat.count));
            else
                std::snprintf(buf, sizeof buf, "%d,%s,,%lld\n", k, direction_name(dir),
                              static_cast<long long>(stat.count));
            csv += buf;
        }
        report["homophily_curves"][direction_name(dir)] = arr;
    }

    report["class_connection"]["raw"] = class_connection_matrix(ds.graph, ds.labels, ds.num_classes, false);
    report["class_connection"]["normalized"] =
        class_connection_matrix(ds.graph, ds.labels, ds.num_classes, true);

    write_text(out_file, report.dump(2) + "\n");
    write_text(fs::path(out_file).replace_extension(".csv"), csv);
}

// ------------------------------------------------------------------ train

void cmd_train(const std::string& data_dir, const std::string& config_file, const std::string& out_dir) {
    TrainConfig cfg = TrainConfig::from_json_file(config_file);
    if (cfg.task != "node") throw ConfigError("train runs node classification; use linkpred for task 'link'");
    LabeledDataset ds = load_dataset(data_dir);
    auto splits = resolve_splits(ds, cfg);

    TrainSummary summary = train_all_splits(ds, splits, cfg, Ablation{});

    fs::create_directories(out_dir);
    json per_split = json::array();
    for (const auto& r : summary.splits) {
        std::string log;
        for (const auto& em : r.history) log += loss_to_json(em).dump() + "\n";
        write_text(fs::path(out_dir) / ("split_" + std::to_string(r.split) + ".jsonl"), log);
        save_split_checkpoint(fs::path(out_dir) / ("best_" + std::to_string(r.split) + ".ckpt"), ds, cfg,
                              r.best_params);
        per_split.push_back({{"split", r.split},
                             {"best_epoch", r.best_epoch},
                             {"val_acc", r.best_val_acc},
                             {"test_acc", r.test_acc},
                             {"train_acc_at_best", r.train_acc_at_best},
                             {"epochs_run", static_cast<int>(r.history.size())}});
    }
    json out{{"task", "node"},
             {"splits", static_cast<int>(summary.splits.size())},
             {"mean_test_acc", summary.mean_test_acc},
             {"std_test_acc", summary.std_test_acc},
             {"mean_val_acc", summary.mean_val_acc},
             {"per_split", per_split},
             {"config", config_to_json(cfg)}};
    write_text(fs::path(out_dir) / "summary.json", out.dump(2) + "\n");
    std::cout << "mean_test_acc " << summary.mean_test_acc << " std " << summary.std_test_acc << "\n";
}

// ------------------------------------------------------------------- eval

void cmd_eval(const std::string& ckpt_file, const std::string& data_dir, int split_index,
              const std::string& out_file) {
    LoadedModel lm = load_checkpoint(ckpt_file);
    if (lm.params.task != Task::NodeClassification)
        throw MalformedInputError("eval supports node-classification checkpoints only");
    LabeledDataset ds = load_dataset(data_dir);
    if (lm.params.enc_fwd.in_w.rows != ds.feature_dim())
        throw MalformedInputError("checkpoint feature dimension does not match dataset");
    if (lm.params.fusion.adj.ws[0].rows != ds.num_nodes())
        throw MalformedInputError("checkpoint node count does not match dataset");
    if (lm.params.fusion.out_w.cols != ds.num_classes)
        throw MalformedInputError("checkpoint class count does not match dataset");

    Rng rng(0);
    ForwardResult fr = model_forward(nullptr, ds.features, ds.graph, lm.params, lm.config, Ablation{},
                                     false, rng);
    json out;
    if (ds.splits.empty()) {
        std::vector<int> all(ds.num_nodes());
        for (int i = 0; i < ds.num_nodes(); ++i) all[i] = i;
        out = json{{"all_acc", accuracy(fr.fused, ds.labels, all)}};
    } else {
        if (split_index < 0 || split_index >= static_cast<int>(ds.splits.size()))
            throw MalformedInputError("--split-index out of range");
        const auto& s = ds.splits[split_index];
        out = json{{"split", split_index},
                   {"train_acc", accuracy(fr.fused, ds.labels, s.train)},
                   {"val_acc", accuracy(fr.fused, ds.labels, s.val)},
                   {"test_acc", accuracy(fr.fused, ds.labels, s.test)}};
    }
    std::string text = out.dump(2) + "\n";
    if (!out_file.empty()) write_text(out_file, text);
    std::cout << text;
}

// --------------------------------------------------------------- linkpred

void cmd_linkpred(const std::string& data_dir, const std::string& config_file, const std::string& out_dir) {
    TrainConfig cfg = TrainConfig::from_json_file(config_file);
    if (cfg.task != "link") throw ConfigError("linkpred needs a config with task 'link'");
    LabeledDataset ds = load_dataset(data_dir);

    LinkResult res = train_link(ds, cfg, Ablation{});

    fs::create_directories(out_dir);
    std::string log;
    for (const auto& em : res.history) {
        json line{{"epoch", em.epoch},
                  {"l_cls", em.loss.l_cls},
                  {"l_imp", em.loss.l_imp},
                  {"l_branch_fwd", em.loss.l_branch_fwd},
                  {"l_branch_bwd", em.loss.l_branch_bwd},
                  {"l_total", em.loss.l_total},
                  {"lambda1", em.loss.lambda1},
                  {"lambda2", em.loss.lambda2},
                  {"q_sum_fwd", em.loss.q_sum_fwd},
                  {"q_sum_bwd", em.loss.q_sum_bwd},
                  {"train_acc", em.train_acc},
                  {"val_acc", em.val_acc}};
        log += line.dump() + "\n";
    }
    write_text(fs::path(out_dir) / "history.jsonl", log);

    ModelParams mp = ModelParams::build(res.model_config, Task::LinkPrediction, ds.feature_dim(),
                                        res.model_config.hidden, ds.num_nodes());
    restore_params(mp, res.best_params);
    save_checkpoint((fs::path(out_dir) / "best.ckpt").string(), mp, res.model_config);

    json out{{"task", "link"},
             {"best_epoch", res.best_epoch},
             {"best_val_acc", res.best_val_acc},
             {"test_acc", res.test_acc},
             {"untrained_test_acc", res.untrained_test_acc},
             {"direction_sensitivity", res.direction_sensitivity},
             {"config", config_to_json(cfg)}};
    write_text(fs::path(out_dir) / "summary.json", out.dump(2) + "\n");
    std::cout << "test_acc " << res.test_acc << " untrained " << res.untrained_test_acc
              << " direction_sensitivity " << res.direction_sensitivity << "\n";
}

// -------------------------------------------------------------- gate-dump

void cmd_gate_dump(const std::string& ckpt_file, const std::string& data_dir, int layers,
                   const std::string& out_file) {
    LoadedModel lm = load_checkpoint(ckpt_file);
    LabeledDataset ds = load_dataset(data_dir);
    if (lm.params.enc_fwd.in_w.rows != ds.feature_dim())
        throw MalformedInputError("checkpoint feature dimension does not match dataset");
    if (lm.params.fusion.adj.ws[0].rows != ds.num_nodes())
        throw MalformedInputError("checkpoint node count does not match dataset");

    Rng rng(0);
    ForwardResult fr = model_forward(nullptr, ds.features, ds.graph, lm.params, lm.config, Ablation{},
                                     false, rng, true);

    int dump_layers = layers > 0 ? std::min(layers, lm.config.layers) : lm.config.layers;
    std::string csv = "layer,direction,node,chunk_index,gate_value\n";
    char buf[96];
    for (int l = 0; l < dump_layers; ++l) {
        for (Direction dir : {Direction::Forward, Direction::Backward}) {
            const Tensor& g = dir == Direction::Forward ? fr.trace_fwd.g_tilde[l] : fr.trace_bwd.g_tilde[l];
            for (int v = 0; v < g.rows; ++v)
                for (int c = 0; c < g.cols; ++c) {
                    std::snprintf(buf, sizeof buf, "%d,%s,%d,%d,%.17g\n", l, direction_name(dir), v, c,
                                  g.at(v, c));
                    csv += buf;
                }
        }
    }
    write_text(out_file, csv);
}

// -------------------------------------------------------------- gradcheck

int cmd_gradcheck(int size, double tol, std::uint64_t seed, bool corrupt) {
    if (size < 4) throw ConfigError("--size must be >= 4");
    Rng gen(Rng::derive(seed, 11));
    LabeledDataset ds = synth_directed_homophily(size, 3, 0.8, 0.2, 3, 0.3, gen);

    ModelConfig mc;
    mc.hidden = 8;
    mc.chunks = 4;
    mc.layers = 2;
    mc.gate_mlp_layers = 2;
    mc.adj_mlp_layers = 2;
    mc.beta = 0.5;
    mc.input_dropout = 0.0;
    mc.dropout = 0.0;
    mc.noise_enabled = false;  // objective must be deterministic here
    double lambda1 = 0.5, lambda2 = 0.6, gamma = 2.0;

    ModelParams mp = ModelParams::build(mc, Task::NodeClassification, ds.feature_dim(), ds.num_classes,
                                        ds.num_nodes());
    Rng init_rng(seed);
    init_params(mp, init_rng);
    // check at a generic point: zero-initialized biases park the relu
    // pre-activations of empty adjacency rows exactly on the kink, where
    // central differences and the one-sided subgradient legitimately differ
    Rng nudge(Rng::derive(seed, 12));
    for (auto& [name, p] : mp.named())
        for (auto& v : *p->data) v += nudge.uniform(0.02, 0.08);

    std::vector<int> mask(ds.num_nodes());
    for (int i = 0; i < ds.num_nodes(); ++i) mask[i] = i;
    Ablation abl;

    auto loss_terms = [&](Tape* t, bool with_branch, bool with_cls) {
        Rng r(0);  // no stochastic ops are enabled; never consumed
        ForwardResult fr = model_forward(t, ds.features, ds.graph, mp, mc, abl, true, r);
        Tensor l_cls = focal_loss(t, fr.fused, ds.labels, mask, gamma);
        Tensor l_imp = importance_loss(t, fr.q);
        if (!with_branch) return total_loss(t, l_cls, &l_imp, nullptr, nullptr, lambda1, 0.0).value;
        Tensor l_bf = cross_entropy(t, add(t, matmul(t, fr.h_fwd, mp.branch_fwd.w), mp.branch_fwd.b),
                                    ds.labels, mask);
        Tensor l_bb = cross_entropy(t, add(t, matmul(t, fr.h_bwd, mp.branch_bwd.w), mp.branch_bwd.b),
                                    ds.labels, mask);
        if (!with_cls) return scale(t, add(t, l_bf, l_bb), 0.5);
        return total_loss(t, l_cls, &l_imp, &l_bf, &l_bb, lambda1, lambda2).value;
    };

    auto params = mp.named();
    double* probe = mp.enc_fwd.in_w.ptr();  // corrupt hook reads this weight
    auto skew = [&](Tape* t, Tensor loss) {
        if (corrupt && t == nullptr) {
            // skew only the numeric probes so analytic and numeric disagree
            Tensor skewed = Tensor::zeros(1, 1);
            (*skewed.data)[0] = loss.scalar() * 1.001 + 0.001 * std::sin(100.0 * probe[0]);
            return skewed;
        }
        return loss;
    };

    // The fused head trains on frozen encoder outputs, so its parameters are
    // probed against the full objective while encoder and branch parameters
    // are probed against the branch objective, whose numeric derivative is
    // the one the tape is supposed to reproduce.
    std::vector<std::pair<std::string, Tensor*>> fusion_group, encoder_group;
    for (auto& [name, p] : params) {
        if (name.rfind("fusion.", 0) == 0) fusion_group.emplace_back(name, p);
        else encoder_group.emplace_back(name, p);
    }
    GradCheckReport rep_fused = grad_check_params(
        [&](Tape* t) { return skew(t, loss_terms(t, true, true)); }, fusion_group, 1e-5, tol);
    GradCheckReport rep_enc = grad_check_params(
        [&](Tape* t) { return skew(t, loss_terms(t, true, false)); }, encoder_group, 1e-5, tol);
    GradCheckReport rep = rep_fused.max_rel_error >= rep_enc.max_rel_error ? rep_fused : rep_enc;
    rep.pass = rep_fused.pass && rep_enc.pass;
    rep.checked = rep_fused.checked + rep_enc.checked;
    std::printf("gradcheck: %zu entries checked, max rel err %.3e at %s[%zu] (analytic %.6e, numeric %.6e)\n",
                rep.checked, rep.max_rel_error, rep.worst_param.c_str(), rep.worst_index,
                rep.worst_analytic, rep.worst_numeric);

    // stop-gradient: the classification+importance path must not touch the
    // encoders; the branch path must not touch fusion parameters
    for (auto& [name, p] : params) p->zero_grad();
    {
        Tape tape;
        Tensor loss = loss_terms(&tape, false, true);
        tape.backward(loss);
    }
    std::size_t encoder_nonzero = 0;
    for (auto& [name, p] : params)
        if (name.rfind("enc.", 0) == 0)
            for (double gv : *p->grad)
                if (gv != 0.0) ++encoder_nonzero;
    std::printf("stop-gradient: encoder entries touched by cls+imp path = %zu\n", encoder_nonzero);

    for (auto& [name, p] : params) p->zero_grad();
    {
        Tape tape;
        Tensor loss = loss_terms(&tape, true, false);
        tape.backward(loss);
    }
    std::size_t fusion_nonzero = 0, encoder_covered = 0;
    for (auto& [name, p] : params) {
        if (name.rfind("fusion.", 0) == 0)
            for (double gv : *p->grad)
                if (gv != 0.0) ++fusion_nonzero;
        if (name.rfind("enc.", 0) == 0)
            for (double gv : *p->grad)
                if (gv != 0.0) ++encoder_covered;
    }
    std::printf("branch isolation: fusion entries touched by branch path = %zu\n", fusion_nonzero);
    std::printf("branch coverage: encoder entries with nonzero branch gradient = %zu\n", encoder_covered);

    bool ok = rep.pass && encoder_nonzero == 0 && fusion_nonzero == 0 && encoder_covered > 0;
    std::printf("gradcheck %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

// ------------------------------------------------------------------ synth

void cmd_synth(int n, int classes, double fwd_hom, double bwd_hom, int degree, double noise,
               const std::string& out_dir, std::uint64_t seed, int num_splits) {
    Rng rng(seed);
    LabeledDataset ds = synth_directed_homophily(n, classes, fwd_hom, bwd_hom, degree, noise, rng);
    if (num_splits > 0) {
        std::string warning;
        ds.splits = make_node_splits(ds.labels, num_splits, 0.48, 0.32, rng, &warning);
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    }
    save_dataset(out_dir, ds);
}

// ----------------------------------------------------------------- ablate

void cmd_ablate(const std::string& data_dir, const std::string& config_file, const std::string& off_list,
                bool grid, int seeds, bool symmetrize, const std::string& out_file) {
    TrainConfig cfg = TrainConfig::from_json_file(config_file);
    if (cfg.task != "node") throw ConfigError("ablate runs node classification configs");
    if (seeds < 1) throw ConfigError("--seeds must be >= 1");

    std::vector<std::string> requested;
    {
        Ablation probe = parse_off(off_list);  // validates names
        if (!probe.gate) requested.push_back("gate");
        if (!probe.resgate) requested.push_back("resgate");
        if (!probe.fusion) requested.push_back("fusion");
        if (!probe.branch) requested.push_back("branch");
        if (!probe.imp) requested.push_back("imp");
    }

    LabeledDataset ds = load_dataset(data_dir);
    if (symmetrize) ds.graph = ds.graph.symmetrized();
    auto splits = resolve_splits(ds, cfg);
    const SplitMasks& split = splits[0];

    std::vector<std::vector<std::string>> combos;
    if (grid) {
        for (std::size_t bits = 0; bits < (1u << requested.size()); ++bits) {
            std::vector<std::string> combo;
            for (std::size_t i = 0; i < requested.size(); ++i)
                if (bits & (1u << i)) combo.push_back(requested[i]);
            combos.push_back(std::move(combo));
        }
    } else {
        combos.push_back({});
        if (!requested.empty()) combos.push_back(requested);
    }

    json rows = json::array();
    double full_mean = 0.0;
    for (const auto& combo : combos) {
        std::string joined;
        for (const auto& c : combo) joined += (joined.empty() ? "" : ",") + c;
        Ablation abl = parse_off(joined);

        json per_run = json::array();
        double mean = 0.0;
        std::vector<double> accs;
        for (int s = 0; s < seeds; ++s) {
            std::uint64_t run_seed = seeds == 1 ? cfg.seed : Rng::derive(cfg.seed, s);
            SplitResult r = train_node_split(ds, split, cfg, abl, run_seed, 0);
            per_run.push_back({{"seed", run_seed}, {"test_acc", r.test_acc}, {"val_acc", r.best_val_acc}});
            accs.push_back(r.test_acc);
            mean += r.test_acc;
        }
        mean /= seeds;
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        if (combo.empty()) full_mean = mean;
        rows.push_back({{"off", combo},
                        {"mean_test_acc", mean},
                        {"std_test_acc", std::sqrt(var / seeds)},
                        {"delta_vs_full", mean - full_mean},
                        {"per_run", per_run}});
        std::cout << "off=[" << joined << "] mean_test_acc " << mean << "\n";
    }
    json out{{"symmetrized", symmetrize}, {"seeds", seeds}, {"rows", rows}, {"config", config_to_json(cfg)}};
    write_text(out_file, out.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"directed homophily-aware graph network toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    // analyze
    std::string an_data, an_out;
    int an_hops = 3;
    auto* analyze = app.add_subcommand("analyze", "homophily and structure diagnostics");
    analyze->add_option("--data", an_data, "dataset directory")->required();
    analyze->add_option("--max-hops", an_hops, "hop range for the homophily curves");
    analyze->add_option("--out", an_out, "report JSON path (CSV companion written next to it)")->required();
    analyze->callback([&] { cmd_analyze(an_data, an_hops, an_out); });

    // train
    std::string tr_data, tr_cfg, tr_out;
    auto* train = app.add_subcommand("train", "node-classification training across splits");
    train->add_option("--data", tr_data, "dataset directory")->required();
    train->add_option("--config", tr_cfg, "JSON config file")->required();
    train->add_option("--out", tr_out, "output directory")->required();
    train->callback([&] { cmd_train(tr_data, tr_cfg, tr_out); });

    // eval
    std::string ev_ckpt, ev_data, ev_out;
    int ev_split = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    eval->add_option("--data", ev_data, "dataset directory")->required();
    eval->add_option("--split-index", ev_split, "which stored split to report");
    eval->add_option("--out", ev_out, "optional JSON output path");
    eval->callback([&] { cmd_eval(ev_ckpt, ev_data, ev_split, ev_out); });

    // linkpred
    std::string lp_data, lp_cfg, lp_out;
    auto* linkpred = app.add_subcommand("linkpred", "link-prediction training and evaluation");
    linkpred->add_option("--data", lp_data, "dataset directory")->required();
    linkpred->add_option("--config", lp_cfg, "JSON config file (task 'link')")->required();
    linkpred->add_option("--out", lp_out, "output directory")->required();
    linkpred->callback([&] { cmd_linkpred(lp_data, lp_cfg, lp_out); });

    // gate-dump
    std::string gd_ckpt, gd_data, gd_out;
    int gd_layers = 0;
    auto* gatedump = app.add_subcommand("gate-dump", "dump per-layer gate values to CSV");
    gatedump->add_option("--checkpoint", gd_ckpt, "checkpoint file")->required();
    gatedump->add_option("--data", gd_data, "dataset directory")->required();
    gatedump->add_option("--layers", gd_layers, "layers to dump (0 = all)");
    gatedump->add_option("--out", gd_out, "CSV output path")->required();
    gatedump->callback([&] { cmd_gate_dump(gd_ckpt, gd_data, gd_layers, gd_out); });

    // gradcheck
    int gc_size = 12;
    double gc_tol = 1e-4;
    std::uint64_t gc_seed = 1;
    bool gc_corrupt = false;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference verification of all gradients");
    gradcheck->add_option("--size", gc_size, "node count of the random instance");
    gradcheck->add_option("--tol", gc_tol, "max allowed relative error");
    gradcheck->add_option("--seed", gc_seed, "instance seed");
    gradcheck->add_flag("--corrupt", gc_corrupt, "negative control: skew the numeric probes");
    gradcheck->callback([&] { rc = cmd_gradcheck(gc_size, gc_tol, gc_seed, gc_corrupt); });

    // synth
    int sy_n = 0, sy_classes = 0, sy_degree = 0, sy_splits = 10;
    double sy_fwd = 0.5, sy_bwd = 0.5, sy_noise = 0.0;
    std::uint64_t sy_seed = 7;
    std::string sy_out;
    auto* synth = app.add_subcommand("synth", "generate a directed-homophily synthetic dataset");
    synth->add_option("--n", sy_n, "node count")->required();
    synth->add_option("--classes", sy_classes, "class count")->required();
    synth->add_option("--fwd-hom", sy_fwd, "target forward (out-neighbor) homophily")->required();
    synth->add_option("--bwd-hom", sy_bwd, "target backward (in-neighbor) homophily")->required();
    synth->add_option("--degree", sy_degree, "out-edges emitted per node")->required();
    synth->add_option("--noise", sy_noise, "feature noise level in [0,1]: mixes the class one-hot with white noise")->required();
    synth->add_option("--out", sy_out, "dataset directory to write")->required();
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_option("--splits", sy_splits, "number of stratified splits to attach (0 = none)");
    synth->callback([&] { cmd_synth(sy_n, sy_classes, sy_fwd, sy_bwd, sy_degree, sy_noise, sy_out, sy_seed, sy_splits); });

    // ablate
    std::string ab_data, ab_cfg, ab_off, ab_out;
    bool ab_grid = false, ab_sym = false;
    int ab_seeds = 1;
    auto* ablate = app.add_subcommand("ablate", "component-ablation comparison runs");
    ablate->add_option("--data", ab_data, "dataset directory")->required();
    ablate->add_option("--config", ab_cfg, "JSON config file")->required();
    ablate->add_option("--off", ab_off, "components to disable: gate,resgate,fusion,branch,imp");
    ablate->add_flag("--grid", ab_grid, "run every subset of --off");
    ablate->add_option("--seeds", ab_seeds, "independent seeds per combination");
    ablate->add_flag("--symmetrize", ab_sym, "train on the symmetrized graph");
    ablate->add_option("--out", ab_out, "report JSON path")->required();
    ablate->callback([&] { cmd_ablate(ab_data, ab_cfg, ab_off, ab_grid, ab_seeds, ab_sym, ab_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
        return 2;
    } catch (const MalformedInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
