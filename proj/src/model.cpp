#include "dhgnn/model.hpp"

#include "dhgnn/errors.hpp"

namespace dhgnn {

void ModelConfig::validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (chunks < 1) throw ConfigError("chunks must be >= 1");
    if (hidden < chunks) throw ConfigError("hidden must be >= chunks");
    if (hidden % chunks != 0) throw ConfigError("hidden must be divisible by chunks");
    if (gate_mlp_layers < 1) throw ConfigError("gate_mlp_layers must be >= 1");
    if (adj_mlp_layers < 1) throw ConfigError("adj_mlp_layers must be >= 1");
    if (beta < 0.0) throw ConfigError("adjacency coefficient must be >= 0");
    if (input_dropout < 0.0 || input_dropout >= 1.0) throw ConfigError("input dropout must be in [0, 1)");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
}

namespace {

EncoderParams build_encoder(const ModelConfig& cfg, int in_dim) {
    EncoderParams ep;
    int p = cfg.hidden, q = cfg.gate_dim();
    ep.in_w = Tensor::leaf(in_dim, p);
    ep.in_b = Tensor::leaf(1, p);
    ep.layers.resize(cfg.layers);
    for (auto& lp : ep.layers) {
        lp.gate_w = Tensor::leaf(2 * p, q);
        lp.gate_b = Tensor::leaf(1, q);
        lp.reset.resize(cfg.gate_mlp_layers);
        for (auto& st : lp.reset) {
            st.w = Tensor::leaf(q, q);
            st.u = Tensor::leaf(q, q);
            st.b = Tensor::leaf(1, q);
        }
    }
    return ep;
}

PairScorer build_scorer(int p) {
    PairScorer sc;
    sc.w1 = Tensor::leaf(2 * p, p);
    sc.b1 = Tensor::leaf(1, p);
    sc.w2 = Tensor::leaf(p, 1);
    sc.b2 = Tensor::leaf(1, 1);
    return sc;
}

void name_encoder(std::vector<std::pair<std::string, Tensor*>>& out, const std::string& prefix,
                  EncoderParams& ep) {
    out.emplace_back(prefix + ".in.w", &ep.in_w);
    out.emplace_back(prefix + ".in.b", &ep.in_b);
    for (std::size_t l = 0; l < ep.layers.size(); ++l) {
        std::string lp = prefix + ".layer" + std::to_string(l);
        out.emplace_back(lp + ".gate.w", &ep.layers[l].gate_w);
        out.emplace_back(lp + ".gate.b", &ep.layers[l].gate_b);
        for (std::size_t s = 0; s < ep.layers[l].reset.size(); ++s) {
            std::string sp = lp + ".reset" + std::to_string(s);
            out.emplace_back(sp + ".w", &ep.layers[l].reset[s].w);
            out.emplace_back(sp + ".u", &ep.layers[l].reset[s].u);
            out.emplace_back(sp + ".b", &ep.layers[l].reset[s].b);
        }
    }
}

void name_scorer(std::vector<std::pair<std::string, Tensor*>>& out, const std::string& prefix,
                 PairScorer& sc) {
    out.emplace_back(prefix + ".w1", &sc.w1);
    out.emplace_back(prefix + ".b1", &sc.b1);
    out.emplace_back(prefix + ".w2", &sc.w2);
    out.emplace_back(prefix + ".b2", &sc.b2);
}

}  // namespace

ModelParams ModelParams::build(const ModelConfig& cfg, Task task, int in_dim, int out_dim, int n) {
    cfg.validate();
    ModelParams mp;
    mp.task = task;
    int p = cfg.hidden;
    mp.enc_fwd = build_encoder(cfg, in_dim);
    mp.enc_bwd = build_encoder(cfg, in_dim);
    if (task == Task::NodeClassification) {
        mp.branch_fwd = {Tensor::leaf(p, out_dim), Tensor::leaf(1, out_dim)};
        mp.branch_bwd = {Tensor::leaf(p, out_dim), Tensor::leaf(1, out_dim)};
    } else {
        mp.scorer_fwd = build_scorer(p);
        mp.scorer_bwd = build_scorer(p);
        mp.scorer_main = build_scorer(p);
    }
    mp.fusion.ntb_fwd = {Tensor::leaf(p, 1), Tensor::leaf(p, 1)};
    mp.fusion.ntb_bwd = {Tensor::leaf(p, 1), Tensor::leaf(p, 1)};
    mp.fusion.adj.ws.push_back(Tensor::leaf(n, p));
    mp.fusion.adj.bs.push_back(Tensor::leaf(1, p));
    for (int i = 1; i < cfg.adj_mlp_layers; ++i) {
        mp.fusion.adj.ws.push_back(Tensor::leaf(p, p));
        mp.fusion.adj.bs.push_back(Tensor::leaf(1, p));
    }
    mp.fusion.out_w = Tensor::leaf(p, out_dim);
    mp.fusion.out_b = Tensor::leaf(1, out_dim);
    return mp;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
    std::vector<std::pair<std::string, Tensor*>> out;
    name_encoder(out, "enc.fwd", enc_fwd);
    name_encoder(out, "enc.bwd", enc_bwd);
    if (task == Task::NodeClassification) {
        out.emplace_back("branch.fwd.w", &branch_fwd.w);
        out.emplace_back("branch.fwd.b", &branch_fwd.b);
        out.emplace_back("branch.bwd.w", &branch_bwd.w);
        out.emplace_back("branch.bwd.b", &branch_bwd.b);
    } else {
        name_scorer(out, "scorer.fwd", scorer_fwd);
        name_scorer(out, "scorer.bwd", scorer_bwd);
        name_scorer(out, "scorer.main", scorer_main);
    }
    out.emplace_back("fusion.ntb.fwd.w1", &fusion.ntb_fwd.w1);
    out.emplace_back("fusion.ntb.fwd.w2", &fusion.ntb_fwd.w2);
    out.emplace_back("fusion.ntb.bwd.w1", &fusion.ntb_bwd.w1);
    out.emplace_back("fusion.ntb.bwd.w2", &fusion.ntb_bwd.w2);
    for (std::size_t i = 0; i < fusion.adj.ws.size(); ++i) {
        out.emplace_back("fusion.adj" + std::to_string(i) + ".w", &fusion.adj.ws[i]);
        out.emplace_back("fusion.adj" + std::to_string(i) + ".b", &fusion.adj.bs[i]);
    }
    out.emplace_back("fusion.out.w", &fusion.out_w);
    out.emplace_back("fusion.out.b", &fusion.out_b);
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
    auto mutable_named = const_cast<ModelParams*>(this)->named();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mutable_named.size());
    for (auto& [name, ptr] : mutable_named) out.emplace_back(name, ptr);
    return out;
}

Tensor aggregate_mean(Tape* t, const Tensor& h_prev, const DirectedGraph& g, Direction dir) {
    return neighbor_mean(t, h_prev, g, dir);
}

Tensor preliminary_gate(Tape* t, const Tensor& h_prev, const Tensor& m, const EncoderLayerParams& lp) {
    Tensor z = add(t, matmul(t, concat_cols(t, h_prev, m), lp.gate_w), lp.gate_b);
    return reverse_cumsum_row(t, softmax_row(t, z));
}

Tensor reset_gate(Tape* t, const Tensor& g_prev, const Tensor& g_hat, const EncoderLayerParams& lp) {
    const auto& stages = lp.reset;
    Tensor z = add(t, add(t, matmul(t, g_hat, stages[0].w), matmul(t, g_prev, stages[0].u)), stages[0].b);
    for (std::size_t i = 1; i < stages.size(); ++i)
        z = add(t, add(t, matmul(t, relu(t, z), stages[i].w), matmul(t, g_prev, stages[i].u)), stages[i].b);
    Tensor r = sigmoid(t, z);
    // (1 - r) . g_prev + r . g_hat, written literally so the r -> 0/1 limits
    // hit g_prev / g_hat exactly
    Tensor one = Tensor::full(r.rows, r.cols, 1.0);
    return add(t, mul(t, sub(t, one, r), g_prev), mul(t, r, g_hat));
}

Tensor combine(Tape* t, const Tensor& h_prev, const Tensor& m, const Tensor& g_chunked, int chunks) {
    Tensor ge = expand_chunks(t, g_chunked, chunks);
    Tensor one = Tensor::full(ge.rows, ge.cols, 1.0);
    return add(t, mul(t, ge, h_prev), mul(t, sub(t, one, ge), m));
}

Tensor encoder_forward(Tape* t, const Tensor& x, const DirectedGraph& g, Direction dir,
                       const EncoderParams& ep, const ModelConfig& cfg, const Ablation& abl,
                       bool training, Rng& rng, EncoderTrace* trace) {
    Tensor h = dropout(t, x, cfg.input_dropout, training, rng);
    h = add(t, matmul(t, h, ep.in_w), ep.in_b);
    Tensor g_tilde = Tensor::zeros(g.num_nodes(), cfg.gate_dim());  // fully open at layer 1
    for (int l = 0; l < cfg.layers; ++l) {
        const auto& lp = ep.layers[l];
        Tensor m = aggregate_mean(t, h, g, dir);
        if (!abl.gate) {
            h = add(t, scale(t, h, 0.5), scale(t, m, 0.5));
        } else {
            Tensor g_hat = preliminary_gate(t, h, m, lp);
            Tensor g_new = abl.resgate ? reset_gate(t, g_tilde, g_hat, lp) : g_hat;
            if (trace) {
                trace->g_hat.push_back(detach(g_hat));
                trace->g_tilde.push_back(detach(g_new));
            }
            h = combine(t, h, m, g_new, cfg.chunks);
            g_tilde = g_new;
        }
        h = dropout(t, h, cfg.dropout, training, rng);
    }
    return h;
}

Tensor adjacency_embedding(Tape* t, const DirectedGraph& g, Direction dir, const MlpStack& adj) {
    Tensor h = add(t, adj_linear(t, g, dir, adj.ws[0]), adj.bs[0]);
    for (std::size_t i = 1; i < adj.ws.size(); ++i)
        h = add(t, matmul(t, relu(t, h), adj.ws[i]), adj.bs[i]);
    return h;
}

Tensor ntb_score(Tape* t, const Tensor& h, const NtbParams& np, bool noisy, Rng& rng) {
    Tensor s = matmul(t, h, np.w1);
    if (noisy) {
        Tensor eps = Tensor::zeros(h.rows, 1);
        for (int i = 0; i < h.rows; ++i) (*eps.data)[i] = rng.normal();
        s = add(t, s, mul(t, eps, softplus(t, matmul(t, h, np.w2))));
    }
    return s;
}

FusionResult fuse(Tape* t, const Tensor& h_fwd, const Tensor& h_bwd, const DirectedGraph& g,
                  const FusionParams& fp, const ModelConfig& cfg, const Ablation& abl,
                  bool training, Rng& rng) {
    int n = h_fwd.rows;
    Tensor q;
    if (!abl.fusion) {
        q = Tensor::full(n, 2, 0.5);
    } else {
        Tensor hf = h_fwd, hb = h_bwd;
        if (cfg.beta != 0.0) {
            Tensor af = adjacency_embedding(t, g, Direction::Forward, fp.adj);
            Tensor ab = cfg.adj_rows_shared ? af : adjacency_embedding(t, g, Direction::Backward, fp.adj);
            hf = add(t, hf, scale(t, af, cfg.beta));
            hb = add(t, hb, scale(t, ab, cfg.beta));
        }
        bool noisy = training && cfg.noise_enabled;
        Tensor sf = ntb_score(t, hf, fp.ntb_fwd, noisy, rng);
        Tensor sb = ntb_score(t, hb, fp.ntb_bwd, noisy, rng);
        q = softmax_row(t, concat_cols(t, sf, sb));
    }
    Tensor blend = add(t, scale_rows(t, h_fwd, slice_col(t, q, 0)), scale_rows(t, h_bwd, slice_col(t, q, 1)));
    Tensor fused = add(t, matmul(t, blend, fp.out_w), fp.out_b);
    return {fused, q};
}

ForwardResult model_forward(Tape* t, const Tensor& x, const DirectedGraph& g, ModelParams& mp,
                            const ModelConfig& cfg, const Ablation& abl, bool training, Rng& rng,
                            bool want_trace) {
    ForwardResult out;
    EncoderTrace* tf = want_trace ? &out.trace_fwd : nullptr;
    EncoderTrace* tb = want_trace ? &out.trace_bwd : nullptr;
    out.h_fwd = encoder_forward(t, x, g, Direction::Forward, mp.enc_fwd, cfg, abl, training, rng, tf);
    out.h_bwd = encoder_forward(t, x, g, Direction::Backward, mp.enc_bwd, cfg, abl, training, rng, tb);
    // Stop-gradient: the fused head learns on frozen directional views, the
    // encoders learn from the branch losses only. Lifted when branches are
    // ablated away, otherwise nothing would train the encoders.
    Tensor ff = abl.branch ? detach(out.h_fwd) : out.h_fwd;
    Tensor fb = abl.branch ? detach(out.h_bwd) : out.h_bwd;
    FusionResult fr = fuse(t, ff, fb, g, mp.fusion, cfg, abl, training, rng);
    out.fused = fr.fused;
    out.q = fr.q;
    return out;
}

Tensor pair_logits(Tape* t, const Tensor& emb, const std::vector<Edge>& pairs, const PairScorer& sc) {
    std::vector<int> us, vs;
    us.reserve(pairs.size());
    vs.reserve(pairs.size());
    for (auto [u, v] : pairs) {
        us.push_back(u);
        vs.push_back(v);
    }
    Tensor cat = concat_cols(t, gather_rows(t, emb, us), gather_rows(t, emb, vs));
    Tensor hidden = relu(t, add(t, matmul(t, cat, sc.w1), sc.b1));
    return add(t, matmul(t, hidden, sc.w2), sc.b2);
}

}  // namespace dhgnn
