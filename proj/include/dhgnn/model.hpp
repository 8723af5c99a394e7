#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dhgnn/graph.hpp"
#include "dhgnn/ops.hpp"
#include "dhgnn/rng.hpp"
#include "dhgnn/tensor.hpp"

namespace dhgnn {

enum class Task { NodeClassification, LinkPrediction };

struct ModelConfig {
    int hidden = 64;           // embedding width p
    int layers = 2;            // message-passing depth L
    int chunks = 8;            // hidden units per gate chunk; gates live at p/c dims
    int gate_mlp_layers = 2;   // reset-MLP depth
    int adj_mlp_layers = 2;    // adjacency-embedding MLP depth
    double beta = 0.5;         // adjacency embedding coefficient
    double input_dropout = 0.0;
    double dropout = 0.0;      // applied after each combine step
    bool noise_enabled = true; // fusion score noise during training
    bool adj_rows_shared = false;  // both directions read outgoing rows

    int gate_dim() const { return hidden / chunks; }
    void validate() const;  // ConfigError on violation
};

// Component switches for ablation runs. Everything on = full model.
struct Ablation {
    bool gate = true;     // off: fixed half/half blend of h_prev and message
    bool resgate = true;  // off: raw gate used directly, no reset memory
    bool fusion = true;   // off: q pinned to (1/2, 1/2), no scores, no noise
    bool branch = true;   // off: branch losses dropped, stop-gradient lifted
    bool imp = true;      // off: importance term dropped
};

struct ResetStage {
    Tensor w;  // q x q, applied to the previous stage (raw gate at stage 1)
    Tensor u;  // q x q, applied to the carried gate
    Tensor b;  // 1 x q
};

struct EncoderLayerParams {
    Tensor gate_w;  // 2p x q
    Tensor gate_b;  // 1 x q
    std::vector<ResetStage> reset;  // gate_mlp_layers stages
};

struct EncoderParams {
    Tensor in_w;  // d x p input projection
    Tensor in_b;  // 1 x p
    std::vector<EncoderLayerParams> layers;
};

struct LinearHead {
    Tensor w;  // p x C
    Tensor b;  // 1 x C
};

struct MlpStack {
    std::vector<Tensor> ws;  // first n x p, rest p x p
    std::vector<Tensor> bs;  // 1 x p each
};

struct NtbParams {
    Tensor w1;  // p x 1 clean score head
    Tensor w2;  // p x 1 noise magnitude head
};

struct FusionParams {
    NtbParams ntb_fwd, ntb_bwd;
    MlpStack adj;   // shared adjacency-embedding MLP
    Tensor out_w;   // p x out
    Tensor out_b;   // 1 x out
};

// Two-layer pair scorer over [emb(u) || emb(v)]; order-sensitive by design.
struct PairScorer {
    Tensor w1;  // 2p x p
    Tensor b1;  // 1 x p
    Tensor w2;  // p x 1
    Tensor b2;  // 1 x 1
};

struct ModelParams {
    Task task = Task::NodeClassification;
    EncoderParams enc_fwd, enc_bwd;
    LinearHead branch_fwd, branch_bwd;            // node-classification branches
    PairScorer scorer_fwd, scorer_bwd, scorer_main;  // link-prediction heads
    FusionParams fusion;

    // All parameters in a fixed registration order (init and checkpoint
    // determinism depend on it). Names are stable across builds.
    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;

    // out_dim: C for node classification, embedding width for link
    // prediction. n is the node count (adjacency MLP input width).
    static ModelParams build(const ModelConfig& cfg, Task task, int in_dim, int out_dim, int n);
};

// Per-layer gate snapshots (chunked form, detached): raw gates and their
// reset-refined versions, for diagnostics and invariant checks.
struct EncoderTrace {
    std::vector<Tensor> g_hat;    // n x (p/c) per layer
    std::vector<Tensor> g_tilde;  // n x (p/c) per layer
};

// One gated message-passing layer's pieces, exposed for direct testing.
Tensor aggregate_mean(Tape* t, const Tensor& h_prev, const DirectedGraph& g, Direction dir);
Tensor preliminary_gate(Tape* t, const Tensor& h_prev, const Tensor& m, const EncoderLayerParams& lp);
Tensor reset_gate(Tape* t, const Tensor& g_prev, const Tensor& g_hat, const EncoderLayerParams& lp);
Tensor combine(Tape* t, const Tensor& h_prev, const Tensor& m, const Tensor& g_chunked, int chunks);

// Full directional encoder: input dropout -> linear projection -> L gated
// layers. Returns n x p embeddings; fills trace (when given) with per-layer
// gate snapshots.
Tensor encoder_forward(Tape* t, const Tensor& x, const DirectedGraph& g, Direction dir,
                       const EncoderParams& ep, const ModelConfig& cfg, const Ablation& abl,
                       bool training, Rng& rng, EncoderTrace* trace);

// Neighbor-row embedding: relu MLP over CSR-gathered weight rows,
// equivalent to running the MLP on dense 0/1 adjacency rows.
Tensor adjacency_embedding(Tape* t, const DirectedGraph& g, Direction dir, const MlpStack& adj);

// Per-node scalar score h*w1 + eps * softplus(h*w2); eps ~ N(0,1) fresh per
// node when noisy, else exactly h*w1.
Tensor ntb_score(Tape* t, const Tensor& h, const NtbParams& np, bool noisy, Rng& rng);

struct FusionResult {
    Tensor fused;  // n x out
    Tensor q;      // n x 2 direction weights, column 0 = forward
};

// Directional mixing head. Callers pass detached embeddings to respect the
// stop-gradient contract (the objective module owns that wiring).
FusionResult fuse(Tape* t, const Tensor& h_fwd, const Tensor& h_bwd, const DirectedGraph& g,
                  const FusionParams& fp, const ModelConfig& cfg, const Ablation& abl,
                  bool training, Rng& rng);

struct ForwardResult {
    Tensor h_fwd, h_bwd;  // undetached directional embeddings
    Tensor fused;         // logits (node task) or fused embeddings (link task)
    Tensor q;             // n x 2
    EncoderTrace trace_fwd, trace_bwd;
};

// Whole-model forward. Directional embeddings are detached before fusion
// unless the branch ablation lifted the stop-gradient.
ForwardResult model_forward(Tape* t, const Tensor& x, const DirectedGraph& g, ModelParams& mp,
                            const ModelConfig& cfg, const Ablation& abl, bool training, Rng& rng,
                            bool want_trace = false);

// Pair logits under a scorer: k x 1 over [emb(u) || emb(v)] rows.
Tensor pair_logits(Tape* t, const Tensor& emb, const std::vector<Edge>& pairs, const PairScorer& sc);

}  // namespace dhgnn
