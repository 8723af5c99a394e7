#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

namespace dhgnn {

class Tape;

// Dense 2-D array of 64-bit floats, row-major. A Tensor is a cheap handle
// over shared storage; ops never mutate their inputs. Tensors that require
// gradient always carry an allocated grad accumulator of the same shape —
// gradients accumulate (+=) across backward calls until zero_grad.
struct Tensor {
    int rows = 0, cols = 0;
    std::shared_ptr<std::vector<double>> data;
    std::shared_ptr<std::vector<double>> grad;
    bool requires_grad = false;
    Tape* tape = nullptr;  // producing tape, null for leaves and constants
    int node = -1;

    Tensor() = default;

    static Tensor zeros(int r, int c);
    static Tensor full(int r, int c, double v);
    static Tensor from(int r, int c, std::vector<double> v);
    // Zero-initialized tensor with requires_grad and a grad buffer.
    static Tensor leaf(int r, int c);

    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
    double* ptr() { return data->data(); }
    const double* ptr() const { return data->data(); }
    double& at(int r, int c) { return (*data)[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return (*data)[static_cast<std::size_t>(r) * cols + c]; }

    // Value of a 1x1 tensor; ContractError otherwise.
    double scalar() const;

    double* grad_ptr() { return grad->data(); }
    const double* grad_ptr() const { return grad->data(); }
    void zero_grad();

    bool linked() const { return tape != nullptr && node >= 0; }
};

// Identical values, no tape linkage; gradients never flow through.
Tensor detach(const Tensor& x);

// Reverse-mode differentiation tape. Operations append nodes in topological
// order; backward seeds the loss node with 1 and sweeps once in reverse,
// accumulating (never overwriting) gradients, then flushes leaf gradients
// into their persistent accumulators. Single-threaded by contract.
class Tape {
  public:
    // Registers an op output. backfn reads this node's grad and accumulates
    // into its parents' grads; null for source nodes.
    int add_node(int rows, int cols, std::function<void(Tape&)> backfn);
    void set_backfn(int node, std::function<void(Tape&)> backfn);

    // Registers a requires_grad tensor as a tape leaf (idempotent per
    // storage buffer). Returns its node id.
    int leaf_node(const Tensor& t);

    std::vector<double>& grad_of(int node) { return nodes_[node].grad; }

    // loss must be 1x1 and produced by this tape. Repeated calls accumulate
    // into leaf grads unless they are zeroed in between.
    void backward(const Tensor& loss);

    std::size_t num_nodes() const { return nodes_.size(); }

  private:
    struct Node {
        int rows, cols;
        std::vector<double> grad;
        std::function<void(Tape&)> backfn;
    };
    struct LeafRef {
        int node;
        std::shared_ptr<std::vector<double>> grad;
    };
    std::vector<Node> nodes_;
    std::vector<LeafRef> leaves_;
    std::unordered_map<const void*, int> leaf_ids_;
};

// Node id of x on tape t, registering it as a leaf when it requires grad.
// -1 when no gradient should flow (constants, detached values, t == null).
int input_node(Tape* t, const Tensor& x);

}  // namespace dhgnn
