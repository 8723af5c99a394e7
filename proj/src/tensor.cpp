#include "dhgnn/tensor.hpp"

#include <algorithm>

#include "dhgnn/errors.hpp"

namespace dhgnn {

static std::shared_ptr<std::vector<double>> make_storage(int r, int c, double v) {
    if (r < 0 || c < 0) throw ContractError("tensor: negative shape");
    return std::make_shared<std::vector<double>>(static_cast<std::size_t>(r) * c, v);
}

Tensor Tensor::zeros(int r, int c) {
    Tensor t;
    t.rows = r;
    t.cols = c;
    t.data = make_storage(r, c, 0.0);
    return t;
}

Tensor Tensor::full(int r, int c, double v) {
    Tensor t = zeros(r, c);
    std::fill(t.data->begin(), t.data->end(), v);
    return t;
}

Tensor Tensor::from(int r, int c, std::vector<double> v) {
    if (v.size() != static_cast<std::size_t>(r) * c)
        throw ContractError("tensor: value count does not match shape");
    Tensor t;
    t.rows = r;
    t.cols = c;
    t.data = std::make_shared<std::vector<double>>(std::move(v));
    return t;
}

Tensor Tensor::leaf(int r, int c) {
    Tensor t = zeros(r, c);
    t.requires_grad = true;
    t.grad = make_storage(r, c, 0.0);
    return t;
}

double Tensor::scalar() const {
    if (rows != 1 || cols != 1) throw ContractError("tensor: scalar() on non-1x1 tensor");
    return (*data)[0];
}

void Tensor::zero_grad() {
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
}

Tensor detach(const Tensor& x) {
    Tensor t;
    t.rows = x.rows;
    t.cols = x.cols;
    t.data = std::make_shared<std::vector<double>>(*x.data);
    return t;
}

int Tape::add_node(int rows, int cols, std::function<void(Tape&)> backfn) {
    Node n;
    n.rows = rows;
    n.cols = cols;
    n.grad.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    n.backfn = std::move(backfn);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::set_backfn(int node, std::function<void(Tape&)> backfn) {
    nodes_[node].backfn = std::move(backfn);
}

int Tape::leaf_node(const Tensor& t) {
    if (!t.requires_grad) throw ContractError("tape: leaf registration without requires_grad");
    if (!t.grad) throw ContractError("tape: requires_grad tensor lacks a grad buffer");
    const void* key = t.data.get();
    auto it = leaf_ids_.find(key);
    if (it != leaf_ids_.end()) return it->second;
    int id = add_node(t.rows, t.cols, nullptr);
    leaf_ids_.emplace(key, id);
    leaves_.push_back({id, t.grad});
    return id;
}

void Tape::backward(const Tensor& loss) {
    if (loss.rows != 1 || loss.cols != 1) throw ContractError("backward: loss must be 1x1");
    if (loss.tape != this || loss.node < 0)
        throw ContractError("backward: loss was not produced by this tape");
    for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
    nodes_[loss.node].grad[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        if (nodes_[i].backfn) nodes_[i].backfn(*this);
    }
    for (auto& leaf : leaves_) {
        const auto& g = nodes_[leaf.node].grad;
        auto& acc = *leaf.grad;
        for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k];
    }
}

int input_node(Tape* t, const Tensor& x) {
    if (!t) return -1;
    if (x.tape) {
        if (x.tape != t) throw ContractError("op: input belongs to a different tape");
        return x.node;
    }
    if (x.requires_grad) return t->leaf_node(x);
    return -1;
}

}  // namespace dhgnn
