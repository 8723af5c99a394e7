#include "dhgnn/losses.hpp"

#include "dhgnn/errors.hpp"
#include "dhgnn/ops.hpp"

namespace dhgnn {

namespace {

// log p_t over the masked rows: k x 1 column of true-class log-softmax values.
Tensor true_class_logprob(Tape* t, const Tensor& logits, const std::vector<int>& labels,
                          const std::vector<int>& mask) {
    if (mask.empty()) throw ContractError("classification loss: empty mask");
    std::vector<int> y;
    y.reserve(mask.size());
    for (int i : mask) {
        if (i < 0 || i >= logits.rows) throw ContractError("classification loss: mask index out of range");
        y.push_back(labels[i]);
    }
    Tensor lsm = log_softmax_row(t, gather_rows(t, logits, mask));
    return pick_per_row(t, lsm, y);
}

}  // namespace

Tensor focal_loss(Tape* t, const Tensor& logits, const std::vector<int>& labels,
                  const std::vector<int>& mask, double gamma) {
    if (gamma < 0.0) throw ContractError("focal_loss: gamma must be >= 0");
    Tensor lt = true_class_logprob(t, logits, labels, mask);
    Tensor pt = exp_elem(t, lt);
    Tensor one = Tensor::full(pt.rows, 1, 1.0);
    Tensor weight = pow_const(t, sub(t, one, pt), gamma);  // == 1 exactly at gamma = 0
    return scale(t, sum_all(t, mul(t, weight, lt)), -1.0 / static_cast<double>(mask.size()));
}

Tensor cross_entropy(Tape* t, const Tensor& logits, const std::vector<int>& labels,
                     const std::vector<int>& mask) {
    Tensor lt = true_class_logprob(t, logits, labels, mask);
    Tensor one = Tensor::full(lt.rows, 1, 1.0);
    // same op chain as focal_loss at gamma=0 so the two agree bit-for-bit
    Tensor weight = pow_const(t, sub(t, one, exp_elem(t, lt)), 0.0);
    return scale(t, sum_all(t, mul(t, weight, lt)), -1.0 / static_cast<double>(mask.size()));
}

Tensor importance_loss(Tape* t, const Tensor& q) {
    if (q.cols != 2) throw ContractError("importance_loss: q must be n x 2");
    return cv2_pair(t, col_sum(t, q));
}

TotalLoss total_loss(Tape* t, const Tensor& l_cls, const Tensor* l_imp, const Tensor* l_branch_fwd,
                     const Tensor* l_branch_bwd, double lambda1, double lambda2) {
    if (lambda1 < 0.0) throw ConfigError("imp_coef must be >= 0");
    if (lambda2 < 0.0 || lambda2 > 1.0) throw ConfigError("branch_coef must be in [0, 1]");
    if ((l_branch_fwd == nullptr) != (l_branch_bwd == nullptr))
        throw ContractError("total_loss: branch terms must be given together");
    if (l_branch_fwd == nullptr && lambda2 != 0.0)
        throw ContractError("total_loss: lambda2 > 0 needs branch terms");

    Tensor inner = l_imp ? add(t, l_cls, scale(t, *l_imp, lambda1)) : l_cls;
    Tensor total = scale(t, inner, 1.0 - lambda2);
    if (l_branch_fwd) total = add(t, total, scale(t, add(t, *l_branch_fwd, *l_branch_bwd), lambda2 / 2.0));

    TotalLoss out{total, {}};
    out.parts.l_cls = l_cls.scalar();
    out.parts.l_imp = l_imp ? l_imp->scalar() : 0.0;
    out.parts.l_branch_fwd = l_branch_fwd ? l_branch_fwd->scalar() : 0.0;
    out.parts.l_branch_bwd = l_branch_bwd ? l_branch_bwd->scalar() : 0.0;
    out.parts.l_total = total.scalar();
    out.parts.lambda1 = lambda1;
    out.parts.lambda2 = lambda2;
    return out;
}

}  // namespace dhgnn
