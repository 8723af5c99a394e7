#pragma once

#include <vector>

#include "dhgnn/tensor.hpp"

namespace dhgnn {

// Scalar values of all loss terms plus the weights that combined them,
// recorded per epoch into the training log.
struct LossBreakdown {
    double l_cls = 0.0;
    double l_imp = 0.0;
    double l_branch_fwd = 0.0;
    double l_branch_bwd = 0.0;
    double l_total = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double q_sum_fwd = 0.0;
    double q_sum_bwd = 0.0;
};

// Mean over masked rows of -(1 - p_t)^gamma * log p_t, p_t the softmax
// probability of the true class. gamma = 0 reduces exactly to cross-entropy.
Tensor focal_loss(Tape* t, const Tensor& logits, const std::vector<int>& labels,
                  const std::vector<int>& mask, double gamma);

Tensor cross_entropy(Tape* t, const Tensor& logits, const std::vector<int>& labels,
                     const std::vector<int>& mask);

// Squared coefficient of variation (population std) of the per-direction
// column sums of q. 0 when directions balance, 1 at full collapse.
Tensor importance_loss(Tape* t, const Tensor& q);

// (1 - l2) * (cls + l1 * imp) + l2 * (branch_fwd + branch_bwd) / 2.
// Null term pointers drop that term (ablations); the breakdown records the
// dropped terms as 0.
struct TotalLoss {
    Tensor value;
    LossBreakdown parts;
};
TotalLoss total_loss(Tape* t, const Tensor& l_cls, const Tensor* l_imp, const Tensor* l_branch_fwd,
                     const Tensor* l_branch_bwd, double lambda1, double lambda2);

}  // namespace dhgnn
