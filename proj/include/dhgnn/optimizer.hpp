#pragma once

#include <vector>

#include "dhgnn/tensor.hpp"

namespace dhgnn {

// Adaptive-moment optimizer with decoupled weight decay: the decay shrinks
// weights by exactly (1 - lr*wd) per step independent of the gradient, and a
// step at lr = 0 is a bit-exact no-op.
class AdamW {
  public:
    AdamW(std::vector<Tensor*> params, double lr, double weight_decay, double beta1 = 0.9,
          double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();

  private:
    struct Slot {
        Tensor* p;
        std::vector<double> m, v;
    };
    std::vector<Slot> slots_;
    double lr_, wd_, beta1_, beta2_, eps_;
    long steps_ = 0;
};

}  // namespace dhgnn
