#include "dhgnn/optimizer.hpp"

#include <cmath>

#include "dhgnn/errors.hpp"

namespace dhgnn {

AdamW::AdamW(std::vector<Tensor*> params, double lr, double weight_decay, double beta1, double beta2,
             double eps)
    : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
    slots_.reserve(params.size());
    for (Tensor* p : params) {
        if (!p->requires_grad || !p->grad) throw ContractError("optimizer: parameter without grad buffer");
        slots_.push_back({p, std::vector<double>(p->size(), 0.0), std::vector<double>(p->size(), 0.0)});
    }
}

void AdamW::step() {
    ++steps_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (auto& s : slots_) {
        double* w = s.p->ptr();
        const double* g = s.p->grad_ptr();
        for (std::size_t i = 0; i < s.m.size(); ++i) {
            s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
            s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
            double mhat = s.m[i] / bc1;
            double vhat = s.v[i] / bc2;
            w[i] -= lr_ * wd_ * w[i];
            w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& s : slots_) s.p->zero_grad();
}

}  // namespace dhgnn
