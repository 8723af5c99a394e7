#include "dhgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dhgnn/errors.hpp"

namespace dhgnn {

GradCheckReport grad_check_params(const std::function<Tensor(Tape*)>& f,
                                  const std::vector<std::pair<std::string, Tensor*>>& params,
                                  double step, double tol) {
    if (step <= 0.0) throw ContractError("grad_check: step must be positive");
    for (auto& [name, p] : params) {
        if (!p->requires_grad || !p->grad) throw ContractError("grad_check: parameter '" + name + "' has no grad buffer");
        p->zero_grad();
    }
    {
        Tape tape;
        Tensor loss = f(&tape);
        tape.backward(loss);
    }
    GradCheckReport rep;
    for (auto& [name, p] : params) {
        std::vector<double> analytic = *p->grad;
        auto& vals = *p->data;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            double saved = vals[i];
            vals[i] = saved + step;
            double lp = f(nullptr).scalar();
            vals[i] = saved - step;
            double lm = f(nullptr).scalar();
            vals[i] = saved;
            double numeric = (lp - lm) / (2.0 * step);
            double rel = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
            ++rep.checked;
            if (rel > rep.max_rel_error) {
                rep.max_rel_error = rel;
                rep.worst_param = name;
                rep.worst_index = i;
                rep.worst_analytic = analytic[i];
                rep.worst_numeric = numeric;
            }
        }
    }
    rep.pass = std::isfinite(rep.max_rel_error) && rep.max_rel_error <= tol;
    return rep;
}

GradCheckReport grad_check(const std::function<Tensor(Tape*, const Tensor&)>& f, const Tensor& x0,
                           double step, double tol) {
    Tensor x = Tensor::leaf(x0.rows, x0.cols);
    *x.data = *x0.data;
    std::vector<std::pair<std::string, Tensor*>> params{{"x", &x}};
    return grad_check_params([&](Tape* t) { return f(t, x); }, params, step, tol);
}

}  // namespace dhgnn
