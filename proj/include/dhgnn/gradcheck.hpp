#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dhgnn/tensor.hpp"

namespace dhgnn {

struct GradCheckReport {
    bool pass = false;
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
};

// Central-difference gradient verification. f rebuilds the scalar loss from
// the parameters' current values (recording on the given tape, or running
// forward-only when it is null) and must be deterministic between calls.
// Per-entry relative error: |analytic - numeric| / max(1, |numeric|).
GradCheckReport grad_check_params(const std::function<Tensor(Tape*)>& f,
                                  const std::vector<std::pair<std::string, Tensor*>>& params,
                                  double step, double tol);

// Single-input convenience wrapper: checks d f(x) / d x at x0.
GradCheckReport grad_check(const std::function<Tensor(Tape*, const Tensor&)>& f, const Tensor& x0,
                           double step, double tol);

}  // namespace dhgnn
