#include "dhgnn/kernels.hpp"

#include <algorithm>

namespace dhgnn::kernels {
namespace {

// i-k-j loop: each output element accumulates its k terms in index order.
// SIMD backends vectorize over j, which preserves that per-element order.
void matmul_scalar(const double* a, const double* b, double* c, int r, int k,
                   int cc, bool accumulate) {
    if (!accumulate) std::fill(c, c + static_cast<std::size_t>(r) * cc, 0.0);
    for (int i = 0; i < r; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * cc;
        for (int l = 0; l < k; ++l) {
            const double av = arow[l];
            const double* brow = b + static_cast<std::size_t>(l) * cc;
            for (int j = 0; j < cc; ++j) crow[j] += av * brow[j];
        }
    }
}

void add_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

}  // namespace

const Backend& scalar() {
    static const Backend backend{
        "scalar",    matmul_scalar, add_scalar,
        sub_scalar,  mul_scalar,    axpy_scalar,
        scale_scalar,
    };
    return backend;
}

}  // namespace dhgnn::kernels
