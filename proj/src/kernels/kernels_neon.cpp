// NEON variants for aarch64. Explicit vmul+vadd (no vfma) keeps results
// bit-identical to the scalar reference.

#include "dhgnn/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>

namespace dhgnn::kernels {
namespace {

void matmul_neon(const double* a, const double* b, double* c, int r, int k,
                 int cc, bool accumulate) {
    if (!accumulate) std::fill(c, c + static_cast<std::size_t>(r) * cc, 0.0);
    for (int i = 0; i < r; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * cc;
        for (int l = 0; l < k; ++l) {
            const float64x2_t av = vdupq_n_f64(arow[l]);
            const double* brow = b + static_cast<std::size_t>(l) * cc;
            int j = 0;
            for (; j + 2 <= cc; j += 2) {
                float64x2_t vc = vld1q_f64(crow + j);
                vc = vaddq_f64(vc, vmulq_f64(av, vld1q_f64(brow + j)));
                vst1q_f64(crow + j, vc);
            }
            const double avs = arow[l];
            for (; j < cc; ++j) crow[j] += avs * brow[j];
        }
    }
}

void add_neon(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_neon(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_neon(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, const double* x, double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) out[i] = a * x[i];
}

}  // namespace

const Backend* neon() {
    static const Backend backend{
        "neon",    matmul_neon, add_neon, sub_neon,
        mul_neon,  axpy_neon,   scale_neon,
    };
    return &backend;
}

}  // namespace dhgnn::kernels

#else

namespace dhgnn::kernels {
const Backend* neon() { return nullptr; }
}  // namespace dhgnn::kernels

#endif
