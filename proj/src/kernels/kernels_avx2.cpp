// AVX2 variants. Built with -mavx2 and without -mfma: mul+add keeps the
// rounding of the scalar reference, so results are bit-identical.

#include "dhgnn/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>

namespace dhgnn::kernels {
namespace {

void matmul_avx2(const double* a, const double* b, double* c, int r, int k,
                 int cc, bool accumulate) {
    if (!accumulate) std::fill(c, c + static_cast<std::size_t>(r) * cc, 0.0);
    for (int i = 0; i < r; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * cc;
        for (int l = 0; l < k; ++l) {
            const __m256d av = _mm256_set1_pd(arow[l]);
            const double* brow = b + static_cast<std::size_t>(l) * cc;
            int j = 0;
            for (; j + 4 <= cc; j += 4) {
                __m256d vb = _mm256_loadu_pd(brow + j);
                __m256d vc = _mm256_loadu_pd(crow + j);
                vc = _mm256_add_pd(vc, _mm256_mul_pd(av, vb));
                _mm256_storeu_pd(crow + j, vc);
            }
            const double avs = arow[l];
            for (; j < cc; ++j) crow[j] += avs * brow[j];
        }
    }
}

void add_avx2(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_avx2(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, const double* x, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = a * x[i];
}

}  // namespace

const Backend* avx2() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Backend backend{
        "avx2",    matmul_avx2, add_avx2, sub_avx2,
        mul_avx2,  axpy_avx2,   scale_avx2,
    };
    return &backend;
}

}  // namespace dhgnn::kernels

#else

namespace dhgnn::kernels {
const Backend* avx2() { return nullptr; }
}  // namespace dhgnn::kernels

#endif
