#pragma once

#include <cstddef>
#include <vector>

namespace dhgnn::kernels {

// Dense f64 inner-loop kernels, row-major.
//
// Every backend must produce bit-identical output to the scalar reference:
// matmul accumulates over k in the same order for every output element and
// no backend may use FMA contraction (the kernel translation units are built
// with -ffp-contract=off and without -mfma). This keeps training runs
// reproducible regardless of which backend the dispatcher picks.
struct Backend {
    const char* name;
    // c (r x cc) = a (r x k) * b (k x cc); accumulate keeps existing c.
    void (*matmul)(const double* a, const double* b, double* c, int r, int k,
                   int cc, bool accumulate);
    void (*add)(const double* x, const double* y, double* out, std::size_t n);
    void (*sub)(const double* x, const double* y, double* out, std::size_t n);
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, const double* x, double* out, std::size_t n);
};

const Backend& scalar();

// Null when the instruction set is not compiled in or not supported by the
// running CPU.
const Backend* avx2();
const Backend* neon();

// All backends usable on this machine (scalar first).
std::vector<const Backend*> available();

// Backend selected at first use: DHGNN_KERNELS=scalar|avx2|neon overrides,
// otherwise the widest supported one wins.
const Backend& active();

}  // namespace dhgnn::kernels
