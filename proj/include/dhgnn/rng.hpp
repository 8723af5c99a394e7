#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dhgnn {

// Seeded generator passed explicitly to every stochastic routine.
//
// mt19937_64 is fully specified by the standard; the uniform/normal/integer
// transforms are written out here because the standard library distributions
// are implementation-defined and would break run-to-run reproducibility
// across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). Bitmask rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll(n - 1);
        std::uint64_t x;
        do {
            x = gen_() & mask;
        } while (x >= n);
        return x;
    }

    // Standard normal via Marsaglia polar.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Derives a decorrelated seed for an independent stream (splitmix64).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dhgnn
