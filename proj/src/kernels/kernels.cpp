#include "dhgnn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace dhgnn::kernels {

std::vector<const Backend*> available() {
    std::vector<const Backend*> out{&scalar()};
    if (const Backend* b = avx2()) out.push_back(b);
    if (const Backend* b = neon()) out.push_back(b);
    return out;
}

namespace {

const Backend& select() {
    if (const char* forced = std::getenv("DHGNN_KERNELS")) {
        if (std::strcmp(forced, "scalar") == 0) return scalar();
        if (std::strcmp(forced, "avx2") == 0 && avx2()) return *avx2();
        if (std::strcmp(forced, "neon") == 0 && neon()) return *neon();
        return scalar();
    }
    if (const Backend* b = avx2()) return *b;
    if (const Backend* b = neon()) return *b;
    return scalar();
}

}  // namespace

const Backend& active() {
    static const Backend& chosen = select();
    return chosen;
}

}  // namespace dhgnn::kernels
