#include "adaptive_rd/simd.hpp"

#include <cstdlib>
#include <string>

namespace adaptive_rd::simd {

namespace {

const KernelTable &select()
{
    if (const char *env = std::getenv("ADAPTIVE_RD_SIMD"); env && std::string(env) == "scalar")
        return scalar_kernels();
    if (const KernelTable *avx2 = avx2_kernels())
        return *avx2;
    return scalar_kernels();
}

} // namespace

const KernelTable &kernels()
{
    static const KernelTable &table = select();
    return table;
}

Backend active_backend() { return kernels().backend; }

std::string_view backend_name(Backend backend)
{
    switch (backend) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

} // namespace adaptive_rd::simd
