#include "adaptive_rd/simd.hpp"

#if defined(ADAPTIVE_RD_HAVE_AVX2)

#include <immintrin.h>

namespace adaptive_rd::simd {

namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double *a, const double *b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double *x, double *y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void gemv_avx2(const double *X, std::size_t n, std::size_t p, const double *v, double *out)
{
    for (std::size_t k = 0; k < n; ++k)
        out[k] = dot_avx2(X + k * p, v, p);
}

void weighted_gram_avx2(const double *X, std::size_t n, std::size_t p, const double *w, double *out)
{
    for (std::size_t i = 0; i < p * p; ++i)
        out[i] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double *row = X + k * p;
        const double wk = w ? w[k] : 1.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double a = wk * row[i];
            // upper triangle only, j >= i
            axpy_avx2(a, row + i, out + i * p + i, p - i);
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j)
            out[i * p + j] = out[j * p + i];
}

void weighted_xtv_avx2(const double *X, std::size_t n, std::size_t p, const double *w, const double *v,
                       double *out)
{
    for (std::size_t j = 0; j < p; ++j)
        out[j] = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        axpy_avx2((w ? w[k] : 1.0) * v[k], X + k * p, out, p);
}

} // namespace

const KernelTable *avx2_kernels()
{
    static const bool usable = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    static const KernelTable table{Backend::avx2, dot_avx2,           axpy_avx2,
                                   gemv_avx2,     weighted_gram_avx2, weighted_xtv_avx2};
    return usable ? &table : nullptr;
}

} // namespace adaptive_rd::simd

#else

namespace adaptive_rd::simd {

const KernelTable *avx2_kernels() { return nullptr; }

} // namespace adaptive_rd::simd

#endif
