#pragma once

// Data-parallel inner loops shared by the GLM, residualization and PCA code.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2+FMA
// variant. The variant is picked once per process from CPUID; setting the
// environment variable ADAPTIVE_RD_SIMD=scalar pins the reference path.
// All matrices are dense row-major (n rows, p columns, contiguous).

#include <cstddef>
#include <span>
#include <string_view>

namespace adaptive_rd::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
    Backend backend;
    double (*dot)(const double *a, const double *b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
    // out[k] = X[k,:] . v
    void (*gemv)(const double *X, std::size_t n, std::size_t p, const double *v, double *out);
    // out (p x p, overwritten) = sum_k w[k] X[k,:]^T X[k,:]; w == nullptr means unit weights
    void (*weighted_gram)(const double *X, std::size_t n, std::size_t p, const double *w, double *out);
    // out (p, overwritten) = sum_k w[k] v[k] X[k,:]; w == nullptr means unit weights
    void (*weighted_xtv)(const double *X, std::size_t n, std::size_t p, const double *w, const double *v,
                         double *out);
};

const KernelTable &scalar_kernels();
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable *avx2_kernels();

const KernelTable &kernels();
Backend active_backend();
std::string_view backend_name(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b)
{
    return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double sum(std::span<const double> a)
{
    double s = 0.0;
    for (double v : a)
        s += v;
    return s;
}

} // namespace adaptive_rd::simd
