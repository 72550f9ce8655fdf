#include "adaptive_rd/simd.hpp"

namespace adaptive_rd::simd {

namespace {

double dot_scalar(const double *a, const double *b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double *x, double *y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void gemv_scalar(const double *X, std::size_t n, std::size_t p, const double *v, double *out)
{
    for (std::size_t k = 0; k < n; ++k)
        out[k] = dot_scalar(X + k * p, v, p);
}

void weighted_gram_scalar(const double *X, std::size_t n, std::size_t p, const double *w, double *out)
{
    for (std::size_t i = 0; i < p * p; ++i)
        out[i] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double *row = X + k * p;
        const double wk = w ? w[k] : 1.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double a = wk * row[i];
            double *dst = out + i * p;
            for (std::size_t j = i; j < p; ++j)
                dst[j] += a * row[j];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j)
            out[i * p + j] = out[j * p + i];
}

void weighted_xtv_scalar(const double *X, std::size_t n, std::size_t p, const double *w, const double *v,
                         double *out)
{
    for (std::size_t j = 0; j < p; ++j)
        out[j] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = (w ? w[k] : 1.0) * v[k];
        const double *row = X + k * p;
        for (std::size_t j = 0; j < p; ++j)
            out[j] += a * row[j];
    }
}

} // namespace

const KernelTable &scalar_kernels()
{
    static const KernelTable table{Backend::scalar, dot_scalar,           axpy_scalar,
                                   gemv_scalar,     weighted_gram_scalar, weighted_xtv_scalar};
    return table;
}

} // namespace adaptive_rd::simd
