#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "adaptive_rd/simd.hpp"

using namespace adaptive_rd;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n);
    for (auto &x : v)
        x = dist(rng);
    return v;
}

double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

TEST_CASE("backend name")
{
    CHECK(simd::backend_name(simd::Backend::scalar) == "scalar");
    CHECK(simd::backend_name(simd::Backend::avx2) == "avx2");
    CHECK(simd::scalar_kernels().backend == simd::Backend::scalar);
}

TEST_CASE("avx2 kernels agree with the scalar reference")
{
    const simd::KernelTable *fast = simd::avx2_kernels();
    if (!fast) {
        MESSAGE("AVX2 not available on this machine; equivalence not exercised");
        return;
    }
    const auto &ref = simd::scalar_kernels();
    std::mt19937_64 rng(11);

    // odd sizes hit every tail path
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 33u, 257u, 1000u}) {
        auto a = random_vector(n, rng);
        auto b = random_vector(n, rng);
        CHECK(rel_diff(ref.dot(a.data(), b.data(), n), fast->dot(a.data(), b.data(), n)) < 1e-13);

        auto y1 = b, y2 = b;
        ref.axpy(0.37, a.data(), y1.data(), n);
        fast->axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_diff(y1[i], y2[i]) < 1e-14);
    }

    for (std::size_t p : {1u, 2u, 5u, 8u, 13u}) {
        const std::size_t n = 301;
        auto X = random_vector(n * p, rng);
        auto v = random_vector(p, rng);
        auto y = random_vector(n, rng);
        std::vector<double> w(n);
        std::uniform_real_distribution<double> u(0.0, 2.0);
        for (auto &x : w)
            x = u(rng);

        std::vector<double> o1(n), o2(n);
        ref.gemv(X.data(), n, p, v.data(), o1.data());
        fast->gemv(X.data(), n, p, v.data(), o2.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_diff(o1[i], o2[i]) < 1e-13);

        for (const double *wp : {static_cast<const double *>(nullptr), static_cast<const double *>(w.data())}) {
            std::vector<double> g1(p * p, -1.0), g2(p * p, -2.0);
            ref.weighted_gram(X.data(), n, p, wp, g1.data());
            fast->weighted_gram(X.data(), n, p, wp, g2.data());
            for (std::size_t i = 0; i < p * p; ++i)
                CHECK(rel_diff(g1[i], g2[i]) < 1e-12);

            std::vector<double> t1(p, 5.0), t2(p, 6.0);
            ref.weighted_xtv(X.data(), n, p, wp, y.data(), t1.data());
            fast->weighted_xtv(X.data(), n, p, wp, y.data(), t2.data());
            for (std::size_t i = 0; i < p; ++i)
                CHECK(rel_diff(t1[i], t2[i]) < 1e-12);
        }
    }
}

TEST_CASE("scalar gram matches a direct triple loop")
{
    std::mt19937_64 rng(5);
    const std::size_t n = 20, p = 3;
    auto X = random_vector(n * p, rng);
    std::vector<double> g(p * p);
    simd::scalar_kernels().weighted_gram(X.data(), n, p, nullptr, g.data());
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += X[k * p + r] * X[k * p + c];
            CHECK(g[r * p + c] == doctest::Approx(s).epsilon(1e-14));
        }
}
