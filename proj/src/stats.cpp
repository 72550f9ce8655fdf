#include "adaptive_rd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "adaptive_rd/error.hpp"

namespace adaptive_rd {

Residualized residualize(std::span<const double> column, std::span<const double> against)
{
    if (column.size() != against.size())
        throw ShapeError("residualize: length mismatch");
    const std::size_t n = column.size();
    if (n == 0)
        throw InsufficientDataError("residualize: empty input");

    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += against[k];
        my += column[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = against[k] - mx;
        sxx += dx * dx;
        sxy += dx * (column[k] - my);
    }

    Residualized out;
    out.residuals.resize(n);
    if (!(sxx > 0.0)) {
        out.against_constant = true;
        out.intercept = my;
        for (std::size_t k = 0; k < n; ++k)
            out.residuals[k] = column[k] - my;
        return out;
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    for (std::size_t k = 0; k < n; ++k)
        out.residuals[k] = (column[k] - my) - out.slope * (against[k] - mx);
    return out;
}

std::vector<double> gaussian_kernel_weights(std::span<const double> values, double center, double bandwidth)
{
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw DomainError("kernel weights: bandwidth must be positive");
    if (!std::isfinite(center))
        throw DomainError("kernel weights: center must be finite");
    double nearest = std::numeric_limits<double>::infinity();
    for (double v : values)
        nearest = std::min(nearest, std::abs(v - center));
    if (!(nearest <= kKernelSupportWidths * bandwidth))
        throw EffectiveSupportError("kernel weights: no observation within 12h of the evaluation point");

    // exponents relative to the largest one
    const double top = -(nearest * nearest) / (2.0 * bandwidth * bandwidth);
    std::vector<double> w(values.size());
    double total = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double d = values[k] - center;
        w[k] = std::exp(-(d * d) / (2.0 * bandwidth * bandwidth) - top);
        total += w[k];
    }
    for (double &v : w)
        v /= total;
    return w;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("normal_quantile: probability must lie in (0,1)");
    // Acklam's rational approximation, then two Newton steps on erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x = 0.0;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = normal_cdf(x) - p;
        const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        x -= e / density;
    }
    return x;
}

} // namespace adaptive_rd
