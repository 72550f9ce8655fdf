#pragma once

#include <span>
#include <vector>

namespace adaptive_rd {

struct Residualized {
    std::vector<double> residuals;
    double intercept = 0.0;
    double slope = 0.0;
    // `against` had no spread; residuals are column minus its mean.
    bool against_constant = false;
};

// column - (a + b * against) with (a, b) from least squares.
Residualized residualize(std::span<const double> column, std::span<const double> against);

// Normalized Gaussian kernel weights exp(-(v - center)^2 / (2 h^2)) / sum.
// Throws EffectiveSupportError when every value is farther than 12h from center.
std::vector<double> gaussian_kernel_weights(std::span<const double> values, double center, double bandwidth);

inline constexpr double kKernelSupportWidths = 12.0;

double normal_cdf(double x);
// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

} // namespace adaptive_rd
