#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "adaptive_rd/linalg.hpp"

namespace adaptive_rd {

enum class Family { gaussian_identity, bernoulli_logit, bernoulli_cloglog };

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view name);
bool is_bernoulli(Family family);

double inverse_link(Family family, double eta);
// d mean / d eta
double inverse_link_derivative(Family family, double eta);

struct GlmSpec {
    Family family = Family::gaussian_identity;
    RowMatrix design;  // n x p
    Vector response;   // n
    Vector weights;    // empty, or n non-negative observation weights
};

struct GlmOptions {
    double step_tolerance = 1e-8;
    double deviance_tolerance = 1e-10;
    int max_iterations = 100;
    double ridge = 1e-10;
};

struct GlmFit {
    Family family = Family::gaussian_identity;
    Vector coefficients;   // θ, length p
    Matrix covariance;     // V_θ, p x p
    double dispersion = 1.0;
    double deviance = 0.0;
    bool converged = false;
    int iterations = 0;
    bool ridge_applied = false;
    // Some fitted probabilities are numerically 0 or 1 (quasi-separation).
    bool separation_suspected = false;
};

// Maximum likelihood by iteratively reweighted least squares.
// Throws ShapeError/DomainError on invalid specs, RankDeficiencyError when the
// information stays singular after jitter and NonConvergenceError (carrying the
// last iterate) after max_iterations.
GlmFit fit_glm(const GlmSpec &spec, const GlmOptions &options = {});

double glm_linear_predictor(const GlmFit &fit, std::span<const double> row);
double glm_mean(const GlmFit &fit, std::span<const double> row, Family family);
inline double glm_mean(const GlmFit &fit, std::span<const double> row)
{
    return glm_mean(fit, row, fit.family);
}

} // namespace adaptive_rd
