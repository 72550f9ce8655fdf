#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adaptive_rd/glm.hpp"
#include "adaptive_rd/pca.hpp"
#include "adaptive_rd/risk_model.hpp"
#include "adaptive_rd/spline.hpp"

namespace adaptive_rd {

struct EstimatorConfig {
    int spline_df = 2;
    double pca_variance = 0.90;
    int max_components = 10;
    double bandwidth = 0.02;
    Family family = Family::gaussian_identity;
    double confidence = 0.95;
    double min_effective_count = 5.0;

    void validate() const;
    // Two-sided normal critical value for `confidence`.
    double z() const;
};

inline constexpr std::size_t kMinPatientsPerArm = 10;

// Two-arm spline GLM on counterfactual risks:
//   g(mu) = theta0 + (1-A) N0(f) + A (delta + N1(f)) + PC scores
// where f is the focal shifted risk and the PC scores summarize the other
// columns after residualizing them on f.
struct FittedOutcomeSurface {
    EstimatorConfig config;
    GlmFit fit;
    SplineBasis untreated_basis;
    SplineBasis treated_basis;

    std::size_t focal_column = 0;
    // Distinct non-focal columns with non-negligible residual spread.
    std::vector<std::size_t> pc_columns;
    std::vector<double> resid_intercept;
    std::vector<double> resid_slope;
    std::vector<double> column_scale; // sqrt(multiplicity)
    PcaResult pca;

    std::vector<char> treatments; // training arms, for effective counts

    std::size_t width() const;
    int components() const { return pca.retained; }

    // Design rows for every patient of `matrix`, with the arm forced to `arm`
    // when it is 0/1, or the observed arm when arm < 0.
    RowMatrix design(const CounterfactualRiskMatrix &matrix, std::span<const char> arms) const;
    RowMatrix design_at_arm(const CounterfactualRiskMatrix &matrix, int arm) const;
};

FittedOutcomeSurface fit_outcome_surface(const CounterfactualRiskMatrix &matrix, std::span<const char> treatments,
                                         std::span<const double> outcomes, const EstimatorConfig &config);

struct ArmMeans {
    double mu0 = 0.0;
    double mu1 = 0.0;
};

ArmMeans predict_arm_means(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix,
                           std::size_t k);

struct EffectEstimate {
    double r = 0.0;
    double beta_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mu1 = 0.0;
    double mu0 = 0.0;
    double eff_n_treated = 0.0;
    double eff_n_untreated = 0.0;
    bool low_support = false;
};

// Per-row predictions reused across evaluation points.
struct SurfacePredictions {
    std::vector<double> mu0;
    std::vector<double> mu1;
    RowMatrix mu0_gradient; // d mu0_k / d theta
    RowMatrix mu1_gradient;
    std::vector<double> focal;
};

SurfacePredictions predict_surface(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix);

EffectEstimate estimate_effect(const FittedOutcomeSurface &surface, const SurfacePredictions &pred, double r);
EffectEstimate estimate_effect(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r);

struct EffectCurve {
    std::vector<EffectEstimate> points;
    std::vector<double> unsupported; // grid values with no kernel support
};

EffectCurve effect_curve(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix,
                         std::span<const double> grid);
EffectCurve effect_curve(const FittedOutcomeSurface &surface, const SurfacePredictions &pred,
                         std::span<const double> grid);

// sqrt(grad' V grad) for the kernel-weighted effect functional at r.
double delta_method_se(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r);
// Gradient of the effect functional with respect to theta.
Vector effect_gradient(const SurfacePredictions &pred, std::span<const double> weights);
double quadratic_form_se(const Vector &gradient, const Matrix &covariance);

// Kernel-weighted effect at r for an arbitrary theta (finite-difference checks).
double effect_functional(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r,
                         const Vector &theta);

} // namespace adaptive_rd
