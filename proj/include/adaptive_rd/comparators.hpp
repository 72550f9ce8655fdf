#pragma once

#include <span>

#include "adaptive_rd/cohort.hpp"
#include "adaptive_rd/glm.hpp"

namespace adaptive_rd {

struct ComparatorData {
    std::span<const PatientCovariates> covariates;
    std::span<const char> treatments;
    std::span<const double> outcomes;
    std::span<const double> focal_risks; // kernel coordinate (focal shifted risk)
};

struct ComparatorOptions {
    Family family = Family::gaussian_identity; // outcome model
    double bandwidth = 0.02;
    double propensity_floor = 0.01;
    double propensity_ceiling = 0.99;
};

// Columns of the comparator design: age, total and HDL cholesterol, systolic
// pressure, treated hypertension, smoker, diabetes.
inline constexpr int kComparatorPredictors = 7;

double naive_diff(std::span<const double> outcomes, std::span<const char> treatments);

// Kernel-smoothed g-computation from a GLM on [1, A, predictors].
double outcome_regression_ate(const ComparatorData &data, double r, const ComparatorOptions &options);

// Kernel-weighted Horvitz-Thompson pseudo-outcomes Y (A/e - (1-A)/(1-e)).
double ipw_ate(const ComparatorData &data, double r, const ComparatorOptions &options);

// Kernel-weighted augmented IPW (efficient influence function) scores.
double aipw_ate(const ComparatorData &data, double r, const ComparatorOptions &options);

// Propensities from a logistic model on the predictors, clipped.
std::vector<double> fitted_propensities(const ComparatorData &data, const ComparatorOptions &options);

struct PotentialOutcomePredictions {
    std::vector<double> mu0;
    std::vector<double> mu1;
};
PotentialOutcomePredictions fitted_potential_outcomes(const ComparatorData &data, const ComparatorOptions &options);

} // namespace adaptive_rd
