#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "adaptive_rd/cohort.hpp"
#include "adaptive_rd/risk_model.hpp"

namespace adaptive_rd {

struct UpdateSchedule {
    int warmup = 400;
    int update_every = 100;

    // Updates happen after patient i = warmup + m * update_every (m >= 0) and
    // apply from patient i + 1; nothing happens after the last patient.
    bool is_update_index(std::size_t i, std::size_t n_patients) const;
    void validate() const;
};

struct FixedThreshold {
    double c = 0.10;
};

struct RateTarget {
    double rate = 0.30;
    UpdateSchedule schedule;
};

struct NntTarget {
    double nnt = 3.0;
    UpdateSchedule schedule;
    double smoothing = 0.5;
};

using ThresholdStrategy = std::variant<FixedThreshold, RateTarget, NntTarget>;

struct NoModelUpdate {};

struct Recalibrate {
    UpdateSchedule schedule;
    double shrink_n0 = 5000.0;
};

struct Revise {
    UpdateSchedule schedule;
    double shrink_n0 = 5000.0;
};

using ModelUpdateStrategy = std::variant<NoModelUpdate, Recalibrate, Revise>;

void validate(const ThresholdStrategy &strategy);
void validate(const ModelUpdateStrategy &strategy);

inline constexpr std::size_t kMinRatePoints = 20;
inline constexpr std::size_t kMinModelUpdateOutcomes = 50;

// Empirical (1 - rate)-quantile of accumulated raw risks.
double threshold_for_rate(std::span<const double> risks, double rate);

// d solving 1 / nnt = 2 Phi(d / sqrt 2) - 1.
double nnt_to_cohens_d(double nnt);
double cohens_d_to_nnt(double d);

struct CurvePoint {
    double r = 0.0;
    double value = 0.0;
};

// sqrt of the pooled within-arm variance: ((n1-1) s1^2 + (n0-1) s0^2) / (n1 + n0 - 2).
double pooled_sd(std::span<const double> outcomes, std::span<const char> treatments);

// |beta(r)| / pooled_sd pointwise.
std::vector<CurvePoint> cohens_d_curve(std::span<const CurvePoint> effect_curve, double pooled_sd);

// r* = argmin |d(r) - target| (first on ties after sorting by r), blended with
// the previous threshold.
double threshold_for_nnt(std::span<const CurvePoint> d_curve, double target_d, double previous_threshold,
                         double smoothing);

double shrinkage_weight(double n, double n0);
// w * original + (1 - w) * fresh, w = 1 / (1 + n / n0).
std::vector<double> shrink_coefficients(std::span<const double> fresh, std::span<const double> original, double n,
                                        double n0);

// Completed records available at an update point.
struct UpdateData {
    std::span<const PatientCovariates> covariates;
    std::span<const double> baseline_risks; // original-model risk of each record
    std::span<const char> treatments;
    std::span<const double> outcomes;

    std::size_t size() const { return outcomes.size(); }
};

// cloglog GLM of the outcome on [1, cloglog(baseline risk), A]; the intercept
// and slope become the calibration map of the original equations.
RiskModelVersion recalibrate_model(const UpdateData &data, const RiskModelVersion &original, double n0,
                                   int version_id);

// Single cloglog GLM on the 13 PCE transforms (no sex/race strata) plus A,
// shrunk toward the least-squares projection of the original linear predictor
// onto the same terms.
RiskModelVersion revise_model(const UpdateData &data, const RiskModelVersion &original, double n0, int version_id);

} // namespace adaptive_rd
