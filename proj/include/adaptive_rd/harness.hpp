#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptive_rd/estimator.hpp"
#include "adaptive_rd/risk_model.hpp"
#include "adaptive_rd/scenario.hpp"

namespace adaptive_rd {

struct PatientRecord {
    std::size_t index = 0; // 1-based
    PatientCovariates covariates;
    int version_id = 0;
    double raw_risk = 0.0;
    double threshold = 0.0;
    double shifted_risk = 0.0;
    bool treated = false;
    double outcome = 0.0;
    double baseline_risk = 0.0; // risk under the original equations
};

struct AdaptationEvent {
    std::size_t index = 0; // applies from patient index + 1
    std::string kind;      // threshold, model, threshold_skipped, model_skipped
    double old_value = 0.0;
    double new_value = 0.0;
    std::string detail;
};

struct TrialData {
    ScenarioConfig config;
    std::vector<PatientRecord> records;
    ModelHistory history;
    CounterfactualRiskMatrix matrix;
    std::vector<AdaptationEvent> events;
    std::size_t clamp_events = 0;

    std::vector<char> treatments() const;
    std::vector<double> outcomes() const;
    std::vector<double> baseline_risks() const;
    std::vector<PatientCovariates> covariates() const;
};

// Cohort rows for csv sources, loaded once and shared by replications.
using CohortRows = std::vector<PatientCovariates>;
CohortRows load_cohort_rows(const ScenarioConfig &config);

TrialData run_scenario(const ScenarioConfig &config, const CohortRows *rows = nullptr);

enum class Method { adaptive_rd, naive, outcome_regression, ipw, aipw };
inline constexpr std::array<Method, 5> kMethods{Method::adaptive_rd, Method::naive, Method::outcome_regression,
                                                Method::ipw, Method::aipw};
std::string_view to_string(Method m);

struct MethodResult {
    bool ok = false;
    double estimate = 0.0;
    std::string error;
    // adaptive RD only
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool low_support = false;
};

struct Evaluation {
    double final_threshold = 0.0;
    double truth = 0.0; // kernel-smoothed true local ATE at r = 0
    std::array<MethodResult, kMethods.size()> methods;

    const MethodResult &operator[](Method m) const { return methods[static_cast<std::size_t>(m)]; }
    MethodResult &operator[](Method m) { return methods[static_cast<std::size_t>(m)]; }
};

Evaluation evaluate_at_final_threshold(const TrialData &trial);

// Adaptive RD fit on the full trial plus its effect curve over the config grid.
struct TrialFit {
    FittedOutcomeSurface surface;
    SurfacePredictions predictions;
    EffectCurve curve;
};
TrialFit fit_trial(const TrialData &trial);
TrialFit fit_logged(const CounterfactualRiskMatrix &matrix, std::span<const char> treatments,
                    std::span<const double> outcomes, const EstimatorConfig &config, std::span<const double> grid);

struct MethodSummary {
    std::size_t successes = 0;
    std::size_t failures = 0;
    double bias = 0.0;
    double mse = 0.0;
    double mean_abs_error = 0.0;
    std::optional<double> coverage; // adaptive RD only
    std::array<double, 5> error_quantiles{}; // 5%, 25%, 50%, 75%, 95%
};

struct ReplicationRecord {
    std::size_t replication = 0;
    bool trial_ok = false;
    std::string trial_error;
    Evaluation evaluation;
};

struct ReplicationReport {
    ScenarioConfig config;
    std::size_t replications = 0;
    std::size_t trial_failures = 0;
    std::vector<ReplicationRecord> records; // ordered by replication index
    std::array<MethodSummary, kMethods.size()> methods;
    // final-threshold trajectory summary
    double final_threshold_mean = 0.0;
    double final_threshold_sd = 0.0;
    double final_threshold_min = 0.0;
    double final_threshold_max = 0.0;

    const MethodSummary &operator[](Method m) const { return methods[static_cast<std::size_t>(m)]; }
};

// Seed of replication `index` under `root`.
std::uint64_t replication_seed(std::uint64_t root, std::size_t index);

ReplicationReport run_replications(const ScenarioConfig &config, std::size_t count, std::size_t workers = 1);

// Recomputes the aggregate fields from `records`.
void aggregate(ReplicationReport &report);

} // namespace adaptive_rd
