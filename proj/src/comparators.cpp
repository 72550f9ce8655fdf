#include "adaptive_rd/comparators.hpp"

#include <algorithm>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/linalg.hpp"
#include "adaptive_rd/stats.hpp"

namespace adaptive_rd {

namespace {

void check(const ComparatorData &d)
{
    const std::size_t n = d.outcomes.size();
    if (d.covariates.size() != n || d.treatments.size() != n || d.focal_risks.size() != n)
        throw ShapeError("comparator: input columns differ in length");
}

void fill_predictors(const PatientCovariates &pc, double *out)
{
    out[0] = pc.age;
    out[1] = pc.total_chol;
    out[2] = pc.hdl_chol;
    out[3] = pc.systolic_bp;
    out[4] = pc.bp_treated ? 1.0 : 0.0;
    out[5] = pc.smoker ? 1.0 : 0.0;
    out[6] = pc.diabetes ? 1.0 : 0.0;
}

double kernel_mean(std::span<const double> focal, double r, double h, std::span<const double> values)
{
    const auto w = gaussian_kernel_weights(focal, r, h);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] * values[k];
    return acc;
}

} // namespace

double naive_diff(std::span<const double> outcomes, std::span<const char> treatments)
{
    if (outcomes.size() != treatments.size())
        throw ShapeError("naive_diff: outcomes and treatments differ in length");
    double sum[2] = {0.0, 0.0};
    double n[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const int a = treatments[k] ? 1 : 0;
        sum[a] += outcomes[k];
        n[a] += 1.0;
    }
    if (n[0] == 0.0 || n[1] == 0.0)
        throw InsufficientDataError("naive_diff: both arms must be non-empty");
    return sum[1] / n[1] - sum[0] / n[0];
}

PotentialOutcomePredictions fitted_potential_outcomes(const ComparatorData &data, const ComparatorOptions &options)
{
    check(data);
    const auto n = static_cast<Eigen::Index>(data.outcomes.size());
    const auto treated = std::count_if(data.treatments.begin(), data.treatments.end(), [](char a) { return a != 0; });
    if (treated < 10 || n - treated < 10)
        throw InsufficientDataError("outcome regression: need at least 10 patients per arm");

    constexpr Eigen::Index p = 2 + kComparatorPredictors;
    GlmSpec spec;
    spec.family = options.family;
    spec.design.resize(n, p);
    spec.response.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        spec.design(k, 0) = 1.0;
        spec.design(k, 1) = data.treatments[i] ? 1.0 : 0.0;
        fill_predictors(data.covariates[i], &spec.design(k, 2));
        spec.response[k] = data.outcomes[i];
    }
    const GlmFit fit = fit_glm(spec);

    PotentialOutcomePredictions out;
    out.mu0.resize(static_cast<std::size_t>(n));
    out.mu1.resize(static_cast<std::size_t>(n));
    double row[p];
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < p; ++j)
            row[j] = spec.design(k, j);
        row[1] = 0.0;
        out.mu0[static_cast<std::size_t>(k)] = glm_mean(fit, row);
        row[1] = 1.0;
        out.mu1[static_cast<std::size_t>(k)] = glm_mean(fit, row);
    }
    return out;
}

std::vector<double> fitted_propensities(const ComparatorData &data, const ComparatorOptions &options)
{
    check(data);
    const auto n = static_cast<Eigen::Index>(data.outcomes.size());
    constexpr Eigen::Index p = 1 + kComparatorPredictors;
    GlmSpec spec;
    spec.family = Family::bernoulli_logit;
    spec.design.resize(n, p);
    spec.response.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        spec.design(k, 0) = 1.0;
        fill_predictors(data.covariates[i], &spec.design(k, 1));
        spec.response[k] = data.treatments[i] ? 1.0 : 0.0;
    }
    const GlmFit fit = fit_glm(spec);
    std::vector<double> e(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double raw = glm_mean(fit, {spec.design.row(k).data(), static_cast<std::size_t>(p)});
        e[static_cast<std::size_t>(k)] = std::clamp(raw, options.propensity_floor, options.propensity_ceiling);
    }
    return e;
}

double outcome_regression_ate(const ComparatorData &data, double r, const ComparatorOptions &options)
{
    const auto po = fitted_potential_outcomes(data, options);
    std::vector<double> effect(po.mu0.size());
    for (std::size_t k = 0; k < effect.size(); ++k)
        effect[k] = po.mu1[k] - po.mu0[k];
    return kernel_mean(data.focal_risks, r, options.bandwidth, effect);
}

double ipw_ate(const ComparatorData &data, double r, const ComparatorOptions &options)
{
    const auto e = fitted_propensities(data, options);
    std::vector<double> pseudo(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double a = data.treatments[k] ? 1.0 : 0.0;
        pseudo[k] = data.outcomes[k] * (a / e[k] - (1.0 - a) / (1.0 - e[k]));
    }
    return kernel_mean(data.focal_risks, r, options.bandwidth, pseudo);
}

double aipw_ate(const ComparatorData &data, double r, const ComparatorOptions &options)
{
    const auto e = fitted_propensities(data, options);
    const auto po = fitted_potential_outcomes(data, options);
    std::vector<double> score(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double a = data.treatments[k] ? 1.0 : 0.0;
        const double y = data.outcomes[k];
        score[k] = po.mu1[k] - po.mu0[k] + a * (y - po.mu1[k]) / e[k] - (1.0 - a) * (y - po.mu0[k]) / (1.0 - e[k]);
    }
    return kernel_mean(data.focal_risks, r, options.bandwidth, score);
}

} // namespace adaptive_rd
