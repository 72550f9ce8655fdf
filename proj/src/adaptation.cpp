#include "adaptive_rd/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/glm.hpp"
#include "adaptive_rd/spline.hpp"

namespace adaptive_rd {

bool UpdateSchedule::is_update_index(std::size_t i, std::size_t n_patients) const
{
    const auto w = static_cast<std::size_t>(warmup);
    if (i < w || i >= n_patients)
        return false;
    return (i - w) % static_cast<std::size_t>(update_every) == 0;
}

void UpdateSchedule::validate() const
{
    if (warmup < 1)
        throw ConfigError("warmup must be at least 1");
    if (update_every < 1)
        throw ConfigError("update_every must be at least 1");
}

void validate(const ThresholdStrategy &strategy)
{
    std::visit(
        [](const auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                if (!(s.c >= 0.0 && s.c <= 1.0))
                    throw ConfigError("threshold_strategy.c must lie in [0, 1]");
            } else if constexpr (std::is_same_v<T, RateTarget>) {
                s.schedule.validate();
                if (!(s.rate > 0.0 && s.rate < 1.0))
                    throw ConfigError("threshold_strategy.rate must lie in (0, 1)");
            } else {
                s.schedule.validate();
                if (!(s.nnt > 1.0) || !std::isfinite(s.nnt))
                    throw ConfigError("threshold_strategy.nnt must exceed 1");
                if (!(s.smoothing >= 0.0 && s.smoothing <= 1.0))
                    throw ConfigError("threshold_strategy.smoothing must lie in [0, 1]");
            }
        },
        strategy);
}

void validate(const ModelUpdateStrategy &strategy)
{
    std::visit(
        [](const auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (!std::is_same_v<T, NoModelUpdate>) {
                s.schedule.validate();
                if (!(s.shrink_n0 > 0.0) || !std::isfinite(s.shrink_n0))
                    throw ConfigError("model_strategy.shrink_n0 must be positive");
            }
        },
        strategy);
}

double threshold_for_rate(std::span<const double> risks, double rate)
{
    if (!(rate > 0.0 && rate < 1.0))
        throw DomainError("threshold_for_rate: rate must lie in (0, 1)");
    if (risks.size() < kMinRatePoints)
        throw InsufficientDataError("threshold_for_rate: need at least 20 risks");
    std::vector<double> sorted(risks.begin(), risks.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, 1.0 - rate);
}

double cohens_d_to_nnt(double d)
{
    // 2 Phi(d / sqrt 2) - 1 == erf(d / 2)
    return 1.0 / std::erf(d / 2.0);
}

double nnt_to_cohens_d(double nnt)
{
    if (!(nnt > 1.0))
        throw DomainError("nnt_to_cohens_d: nnt must exceed 1");
    double lo = 1e-8;
    double hi = 10.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cohens_d_to_nnt(mid) > nnt)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double pooled_sd(std::span<const double> outcomes, std::span<const char> treatments)
{
    if (outcomes.size() != treatments.size())
        throw ShapeError("pooled_sd: outcomes and treatments differ in length");
    double sum[2] = {0.0, 0.0};
    double n[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const int a = treatments[k] ? 1 : 0;
        sum[a] += outcomes[k];
        n[a] += 1.0;
    }
    if (n[0] < 2.0 || n[1] < 2.0)
        throw InsufficientDataError("pooled_sd: need two outcomes per arm");
    const double mean[2] = {sum[0] / n[0], sum[1] / n[1]};
    double ss = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const int a = treatments[k] ? 1 : 0;
        const double d = outcomes[k] - mean[a];
        ss += d * d;
    }
    return std::sqrt(ss / (n[0] + n[1] - 2.0));
}

std::vector<CurvePoint> cohens_d_curve(std::span<const CurvePoint> effect_curve, double pooled_sd)
{
    if (!(pooled_sd > 0.0) || !std::isfinite(pooled_sd))
        throw NumericError("cohens_d_curve: pooled standard deviation must be positive");
    std::vector<CurvePoint> out;
    out.reserve(effect_curve.size());
    for (const auto &p : effect_curve)
        out.push_back({p.r, std::abs(p.value) / pooled_sd});
    return out;
}

double threshold_for_nnt(std::span<const CurvePoint> d_curve, double target_d, double previous_threshold,
                         double smoothing)
{
    if (d_curve.empty())
        throw InsufficientDataError("threshold_for_nnt: empty effect curve");
    if (!(smoothing >= 0.0 && smoothing <= 1.0))
        throw DomainError("threshold_for_nnt: smoothing must lie in [0, 1]");
    const CurvePoint *best = nullptr;
    double best_gap = 0.0;
    for (const auto &p : d_curve) {
        const double gap = std::abs(p.value - target_d);
        if (!best || gap < best_gap || (gap == best_gap && p.r < best->r)) {
            best = &p;
            best_gap = gap;
        }
    }
    return smoothing * previous_threshold + (1.0 - smoothing) * best->r;
}

double shrinkage_weight(double n, double n0)
{
    if (!(n >= 0.0))
        throw DomainError("shrinkage_weight: n must be non-negative");
    if (!(n0 > 0.0))
        throw DomainError("shrinkage_weight: n0 must be positive");
    return 1.0 / (1.0 + n / n0);
}

std::vector<double> shrink_coefficients(std::span<const double> fresh, std::span<const double> original, double n,
                                        double n0)
{
    if (fresh.size() != original.size())
        throw ShapeError("shrink_coefficients: coefficient vectors differ in length");
    const double w = shrinkage_weight(n, n0);
    std::vector<double> out(fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i)
        out[i] = w * original[i] + (1.0 - w) * fresh[i];
    return out;
}

namespace {

void check_update_data(const UpdateData &data)
{
    const std::size_t n = data.size();
    if (data.covariates.size() != n || data.baseline_risks.size() != n || data.treatments.size() != n)
        throw ShapeError("model update: record columns differ in length");
    if (n < kMinModelUpdateOutcomes)
        throw InsufficientDataError("model update: need at least 50 completed outcomes");
    const auto treated = std::count_if(data.treatments.begin(), data.treatments.end(), [](char a) { return a != 0; });
    if (treated == 0 || static_cast<std::size_t>(treated) == n)
        throw InsufficientDataError("model update: both arms must be represented");
}

Vector response_of(const UpdateData &data)
{
    Vector y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t k = 0; k < data.size(); ++k)
        y[static_cast<Eigen::Index>(k)] = data.outcomes[k];
    return y;
}

} // namespace

RiskModelVersion recalibrate_model(const UpdateData &data, const RiskModelVersion &original, double n0,
                                   int version_id)
{
    check_update_data(data);
    const auto *pce = std::get_if<PceStratified>(&original.kind);
    if (!pce)
        throw DomainError("recalibrate_model: original model must be the stratified equations");
    const auto n = static_cast<Eigen::Index>(data.size());
    GlmSpec spec;
    spec.family = Family::bernoulli_cloglog;
    spec.design.resize(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
        spec.design(k, 0) = 1.0;
        spec.design(k, 1) = cloglog(data.baseline_risks[static_cast<std::size_t>(k)]);
        spec.design(k, 2) = data.treatments[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
    }
    spec.response = response_of(data);
    const GlmFit fit = fit_glm(spec);
    const double identity[3] = {0.0, 1.0, 0.0};
    const auto theta = shrink_coefficients({fit.coefficients.data(), 3}, identity, static_cast<double>(n), n0);

    RiskModelVersion out;
    out.version_id = version_id;
    out.provenance = Provenance::recalibrated;
    out.kind = PceStratified{pce->coefficients, Calibration{theta[0], theta[1]}};
    return out;
}

RiskModelVersion revise_model(const UpdateData &data, const RiskModelVersion &original, double n0, int version_id)
{
    check_update_data(data);
    const auto n = static_cast<Eigen::Index>(data.size());
    constexpr auto p = static_cast<Eigen::Index>(kUnstratifiedTermCount);

    RowMatrix terms(n, p);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto row = unstratified_terms(data.covariates[static_cast<std::size_t>(k)]);
        for (Eigen::Index c = 0; c < p; ++c)
            terms(k, c) = row[static_cast<std::size_t>(c)];
    }

    // Original model expressed on the unstratified design.
    GlmSpec proj;
    proj.family = Family::gaussian_identity;
    proj.design = terms;
    proj.response.resize(n);
    for (Eigen::Index k = 0; k < n; ++k)
        proj.response[k] = cloglog(predict_risk(original, data.covariates[static_cast<std::size_t>(k)]));
    const GlmFit baseline = fit_glm(proj);

    GlmSpec spec;
    spec.family = Family::bernoulli_cloglog;
    spec.design.resize(n, p + 1);
    spec.design.leftCols(p) = terms;
    for (Eigen::Index k = 0; k < n; ++k)
        spec.design(k, p) = data.treatments[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
    spec.response = response_of(data);
    const GlmFit fit = fit_glm(spec);

    std::vector<double> anchor(baseline.coefficients.data(), baseline.coefficients.data() + p);
    anchor.push_back(0.0);
    const auto theta = shrink_coefficients({fit.coefficients.data(), static_cast<std::size_t>(p + 1)}, anchor,
                                           static_cast<double>(n), n0);

    GlmUnstratified model;
    std::copy(theta.begin(), theta.begin() + p, model.coefficients.begin());
    model.treatment_coefficient = theta.back();

    RiskModelVersion out;
    out.version_id = version_id;
    out.provenance = Provenance::revised;
    out.kind = model;
    return out;
}

} // namespace adaptive_rd
