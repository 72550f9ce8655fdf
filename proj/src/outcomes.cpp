#include "adaptive_rd/outcomes.hpp"

#include <cmath>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/pce.hpp"
#include "adaptive_rd/stats.hpp"

namespace adaptive_rd {

std::string_view variant_name(const OutcomeParams &params)
{
    switch (params.index()) {
        case 0: return "attendance";
        case 1: return "cholesterol";
        default: return "ascvd";
    }
}

double attendance_prob(double baseline_risk, bool treated, const AttendanceParams &p, ClampCounter *clamps)
{
    const double r = baseline_risk;
    const double a = treated ? 1.0 : 0.0;
    const double prob = p.alpha1 * r + p.alpha2 * a * (r + 0.5) * (1.0 - r);
    if (prob < 0.0 || prob > 1.0) {
        if (clamps)
            ++clamps->events;
        return prob < 0.0 ? 0.0 : 1.0;
    }
    return prob;
}

double cholesterol_mean(double baseline_risk, bool treated, const CholesterolParams &p)
{
    return p.beta1 + p.beta2 * (treated ? 1.0 : 0.0) * baseline_risk;
}

double ascvd_prob(double baseline_risk, bool treated, const AscvdParams &p)
{
    const double eta = p.gamma1 + p.gamma2 * cloglog(baseline_risk) + p.gamma3 * (treated ? 1.0 : 0.0);
    return inverse_cloglog(eta);
}

OutcomeModel::OutcomeModel(OutcomeParams params) : params_(std::move(params))
{
    if (const auto *att = std::get_if<AttendanceParams>(&params_)) {
        if (!std::isfinite(att->alpha1) || !std::isfinite(att->alpha2))
            throw ConfigError("attendance params must be finite");
        kind_ = OutcomeKind::binary;
        for (int g = 0; g <= 1000 && !clamps_on_grid_; ++g) {
            const double r = g / 1000.0;
            for (bool a : {false, true}) {
                const double raw = att->alpha1 * r + att->alpha2 * (a ? 1.0 : 0.0) * (r + 0.5) * (1.0 - r);
                if (raw < 0.0 || raw > 1.0)
                    clamps_on_grid_ = true;
            }
        }
    } else if (const auto *chol = std::get_if<CholesterolParams>(&params_)) {
        if (!(chol->sigma > 0.0) || !std::isfinite(chol->sigma))
            throw ConfigError("cholesterol sigma must be positive");
        if (!std::isfinite(chol->beta1) || !std::isfinite(chol->beta2))
            throw ConfigError("cholesterol params must be finite");
        kind_ = OutcomeKind::continuous;
    } else {
        const auto &asc = std::get<AscvdParams>(params_);
        if (!std::isfinite(asc.gamma1) || !std::isfinite(asc.gamma2) || !std::isfinite(asc.gamma3))
            throw ConfigError("ascvd params must be finite");
        kind_ = OutcomeKind::binary;
    }
}

double OutcomeModel::mean(double baseline_risk, bool treated, ClampCounter *clamps) const
{
    switch (params_.index()) {
        case 0: return attendance_prob(baseline_risk, treated, std::get<0>(params_), clamps);
        case 1: return cholesterol_mean(baseline_risk, treated, std::get<1>(params_));
        default: return ascvd_prob(baseline_risk, treated, std::get<2>(params_));
    }
}

double OutcomeModel::sigma() const
{
    if (const auto *chol = std::get_if<CholesterolParams>(&params_))
        return chol->sigma;
    return 0.0;
}

double draw_outcome(const OutcomeModel &model, double baseline_risk, bool treated, const SeedStream &stream,
                    ClampCounter *clamps)
{
    Engine rng = stream.engine();
    const double m = model.mean(baseline_risk, treated, clamps);
    if (model.kind() == OutcomeKind::binary)
        return uniform01(rng) < m ? 1.0 : 0.0;
    return m + model.sigma() * standard_normal(rng);
}

double true_local_ate(const OutcomeModel &model, double baseline_risk)
{
    return model.mean(baseline_risk, true) - model.mean(baseline_risk, false);
}

namespace {

template <typename F>
double smoothed(std::span<const double> baseline, std::span<const double> weighting, double r, double h, F &&f)
{
    if (baseline.size() != weighting.size())
        throw ShapeError("smoothed truth: baseline and weighting lengths differ");
    const auto w = gaussian_kernel_weights(weighting, r, h);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] * f(baseline[k]);
    return acc;
}

} // namespace

double true_smoothed_ate(const OutcomeModel &model, std::span<const double> baseline_risks,
                         std::span<const double> weighting_values, double r, double bandwidth)
{
    return smoothed(baseline_risks, weighting_values, r, bandwidth,
                    [&](double b) { return true_local_ate(model, b); });
}

double true_smoothed_mean(const OutcomeModel &model, std::span<const double> baseline_risks,
                          std::span<const double> weighting_values, double r, double bandwidth, bool treated)
{
    return smoothed(baseline_risks, weighting_values, r, bandwidth,
                    [&](double b) { return model.mean(b, treated); });
}

} // namespace adaptive_rd
