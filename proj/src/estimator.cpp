#include "adaptive_rd/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/stats.hpp"

namespace adaptive_rd {

namespace {

// Non-focal columns whose residual variance falls below this share of the
// focal variance differ from it only by rounding (e.g. a threshold change).
constexpr double kNegligibleResidualShare = 1e-16;

double variance_of(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x)
        m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size());
}

} // namespace

void EstimatorConfig::validate() const
{
    if (spline_df < 1)
        throw ConfigError("estimator.spline_df must be at least 1");
    if (!(pca_variance > 0.0 && pca_variance <= 1.0))
        throw ConfigError("estimator.pca_variance must lie in (0, 1]");
    if (max_components < 0)
        throw ConfigError("estimator.max_components must be non-negative");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw ConfigError("estimator.bandwidth must be positive");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ConfigError("estimator.confidence must lie in (0, 1)");
    if (!(min_effective_count >= 0.0))
        throw ConfigError("estimator.min_effective_count must be non-negative");
}

double EstimatorConfig::z() const
{
    return normal_quantile(0.5 + 0.5 * confidence);
}

std::size_t FittedOutcomeSurface::width() const
{
    return 2 + 2 * static_cast<std::size_t>(config.spline_df) + static_cast<std::size_t>(pca.retained);
}

RowMatrix FittedOutcomeSurface::design(const CounterfactualRiskMatrix &matrix, std::span<const char> arms) const
{
    const std::size_t n = matrix.patients();
    if (arms.size() != n)
        throw ShapeError("design: arm vector does not match the matrix");
    if (focal_column >= matrix.distinct_columns())
        throw ShapeError("design: matrix lacks the fitted focal column");
    for (std::size_t c : pc_columns)
        if (c >= matrix.distinct_columns())
            throw ShapeError("design: matrix lacks a fitted column");

    const auto df = static_cast<Eigen::Index>(config.spline_df);
    const auto q = static_cast<Eigen::Index>(pca.retained);
    const auto nn = static_cast<Eigen::Index>(n);
    const auto &f = matrix.column(focal_column).shifted;

    RowMatrix x = RowMatrix::Zero(nn, 2 + 2 * df + q);
    std::vector<double> basis(static_cast<std::size_t>(df));
    for (Eigen::Index k = 0; k < nn; ++k) {
        const bool treated = arms[static_cast<std::size_t>(k)] != 0;
        const double fk = f[static_cast<std::size_t>(k)];
        x(k, 0) = 1.0;
        if (treated) {
            natural_cubic_basis_row(fk, treated_basis, basis);
            x(k, 1 + df) = 1.0;
            for (Eigen::Index j = 0; j < df; ++j)
                x(k, 2 + df + j) = basis[static_cast<std::size_t>(j)];
        } else {
            natural_cubic_basis_row(fk, untreated_basis, basis);
            for (Eigen::Index j = 0; j < df; ++j)
                x(k, 1 + j) = basis[static_cast<std::size_t>(j)];
        }
    }

    if (q > 0) {
        const auto m = static_cast<Eigen::Index>(pc_columns.size());
        RowMatrix centered(nn, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const std::size_t idx = static_cast<std::size_t>(j);
            const auto &col = matrix.column(pc_columns[idx]).shifted;
            for (Eigen::Index k = 0; k < nn; ++k) {
                const double fk = f[static_cast<std::size_t>(k)];
                const double resid = col[static_cast<std::size_t>(k)] - resid_intercept[idx] - resid_slope[idx] * fk;
                centered(k, j) = column_scale[idx] * resid - pca.means[j];
            }
        }
        x.rightCols(q) = centered * pca.loadings;
    }
    return x;
}

RowMatrix FittedOutcomeSurface::design_at_arm(const CounterfactualRiskMatrix &matrix, int arm) const
{
    const std::vector<char> arms(matrix.patients(), static_cast<char>(arm != 0));
    return design(matrix, arms);
}

FittedOutcomeSurface fit_outcome_surface(const CounterfactualRiskMatrix &matrix, std::span<const char> treatments,
                                         std::span<const double> outcomes, const EstimatorConfig &config)
{
    config.validate();
    const std::size_t n = matrix.patients();
    if (treatments.size() != n || outcomes.size() != n)
        throw ShapeError("fit_outcome_surface: treatments/outcomes do not match the matrix");

    FittedOutcomeSurface s;
    s.config = config;
    s.focal_column = matrix.focal_column();
    s.treatments.assign(treatments.begin(), treatments.end());

    const auto &f = matrix.column(s.focal_column).shifted;
    std::vector<double> arm_values[2];
    for (std::size_t k = 0; k < n; ++k)
        arm_values[treatments[k] ? 1 : 0].push_back(f[k]);
    if (arm_values[0].size() < kMinPatientsPerArm || arm_values[1].size() < kMinPatientsPerArm)
        throw InsufficientDataError("fit_outcome_surface: need at least 10 patients in each arm");
    s.untreated_basis = choose_knots(arm_values[0], config.spline_df);
    s.treated_basis = choose_knots(arm_values[1], config.spline_df);

    const double focal_var = variance_of(f);
    std::vector<std::vector<double>> resid_cols;
    for (std::size_t c = 0; c < matrix.distinct_columns(); ++c) {
        if (c == s.focal_column)
            continue;
        const auto &col = matrix.column(c);
        const Residualized r = residualize(col.shifted, f);
        std::vector<double> resid(n);
        for (std::size_t k = 0; k < n; ++k)
            resid[k] = col.shifted[k] - r.intercept - r.slope * f[k];
        if (variance_of(resid) <= kNegligibleResidualShare * focal_var)
            continue;
        s.pc_columns.push_back(c);
        s.resid_intercept.push_back(r.intercept);
        s.resid_slope.push_back(r.slope);
        s.column_scale.push_back(std::sqrt(static_cast<double>(col.multiplicity)));
        resid_cols.push_back(std::move(resid));
    }

    if (!resid_cols.empty() && config.max_components > 0) {
        const auto m = static_cast<Eigen::Index>(resid_cols.size());
        RowMatrix data(static_cast<Eigen::Index>(n), m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto idx = static_cast<std::size_t>(j);
            for (std::size_t k = 0; k < n; ++k)
                data(static_cast<Eigen::Index>(k), j) = s.column_scale[idx] * resid_cols[idx][k];
        }
        PcaOptions opts;
        opts.variance_threshold = config.pca_variance;
        opts.max_components = config.max_components;
        s.pca = pca(data, opts);
    }
    if (s.pca.retained == 0) {
        s.pc_columns.clear();
        s.resid_intercept.clear();
        s.resid_slope.clear();
        s.column_scale.clear();
        s.pca = PcaResult{};
        s.pca.loadings = Matrix(0, 0);
    }

    GlmSpec spec;
    spec.family = config.family;
    spec.design = s.design(matrix, treatments);
    spec.response.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        spec.response[static_cast<Eigen::Index>(k)] = outcomes[k];
    s.fit = fit_glm(spec);
    return s;
}

ArmMeans predict_arm_means(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix,
                           std::size_t k)
{
    if (k >= matrix.patients())
        throw ShapeError("predict_arm_means: row out of range");
    const RowMatrix x0 = surface.design_at_arm(matrix, 0);
    const RowMatrix x1 = surface.design_at_arm(matrix, 1);
    const auto row = static_cast<Eigen::Index>(k);
    const auto p = static_cast<std::size_t>(x0.cols());
    return {glm_mean(surface.fit, {x0.row(row).data(), p}), glm_mean(surface.fit, {x1.row(row).data(), p})};
}

SurfacePredictions predict_surface(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix)
{
    SurfacePredictions out;
    const Family fam = surface.fit.family;
    const Vector &theta = surface.fit.coefficients;
    out.mu0_gradient = surface.design_at_arm(matrix, 0);
    out.mu1_gradient = surface.design_at_arm(matrix, 1);
    const Vector eta0 = out.mu0_gradient * theta;
    const Vector eta1 = out.mu1_gradient * theta;
    const auto n = eta0.size();
    out.mu0.resize(static_cast<std::size_t>(n));
    out.mu1.resize(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        out.mu0[static_cast<std::size_t>(k)] = inverse_link(fam, eta0[k]);
        out.mu1[static_cast<std::size_t>(k)] = inverse_link(fam, eta1[k]);
        out.mu0_gradient.row(k) *= inverse_link_derivative(fam, eta0[k]);
        out.mu1_gradient.row(k) *= inverse_link_derivative(fam, eta1[k]);
    }
    const auto &f = matrix.column(surface.focal_column).shifted;
    out.focal.assign(f.begin(), f.end());
    return out;
}

Vector effect_gradient(const SurfacePredictions &pred, std::span<const double> weights)
{
    const auto n = static_cast<Eigen::Index>(weights.size());
    if (pred.mu0_gradient.rows() != n)
        throw ShapeError("effect_gradient: weights do not match predictions");
    const Eigen::Map<const Vector> w(weights.data(), n);
    return (pred.mu1_gradient - pred.mu0_gradient).transpose() * w;
}

double quadratic_form_se(const Vector &gradient, const Matrix &covariance)
{
    if (covariance.rows() != gradient.size() || covariance.cols() != gradient.size())
        throw ShapeError("delta method: covariance does not match gradient");
    const double qf = gradient.dot(covariance * gradient);
    if (!std::isfinite(qf))
        throw CovarianceError("delta method: non-finite variance");
    if (qf < -1e-10)
        throw CovarianceError("delta method: covariance is not positive semi-definite");
    return std::sqrt(std::max(qf, 0.0));
}

EffectEstimate estimate_effect(const FittedOutcomeSurface &surface, const SurfacePredictions &pred, double r)
{
    const auto w = gaussian_kernel_weights(pred.focal, r, surface.config.bandwidth);
    const std::size_t n = w.size();
    if (surface.treatments.size() != n)
        throw ShapeError("estimate_effect: predictions do not match the fitted patients");

    EffectEstimate e;
    e.r = r;
    double eff[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        e.mu0 += w[k] * pred.mu0[k];
        e.mu1 += w[k] * pred.mu1[k];
        e.beta_hat += w[k] * (pred.mu1[k] - pred.mu0[k]);
        eff[surface.treatments[k] ? 1 : 0] += w[k];
    }
    e.eff_n_treated = eff[1] * static_cast<double>(n);
    e.eff_n_untreated = eff[0] * static_cast<double>(n);
    e.low_support = e.eff_n_treated < surface.config.min_effective_count ||
                    e.eff_n_untreated < surface.config.min_effective_count;
    e.se = quadratic_form_se(effect_gradient(pred, w), surface.fit.covariance);
    const double half = surface.config.z() * e.se;
    e.ci_low = e.beta_hat - half;
    e.ci_high = e.beta_hat + half;
    return e;
}

EffectEstimate estimate_effect(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r)
{
    return estimate_effect(surface, predict_surface(surface, matrix), r);
}

EffectCurve effect_curve(const FittedOutcomeSurface &surface, const SurfacePredictions &pred,
                         std::span<const double> grid)
{
    EffectCurve out;
    for (double r : grid) {
        try {
            out.points.push_back(estimate_effect(surface, pred, r));
        } catch (const EffectiveSupportError &) {
            out.unsupported.push_back(r);
        }
    }
    return out;
}

EffectCurve effect_curve(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix,
                         std::span<const double> grid)
{
    return effect_curve(surface, predict_surface(surface, matrix), grid);
}

double delta_method_se(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r)
{
    return estimate_effect(surface, matrix, r).se;
}

double effect_functional(const FittedOutcomeSurface &surface, const CounterfactualRiskMatrix &matrix, double r,
                         const Vector &theta)
{
    const Family fam = surface.fit.family;
    const Vector eta0 = surface.design_at_arm(matrix, 0) * theta;
    const Vector eta1 = surface.design_at_arm(matrix, 1) * theta;
    const auto &f = matrix.column(surface.focal_column).shifted;
    const auto w = gaussian_kernel_weights(f, r, surface.config.bandwidth);
    double beta = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        beta += w[k] * (inverse_link(fam, eta1[i]) - inverse_link(fam, eta0[i]));
    }
    return beta;
}

} // namespace adaptive_rd
