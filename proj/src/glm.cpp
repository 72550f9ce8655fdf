#include "adaptive_rd/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/simd.hpp"

namespace adaptive_rd {

std::string_view to_string(Family family)
{
    switch (family) {
        case Family::gaussian_identity: return "gaussian";
        case Family::bernoulli_logit: return "logit";
        case Family::bernoulli_cloglog: return "cloglog";
    }
    return "gaussian";
}

std::optional<Family> parse_family(std::string_view name)
{
    if (name == "gaussian" || name == "gaussian-identity")
        return Family::gaussian_identity;
    if (name == "logit" || name == "bernoulli-logit" || name == "logistic")
        return Family::bernoulli_logit;
    if (name == "cloglog" || name == "bernoulli-cloglog")
        return Family::bernoulli_cloglog;
    return std::nullopt;
}

bool is_bernoulli(Family family) { return family != Family::gaussian_identity; }

double inverse_link(Family family, double eta)
{
    switch (family) {
        case Family::gaussian_identity: return eta;
        case Family::bernoulli_logit:
            return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
        case Family::bernoulli_cloglog: return -std::expm1(-std::exp(eta));
    }
    return eta;
}

double inverse_link_derivative(Family family, double eta)
{
    switch (family) {
        case Family::gaussian_identity: return 1.0;
        case Family::bernoulli_logit: {
            const double e = std::exp(-std::abs(eta));
            return e / ((1.0 + e) * (1.0 + e));
        }
        case Family::bernoulli_cloglog: {
            const double ex = std::exp(eta);
            return std::isinf(ex) ? 0.0 : std::exp(eta - ex);
        }
    }
    return 1.0;
}

namespace {

constexpr double kMuEps = 1e-10;
constexpr double kMinMuEta = std::numeric_limits<double>::epsilon();

double link(Family family, double mu)
{
    switch (family) {
        case Family::gaussian_identity: return mu;
        case Family::bernoulli_logit: return std::log(mu / (1.0 - mu));
        case Family::bernoulli_cloglog: return std::log(-std::log1p(-mu));
    }
    return mu;
}

void validate_spec(const GlmSpec &spec)
{
    const auto n = spec.design.rows();
    const auto p = spec.design.cols();
    if (p == 0)
        throw ShapeError("fit_glm: design has no columns");
    if (spec.response.size() != n)
        throw ShapeError("fit_glm: response length does not match design rows");
    if (spec.weights.size() != 0 && spec.weights.size() != n)
        throw ShapeError("fit_glm: weight length does not match design rows");
    if (n < p)
        throw ShapeError("fit_glm: fewer observations (" + std::to_string(n) + ") than coefficients (" +
                         std::to_string(p) + ")");
    if (!spec.design.allFinite())
        throw DomainError("fit_glm: design matrix has non-finite entries");
    if (!spec.response.allFinite())
        throw DomainError("fit_glm: response has non-finite entries");
    if (spec.weights.size() != 0 && (!spec.weights.allFinite() || (spec.weights.array() < 0.0).any()))
        throw DomainError("fit_glm: weights must be finite and non-negative");
    if (is_bernoulli(spec.family))
        for (Eigen::Index k = 0; k < n; ++k)
            if (spec.response[k] != 0.0 && spec.response[k] != 1.0)
                throw DomainError("fit_glm: bernoulli response must be 0 or 1");
}

// Solves (X^T W X) θ = X^T W z with Jacobi equilibration. Also returns the
// inverse information used for V_θ.
struct WeightedSolve {
    Vector theta;
    Matrix inverse_information;
    bool ridge_applied = false;
};

WeightedSolve solve_weighted(const RowMatrix &X, const Vector &w, const Vector &z, double ridge)
{
    const auto &k = simd::kernels();
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const std::size_t p = static_cast<std::size_t>(X.cols());

    Matrix gram(p, p); // column-major; symmetric so the row-major kernel output is identical
    k.weighted_gram(X.data(), n, p, w.data(), gram.data());
    Vector rhs(p);
    k.weighted_xtv(X.data(), n, p, w.data(), z.data(), rhs.data());

    Vector scale(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double d = gram(j, j);
        if (!(d > 0.0) || !std::isfinite(d))
            throw RankDeficiencyError("fit_glm: design column " + std::to_string(j) +
                                      " carries no weighted information");
        scale[j] = 1.0 / std::sqrt(d);
    }
    Matrix scaled = scale.asDiagonal() * gram * scale.asDiagonal();

    WeightedSolve out;
    Eigen::LDLT<Matrix> ldlt(scaled);
    auto singular = [&] {
        if (ldlt.info() != Eigen::Success)
            return true;
        const Vector d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        return !(d.minCoeff() > 1e-13 * dmax);
    };
    if (singular()) {
        scaled.diagonal().array() += ridge;
        ldlt.compute(scaled);
        out.ridge_applied = true;
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
            throw RankDeficiencyError("fit_glm: information matrix singular after ridge jitter");
    }
    const Vector u = ldlt.solve(scale.cwiseProduct(rhs));
    out.theta = scale.cwiseProduct(u);
    Matrix inv = ldlt.solve(Matrix::Identity(p, p));
    out.inverse_information = scale.asDiagonal() * inv * scale.asDiagonal();
    out.inverse_information = 0.5 * (out.inverse_information + out.inverse_information.transpose()).eval();
    if (!out.theta.allFinite())
        throw RankDeficiencyError("fit_glm: non-finite solution");
    return out;
}

double bernoulli_deviance(const Vector &y, const Vector &mu, const Vector &w)
{
    double dev = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const double m = std::clamp(mu[k], kMuEps, 1.0 - kMuEps);
        const double ll = y[k] > 0.5 ? std::log(m) : std::log1p(-m);
        dev -= 2.0 * w[k] * ll;
    }
    return dev;
}

} // namespace

GlmFit fit_glm(const GlmSpec &spec, const GlmOptions &options)
{
    validate_spec(spec);
    const RowMatrix &X = spec.design;
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Vector w = spec.weights.size() ? spec.weights : Vector::Ones(n);
    const Vector &y = spec.response;
    const auto &k = simd::kernels();

    GlmFit fit;
    fit.family = spec.family;

    if (spec.family == Family::gaussian_identity) {
        WeightedSolve s = solve_weighted(X, w, y, options.ridge);
        Vector eta(n);
        k.gemv(X.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(p), s.theta.data(), eta.data());
        double rss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            rss += w[i] * (y[i] - eta[i]) * (y[i] - eta[i]);
        const Eigen::Index n_eff = (w.array() > 0.0).count();
        fit.coefficients = std::move(s.theta);
        fit.dispersion = n_eff > p ? rss / static_cast<double>(n_eff - p) : 0.0;
        fit.covariance = fit.dispersion * s.inverse_information;
        fit.deviance = rss;
        fit.converged = true;
        fit.iterations = 1;
        fit.ridge_applied = s.ridge_applied;
        return fit;
    }

    const Family fam = spec.family;
    Vector mu(n), eta(n), z(n), wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = (w[i] * y[i] + 0.5) / (w[i] + 1.0);
        eta[i] = link(fam, mu[i]);
    }
    double dev = bernoulli_deviance(y, mu, w);
    Vector theta = Vector::Zero(p);
    bool have_theta = false;
    bool ridge = false;

    auto refresh = [&](const Vector &th) {
        k.gemv(X.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(p), th.data(), eta.data());
        for (Eigen::Index i = 0; i < n; ++i)
            mu[i] = inverse_link(fam, eta[i]);
        return bernoulli_deviance(y, mu, w);
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = std::clamp(mu[i], kMuEps, 1.0 - kMuEps);
            const double d = std::max(inverse_link_derivative(fam, eta[i]), kMinMuEta);
            z[i] = eta[i] + (y[i] - m) / d;
            wt[i] = w[i] * d * d / (m * (1.0 - m));
        }
        WeightedSolve s = solve_weighted(X, wt, z, options.ridge);
        ridge = ridge || s.ridge_applied;
        Vector next = std::move(s.theta);
        double next_dev = refresh(next);

        // step halving on divergence
        for (int half = 0; have_theta && (!std::isfinite(next_dev) || next_dev > dev + 1e-12 * std::abs(dev)) &&
                           half < 30;
             ++half) {
            next = 0.5 * (next + theta);
            next_dev = refresh(next);
        }

        const double step = have_theta ? (next - theta).cwiseAbs().maxCoeff()
                                       : std::numeric_limits<double>::infinity();
        const double rel_dev = std::abs(next_dev - dev) / (std::abs(next_dev) + 0.1);
        theta = std::move(next);
        dev = next_dev;
        have_theta = true;
        fit.iterations = iter;
        if (step < options.step_tolerance || (iter > 1 && rel_dev < options.deviance_tolerance)) {
            fit.converged = true;
            break;
        }
    }

    if (!fit.converged)
        throw NonConvergenceError("fit_glm: IRLS did not converge in " + std::to_string(options.max_iterations) +
                                      " iterations",
                                  std::vector<double>(theta.data(), theta.data() + theta.size()));

    // information at the final estimate
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = std::clamp(mu[i], kMuEps, 1.0 - kMuEps);
        const double d = std::max(inverse_link_derivative(fam, eta[i]), kMinMuEta);
        wt[i] = w[i] * d * d / (m * (1.0 - m));
        if (mu[i] < 1e-8 || mu[i] > 1.0 - 1e-8)
            fit.separation_suspected = true;
    }
    WeightedSolve final_info = solve_weighted(X, wt, z, options.ridge);
    fit.coefficients = std::move(theta);
    fit.covariance = std::move(final_info.inverse_information);
    fit.dispersion = 1.0;
    fit.deviance = dev;
    fit.ridge_applied = ridge || final_info.ridge_applied;
    return fit;
}

double glm_linear_predictor(const GlmFit &fit, std::span<const double> row)
{
    if (row.size() != static_cast<std::size_t>(fit.coefficients.size()))
        throw ShapeError("glm_linear_predictor: row length does not match coefficients");
    return simd::kernels().dot(row.data(), fit.coefficients.data(), row.size());
}

double glm_mean(const GlmFit &fit, std::span<const double> row, Family family)
{
    return inverse_link(family, glm_linear_predictor(fit, row));
}

} // namespace adaptive_rd
