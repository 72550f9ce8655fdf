#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "adaptive_rd/comparators.hpp"
#include "adaptive_rd/error.hpp"
#include "adaptive_rd/risk_model.hpp"
#include "oracles.hpp"

using namespace adaptive_rd;

namespace {

struct Data {
    std::vector<PatientCovariates> cov;
    std::vector<char> a;
    std::vector<double> y;
    std::vector<double> focal;
    ComparatorData view() const { return {cov, a, y, focal}; }
};

std::vector<double> predictors(const PatientCovariates &pc)
{
    return {pc.age, pc.total_chol, pc.hdl_chol, pc.systolic_bp, double(pc.bp_treated), double(pc.smoker),
            double(pc.diabetes)};
}

// Covariates from the synthetic cohort; arm and outcome from the callbacks.
template <typename Assign, typename Outcome>
Data make(std::size_t n, std::uint64_t seed, Assign assign, Outcome outcome)
{
    Data d;
    SyntheticCohortParams p;
    auto model = original_pce_model();
    auto rng = SeedStream(seed, 99).engine();
    for (std::size_t i = 0; i < n; ++i) {
        auto pc = sample_patient(p, SeedStream(seed, i));
        double r = predict_risk(model, pc);
        bool a = assign(r, rng);
        d.cov.push_back(pc);
        d.a.push_back(a);
        d.focal.push_back(r - 0.1);
        d.y.push_back(outcome(pc, r, a, rng));
    }
    return d;
}

double kernel_avg(const std::vector<double> &focal, double r, double h, const std::vector<double> &v)
{
    double num = 0, den = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        double u = (focal[k] - r) / h, w = std::exp(-0.5 * u * u);
        num += w * v[k];
        den += w;
    }
    return num / den;
}

auto threshold_rule = [](double r, std::mt19937_64 &) { return r >= 0.1; };

} // namespace

TEST_CASE("naive difference")
{
    std::vector<double> y{2, 2, 2, 2};
    std::vector<char> a{0, 1, 0, 1};
    CHECK(naive_diff(y, a) == 0.0);
    std::vector<double> y2{1, 1, 0, 0};
    std::vector<char> a2{1, 1, 0, 0};
    CHECK(naive_diff(y2, a2) == 1.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::vector<double> v(501);
    std::vector<char> t(501);
    double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
    for (int i = 0; i < 501; ++i) {
        v[i] = z(rng);
        t[i] = i % 3 == 0;
        (t[i] ? s1 : s0) += v[i];
        (t[i] ? n1 : n0) += 1;
    }
    CHECK(std::abs(naive_diff(v, t) - (s1 / n1 - s0 / n0)) < 1e-12);
    std::vector<char> none(501, 0);
    CHECK_THROWS_AS(naive_diff(v, none), InsufficientDataError);
}

TEST_CASE("outcome regression recovers additive effects exactly")
{
    ComparatorOptions opt;
    auto lin = [](const PatientCovariates &pc, double, bool a, std::mt19937_64 &) {
        return 0.5 + 0.01 * pc.age - 0.02 * pc.hdl_chol + 0.3 * pc.smoker + (a ? 0.0 : 0.0);
    };
    auto d0 = make(400, 1, threshold_rule, lin);
    CHECK(std::abs(outcome_regression_ate(d0.view(), 0.0, opt)) < 1e-8);

    auto shifted = [&](const PatientCovariates &pc, double r, bool a, std::mt19937_64 &g) {
        return lin(pc, r, a, g) + (a ? -1.25 : 0.0);
    };
    auto d1 = make(400, 2, threshold_rule, shifted);
    CHECK(outcome_regression_ate(d1.view(), 0.0, opt) == doctest::Approx(-1.25).epsilon(1e-9));
    CHECK(outcome_regression_ate(d1.view(), 0.05, opt) == doctest::Approx(-1.25).epsilon(1e-9));
}

TEST_CASE("comparators match independently coded fits on a small instance")
{
    auto coin = [](double r, std::mt19937_64 &g) {
        return std::uniform_real_distribution<double>(0, 1)(g) < 0.2 + 2 * r;
    };
    auto bin = [](const PatientCovariates &, double r, bool a, std::mt19937_64 &g) {
        return std::uniform_real_distribution<double>(0, 1)(g) < 0.2 + r + (a ? 0.2 : 0.0) ? 1.0 : 0.0;
    };
    auto d = make(50, 7, coin, bin);
    const std::size_t n = d.y.size();
    const double r = 0.01, h = 0.05;

    for (auto fam : {Family::gaussian_identity, Family::bernoulli_logit}) {
        ComparatorOptions opt;
        opt.family = fam;
        opt.bandwidth = h;
        auto link = fam == Family::gaussian_identity ? oracle::Link::identity : oracle::Link::logit;

        Eigen::MatrixXd X(n, 9), Z(n, 8);
        Eigen::VectorXd Y(n), A(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto pr = predictors(d.cov[k]);
            X(k, 0) = 1;
            X(k, 1) = d.a[k];
            Z(k, 0) = 1;
            for (int j = 0; j < 7; ++j) {
                X(k, 2 + j) = pr[j];
                Z(k, 1 + j) = pr[j];
            }
            Y(k) = d.y[k];
            A(k) = d.a[k];
        }
        Eigen::VectorXd b = oracle::fit(link, X, Y);
        Eigen::VectorXd g = oracle::fit(oracle::Link::logit, Z, A);
        std::vector<double> eff(n), ipw(n), aipw(n);
        for (std::size_t k = 0; k < n; ++k) {
            Eigen::RowVectorXd x = X.row(k);
            x(1) = 0;
            double m0 = oracle::inv_link(link, x.dot(b));
            x(1) = 1;
            double m1 = oracle::inv_link(link, x.dot(b));
            double e = std::clamp(oracle::inv_link(oracle::Link::logit, Z.row(k).dot(g)), 0.01, 0.99);
            double a = d.a[k], y = d.y[k];
            eff[k] = m1 - m0;
            ipw[k] = y * (a / e - (1 - a) / (1 - e));
            aipw[k] = m1 - m0 + a * (y - m1) / e - (1 - a) * (y - m0) / (1 - e);
        }
        CHECK(std::abs(outcome_regression_ate(d.view(), r, opt) - kernel_avg(d.focal, r, h, eff)) < 1e-8);
        CHECK(std::abs(ipw_ate(d.view(), r, opt) - kernel_avg(d.focal, r, h, ipw)) < 1e-8);
        CHECK(std::abs(aipw_ate(d.view(), r, opt) - kernel_avg(d.focal, r, h, aipw)) < 1e-8);
    }
}

TEST_CASE("propensities are clipped")
{
    auto d = make(300, 4, threshold_rule, [](const PatientCovariates &, double, bool, std::mt19937_64 &) {
        return 0.0;
    });
    ComparatorOptions opt;
    opt.propensity_floor = 0.2;
    opt.propensity_ceiling = 0.7;
    for (double e : fitted_propensities(d.view(), opt)) {
        CHECK(e >= 0.2);
        CHECK(e <= 0.7);
    }
}

TEST_CASE("randomized null: ipw near zero on average")
{
    ComparatorOptions opt;
    auto coin = [](double, std::mt19937_64 &g) { return std::uniform_real_distribution<double>(0, 1)(g) < 0.5; };
    auto noise = [](const PatientCovariates &pc, double, bool, std::mt19937_64 &g) {
        return 0.01 * pc.age + std::normal_distribution<double>(0, 1)(g);
    };
    double total = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto d = make(3000, 100 + s, coin, noise);
        total += ipw_ate(d.view(), 0.0, opt);
    }
    CHECK(std::abs(total / 10) < 0.05);
}

TEST_CASE("correct outcome model: aipw stays close to outcome regression")
{
    ComparatorOptions opt;
    auto coin = [](double r, std::mt19937_64 &g) {
        return std::uniform_real_distribution<double>(0, 1)(g) < std::min(0.9, 0.2 + 2 * r);
    };
    auto lin = [](const PatientCovariates &pc, double, bool a, std::mt19937_64 &g) {
        return 1.0 + 0.02 * pc.age - 0.01 * pc.total_chol + (a ? -2.0 : 0.0) + std::normal_distribution<double>(0, 1)(g);
    };
    auto d = make(3000, 55, coin, lin);
    CHECK(std::abs(aipw_ate(d.view(), 0.0, opt) - outcome_regression_ate(d.view(), 0.0, opt)) < 0.05);
}
