#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "adaptive_rd/adaptation.hpp"
#include "adaptive_rd/error.hpp"
#include "adaptive_rd/glm.hpp"
#include "adaptive_rd/outcomes.hpp"
#include "adaptive_rd/stats.hpp"

using namespace adaptive_rd;

TEST_CASE("update schedule")
{
    UpdateSchedule s{400, 100};
    CHECK_FALSE(s.is_update_index(399, 3000));
    CHECK(s.is_update_index(400, 3000));
    CHECK_FALSE(s.is_update_index(450, 3000));
    CHECK(s.is_update_index(2900, 3000));
    CHECK_FALSE(s.is_update_index(3000, 3000));
    CHECK_THROWS_AS((UpdateSchedule{400, 0}.validate()), ConfigError);
}

TEST_CASE("rate targeting")
{
    std::vector<double> r(100);
    for (int i = 0; i < 100; ++i)
        r[i] = 0.01 * (i + 1);
    CHECK(threshold_for_rate(r, 0.3) == doctest::Approx(0.703).epsilon(1e-12));
    CHECK(threshold_for_rate(r, 0.5) == doctest::Approx(0.505).epsilon(1e-12));
    std::reverse(r.begin(), r.end());
    CHECK(threshold_for_rate(r, 0.3) == doctest::Approx(0.703).epsilon(1e-12));
    std::vector<double> flat(40, 0.17);
    CHECK(threshold_for_rate(flat, 0.2) == 0.17);
    CHECK(threshold_for_rate(flat, 0.9) == 0.17);
    std::vector<double> few(19, 0.1);
    CHECK_THROWS_AS(threshold_for_rate(few, 0.3), InsufficientDataError);
}

TEST_CASE("nnt and cohen's d")
{
    const double d = nnt_to_cohens_d(3.0);
    CHECK(d >= 0.60);
    CHECK(d <= 0.62);
    CHECK(std::abs(d - 0.61) <= 0.01);
    // oracle through the normal cdf rather than erf
    CHECK(1.0 / (2.0 * normal_cdf(d / std::sqrt(2.0)) - 1.0) == doctest::Approx(3.0).epsilon(1e-8));
    for (double nnt : {1.5, 2.0, 3.0, 10.0, 100.0, 1e4})
        CHECK(std::abs(cohens_d_to_nnt(nnt_to_cohens_d(nnt)) - nnt) / nnt < 1e-8);
    CHECK(nnt_to_cohens_d(1e6) < 1e-5);
    CHECK(nnt_to_cohens_d(1e4) < nnt_to_cohens_d(1e3));
    CHECK_THROWS_AS(nnt_to_cohens_d(1.0), DomainError);
}

TEST_CASE("cohen's d curves and pooled sd")
{
    std::vector<CurvePoint> zero{{0.1, 0.0}, {0.2, 0.0}};
    for (auto p : cohens_d_curve(zero, 3.0))
        CHECK(p.value == 0.0);
    std::vector<CurvePoint> c{{0.1, -5.0}, {0.2, -5.0}, {0.3, -5.0}};
    for (auto p : cohens_d_curve(c, 5.0))
        CHECK(p.value == 1.0);
    auto a = cohens_d_curve(c, 2.0), b = cohens_d_curve(c, 4.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(b[i].value == doctest::Approx(a[i].value / 2));

    std::vector<double> y{1, 3, 10, 14};
    std::vector<char> t{0, 0, 1, 1};
    // (2 + 8) / 2
    CHECK(pooled_sd(y, t) == doctest::Approx(std::sqrt(5.0)));
    std::vector<char> one{0, 0, 0, 1};
    CHECK_THROWS_AS(pooled_sd(y, one), InsufficientDataError);
}

TEST_CASE("nnt threshold search")
{
    const double target = nnt_to_cohens_d(3.0);
    std::vector<CurvePoint> d;
    for (int i = 0; i <= 60; ++i) {
        double r = 0.005 * i;
        d.push_back({r, target * r / 0.305});
    }
    d.push_back({0.305, target});
    CHECK(threshold_for_nnt(d, target, 0.1, 0.0) == 0.305);
    CHECK(threshold_for_nnt(d, target, 0.1, 1.0) == 0.1);

    std::vector<CurvePoint> at30{{0.1, 0.0}, {0.3, 1.0}, {0.5, 0.0}};
    CHECK(threshold_for_nnt(at30, 1.0, 0.10, 0.5) == doctest::Approx(0.20).epsilon(1e-15));
    // ties resolve to the smaller r
    std::vector<CurvePoint> tie{{0.4, 0.5}, {0.2, 0.5}};
    CHECK(threshold_for_nnt(tie, 0.5, 0.0, 0.0) == 0.2);
}

TEST_CASE("shrinkage")
{
    CHECK(shrinkage_weight(0, 5000) == 1.0);
    CHECK(shrinkage_weight(5000, 5000) == 0.5);
    std::vector<double> fresh{1.0, -2.0, 4.0}, orig{3.0, 0.0, 4.0};
    CHECK(shrink_coefficients(fresh, orig, 0, 5000) == orig);
    auto half = shrink_coefficients(fresh, orig, 5000, 5000);
    CHECK(half == std::vector<double>{2.0, -1.0, 4.0});
    auto lim = shrink_coefficients(fresh, orig, 1e9, 5000);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(lim[i] - fresh[i]) < 1e-4 * 2.0);
}

namespace {

struct Sim {
    std::vector<PatientCovariates> covariates;
    std::vector<double> baseline;
    std::vector<char> treated;
    std::vector<double> outcomes;
    UpdateData data() const { return {covariates, baseline, treated, outcomes}; }
};

Sim simulate(const AscvdParams &params, std::size_t n, std::uint64_t seed)
{
    Sim s;
    SyntheticCohortParams cp;
    OutcomeModel om(params);
    auto model = original_pce_model();
    for (std::size_t i = 0; i < n; ++i) {
        auto pc = sample_patient(cp, SeedStream(seed, 2 * i));
        double r = predict_risk(model, pc);
        bool a = r >= 0.1;
        s.covariates.push_back(pc);
        s.baseline.push_back(r);
        s.treated.push_back(a);
        s.outcomes.push_back(draw_outcome(om, r, a, SeedStream(seed, 2 * i + 1)));
    }
    return s;
}

} // namespace

TEST_CASE("recalibration")
{
    auto orig = original_pce_model();
    Sim none;
    CHECK_THROWS_AS(recalibrate_model(none.data(), orig, 5000, 1), InsufficientDataError);

    // well-calibrated data with no treatment effect: the unshrunk map is the
    // plain cloglog fit and sits within sampling error of the identity
    auto s = simulate(AscvdParams{0.0, 1.0, 0.0}, 5000, 21);
    auto fresh = recalibrate_model(s.data(), orig, 1e-9, 1);
    const auto &cal = std::get<PceStratified>(fresh.kind).calibration;
    CHECK(fresh.version_id == 1);
    CHECK(fresh.provenance == Provenance::recalibrated);

    GlmSpec spec;
    spec.family = Family::bernoulli_cloglog;
    spec.design.resize(5000, 3);
    spec.response.resize(5000);
    for (int k = 0; k < 5000; ++k) {
        spec.design(k, 0) = 1.0;
        spec.design(k, 1) = cloglog(s.baseline[k]);
        spec.design(k, 2) = s.treated[k];
        spec.response(k) = s.outcomes[k];
    }
    auto ref = fit_glm(spec);
    CHECK(cal.intercept == doctest::Approx(ref.coefficients(0)).epsilon(1e-6));
    CHECK(cal.slope == doctest::Approx(ref.coefficients(1)).epsilon(1e-6));
    CHECK(std::abs(cal.slope - 1.0) < 0.1);
    CHECK(std::abs(cal.intercept) < 3 * std::sqrt(ref.covariance(0, 0)));
    CHECK(std::abs(cal.slope - 1.0) < 3 * std::sqrt(ref.covariance(1, 1)));

    auto mis = simulate(AscvdParams{0.1, 0.9, 0.4}, 5000, 22);
    auto m = recalibrate_model(mis.data(), orig, 1e-9, 1);
    CHECK(std::get<PceStratified>(m.kind).calibration.slope < 1.0);

    // at n = n0 the map sits halfway between the fresh fit and the identity
    auto half = recalibrate_model(mis.data(), orig, 5000, 2);
    const auto &hc = std::get<PceStratified>(half.kind).calibration;
    const auto &fc = std::get<PceStratified>(m.kind).calibration;
    CHECK(hc.slope == doctest::Approx(0.5 * (1.0 + fc.slope)).epsilon(1e-6));
    CHECK(hc.intercept == doctest::Approx(0.5 * fc.intercept).epsilon(1e-6));
}

TEST_CASE("revision")
{
    auto orig = original_pce_model();
    Sim none;
    CHECK_THROWS_AS(revise_model(none.data(), orig, 5000, 1), InsufficientDataError);

    auto s = simulate(AscvdParams{0.1, 0.9, 0.4}, 3000, 31);
    auto rev = revise_model(s.data(), orig, 5000, 1);
    CHECK(rev.provenance == Provenance::revised);
    for (const auto &pc : s.covariates) {
        double r = predict_risk(rev, pc);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
    for (auto race : {Race::white, Race::black, Race::other}) {
        auto a = s.covariates[0], b = s.covariates[0];
        b.race = race;
        CHECK(predict_risk(rev, a) == predict_risk(rev, b));
        b.sex = a.sex == Sex::male ? Sex::female : Sex::male;
        CHECK(predict_risk(rev, a) == predict_risk(rev, b));
    }
}
