#include <doctest.h>

#include <cmath>
#include <vector>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/outcomes.hpp"

using namespace adaptive_rd;

TEST_CASE("attendance")
{
    AttendanceParams p;
    CHECK(attendance_prob(0.25, true, p) - attendance_prob(0.25, false, p) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(attendance_prob(0.3, false, p) == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(attendance_prob(1.0, true, p) == doctest::Approx(0.10).epsilon(1e-15));
    // the effect peaks at 0.25
    OutcomeModel m(p);
    for (double r = 0.0; r <= 1.0; r += 0.01)
        CHECK(true_local_ate(m, r) <= true_local_ate(m, 0.25) + 1e-15);
    CHECK(m.kind() == OutcomeKind::binary);
    CHECK_FALSE(m.clamps_on_grid());
}

TEST_CASE("attendance clamping is flagged and counted")
{
    AttendanceParams p{0.9, 2.0};
    OutcomeModel m(p);
    CHECK(m.clamps_on_grid());
    ClampCounter c;
    CHECK(m.mean(0.5, true, &c) == 1.0);
    CHECK(c.events == 1);
    CHECK(m.mean(0.1, false, &c) == doctest::Approx(0.09));
    CHECK(c.events == 1);
}

TEST_CASE("cholesterol")
{
    CholesterolParams p;
    CHECK(cholesterol_mean(0.5, true, p) - cholesterol_mean(0.5, false, p) == -5.0);
    for (double r : {0.0, 0.2, 0.9})
        CHECK(cholesterol_mean(r, false, p) == 2.0);
    OutcomeModel m(p);
    CHECK(std::abs(true_local_ate(m, 0.5)) / m.sigma() == 1.0);
    CHECK(true_local_ate(m, 0.0) == 0.0);
    CHECK(m.kind() == OutcomeKind::continuous);
    CHECK_THROWS_AS(OutcomeModel(CholesterolParams{2, -10, 0}), ConfigError);
}

TEST_CASE("ascvd")
{
    AscvdParams id{0.0, 1.0, 0.0};
    for (int i = 1; i <= 1000; ++i) {
        double r = i / 1001.0;
        CHECK(std::abs(ascvd_prob(r, false, id) - r) < 1e-12);
        CHECK(std::abs(ascvd_prob(r, true, id) - r) < 1e-12);
    }
    AscvdParams p;
    for (double r = 0.01; r < 1.0; r += 0.05)
        CHECK(ascvd_prob(r, true, p) > ascvd_prob(r, false, p));

    // 0.1 + 0.9 log(-log 0.8), then the inverse link
    const double eta = 0.1 + 0.9 * std::log(-std::log(0.8));
    CHECK(eta == doctest::Approx(-1.2499459).epsilon(1e-6));
    CHECK(ascvd_prob(0.2, false, p) == doctest::Approx(1.0 - std::exp(-std::exp(eta))).epsilon(1e-14));
    CHECK(ascvd_prob(0.2, false, p) == doctest::Approx(0.24912814326087362).epsilon(1e-12));

    OutcomeModel none(AscvdParams{0.1, 0.9, 0.0});
    for (double r = 0.01; r < 1.0; r += 0.1)
        CHECK(true_local_ate(none, r) == 0.0);
}

TEST_CASE("outcome draws")
{
    OutcomeModel zero(AttendanceParams{0.0, 0.0});
    OutcomeModel one(AttendanceParams{1.0, 0.0});
    for (std::uint64_t i = 0; i < 200; ++i) {
        CHECK(draw_outcome(zero, 0.3, false, SeedStream(1, i)) == 0.0);
        CHECK(draw_outcome(one, 1.0, false, SeedStream(1, i)) == 1.0);
    }
    OutcomeModel att(AttendanceParams{1.0, 0.0});
    double hits = 0;
    for (std::uint64_t i = 0; i < 10000; ++i)
        hits += draw_outcome(att, 0.3, false, SeedStream(2, i));
    CHECK(std::abs(hits / 10000 - 0.3) < 3 * std::sqrt(0.21 / 10000));

    OutcomeModel chol(CholesterolParams{});
    double s = 0, ss = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        double y = draw_outcome(chol, 0.5, true, SeedStream(3, i));
        s += y;
        ss += y * y;
    }
    double mean = s / 10000, sd = std::sqrt(ss / 10000 - mean * mean);
    CHECK(std::abs(mean + 3.0) < 3 * 5.0 / 100);
    CHECK(std::abs(sd - 5.0) < 0.2);
    CHECK(draw_outcome(chol, 0.5, true, SeedStream(3, 7)) == draw_outcome(chol, 0.5, true, SeedStream(3, 7)));
}

TEST_CASE("smoothed truth")
{
    OutcomeModel chol(CholesterolParams{2.0, 0.0, 5.0});
    std::vector<double> base{0.1, 0.2, 0.3}, w{-0.01, 0.0, 0.02};
    CHECK(true_smoothed_ate(chol, base, w, 0.0, 0.02) == 0.0);

    OutcomeModel att(AttendanceParams{});
    std::vector<double> one{0.17}, one_w{0.0};
    CHECK(true_smoothed_ate(att, one, one_w, 0.0, 0.02) == doctest::Approx(true_local_ate(att, 0.17)).epsilon(1e-15));

    // linear effect, symmetric cloud around r: the average is the effect at r
    OutcomeModel lin(CholesterolParams{});
    std::vector<double> b, v;
    for (int i = -50; i <= 50; ++i) {
        b.push_back(0.3 + 0.002 * i);
        v.push_back(0.002 * i);
    }
    CHECK(std::abs(true_smoothed_ate(lin, b, v, 0.0, 0.02) - true_local_ate(lin, 0.3)) < 1e-3);
    CHECK(true_smoothed_mean(lin, b, v, 0.0, 0.02, true) - true_smoothed_mean(lin, b, v, 0.0, 0.02, false) ==
          doctest::Approx(true_smoothed_ate(lin, b, v, 0.0, 0.02)));
}
