#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "adaptive_rd/cohort.hpp"
#include "adaptive_rd/error.hpp"

using namespace adaptive_rd;

TEST_CASE("sampler respects degenerate categoricals")
{
    SyntheticCohortParams p;
    p.p_female = 1.0;
    p.p_smoker = 0.0;
    p.race_probs = {0.0, 1.0, 0.0};
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto pc = sample_patient(p, SeedStream(3, i));
        CHECK(pc.sex == Sex::female);
        CHECK(pc.race == Race::black);
        CHECK_FALSE(pc.smoker);
    }
}

TEST_CASE("sampler is a pure function of (params, stream)")
{
    SyntheticCohortParams p;
    for (std::uint64_t i = 0; i < 50; ++i)
        CHECK(sample_patient(p, SeedStream(17, i)) == sample_patient(p, SeedStream(17, i)));
    CHECK_FALSE(sample_patient(p, SeedStream(17, 0)) == sample_patient(p, SeedStream(17, 1)));
}

TEST_CASE("uniform age: sample mean within three standard errors of 59.5")
{
    SyntheticCohortParams p;
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        auto pc = sample_patient(p, SeedStream(2024, static_cast<std::uint64_t>(i)));
        CHECK(pc.age >= kMinAge);
        CHECK(pc.age <= kMaxAge);
        sum += pc.age;
    }
    double mean = sum / n;
    double se = (79.0 - 40.0) / std::sqrt(12.0) / std::sqrt(double(n));
    CHECK(std::abs(mean - 59.5) < 3 * se);
    CHECK(mean >= 58.5);
    CHECK(mean <= 60.5);
}

TEST_CASE("sampled patients satisfy the covariate invariants")
{
    SyntheticCohortParams p;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        auto pc = sample_patient(p, SeedStream(9, i));
        CHECK_NOTHROW(validate_covariates(pc));
        CHECK(pc.hdl_chol < pc.total_chol);
    }
}

TEST_CASE("invalid sampler params are rejected")
{
    SyntheticCohortParams p;
    p.p_female = 1.5;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.race_probs = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.sbp_sd = -1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("validate_covariates")
{
    PatientCovariates pc;
    CHECK(&validate_covariates(pc) == &pc);

    pc.hdl_chol = 250;
    pc.total_chol = 200;
    try {
        validate_covariates(pc);
        FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
        REQUIRE(e.problems().size() == 1);
        CHECK(e.problems()[0].find("hdl") != std::string::npos);
    }

    pc = {};
    pc.systolic_bp = std::numeric_limits<double>::quiet_NaN();
    try {
        validate_covariates(pc);
        FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
        CHECK(e.problems()[0].find("non-finite") != std::string::npos);
    }

    pc = {};
    pc.age = 30;
    pc.systolic_bp = -1;
    try {
        validate_covariates(pc);
        FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
        CHECK(e.problems().size() == 2);
    }
}

TEST_CASE("cohort csv reading")
{
    std::string header(kCohortHeader);
    {
        std::istringstream in(header + "\n55,female,white,120,213,50,0,0,0\n");
        auto rows = read_cohort_csv(in);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0] == PatientCovariates{});
    }
    {
        std::istringstream in(header + "\n30,female,white,120,213,50,0,0,0\n");
        try {
            read_cohort_csv(in);
            FAIL("expected IngestionError");
        } catch (const IngestionError &e) {
            CHECK(std::string(e.what()).find("age out of range, row 1") != std::string::npos);
            CHECK(e.row() == 1);
            CHECK(e.field() == "age");
        }
    }
    {
        std::istringstream in(header + "\n55,female,white,120,213,50,0,0,0\n55,female,martian,120,213,50,0,0,0\n");
        try {
            read_cohort_csv(in);
            FAIL("expected IngestionError");
        } catch (const IngestionError &e) {
            CHECK(e.row() == 2);
            CHECK(e.field() == "race");
        }
    }
    {
        std::istringstream in(header + "\n55,female,white,120,213,50,2,0,0\n");
        CHECK_THROWS_AS(read_cohort_csv(in), IngestionError);
    }
    {
        std::istringstream in(header + "\n");
        CHECK(read_cohort_csv(in).empty());
    }
    {
        std::istringstream in("age,sex\n");
        CHECK_THROWS_AS(read_cohort_csv(in), IngestionError);
    }
}

TEST_CASE("cohort csv round trip is bitwise")
{
    SyntheticCohortParams p;
    std::vector<PatientCovariates> patients;
    for (std::uint64_t i = 0; i < 100; ++i)
        patients.push_back(sample_patient(p, SeedStream(77, i)));
    std::ostringstream out;
    write_cohort_csv(out, patients);
    std::istringstream in(out.str());
    auto back = read_cohort_csv(in);
    REQUIRE(back.size() == patients.size());
    for (std::size_t i = 0; i < patients.size(); ++i)
        CHECK(back[i] == patients[i]);
}
