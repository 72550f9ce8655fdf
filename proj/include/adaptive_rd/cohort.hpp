#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "adaptive_rd/rng.hpp"

namespace adaptive_rd {

enum class Sex { male, female };
enum class Race { white, black, other };

std::string_view to_string(Sex sex);
std::string_view to_string(Race race);

struct PatientCovariates {
    double age = 55.0;         // years, [40, 79]
    Sex sex = Sex::female;
    Race race = Race::white;
    double systolic_bp = 120.0; // mmHg
    double total_chol = 213.0;  // mg/dL
    double hdl_chol = 50.0;     // mg/dL, below total_chol
    bool smoker = false;
    bool diabetes = false;
    bool bp_treated = false;

    friend bool operator==(const PatientCovariates &, const PatientCovariates &) = default;
};

inline constexpr double kMinAge = 40.0;
inline constexpr double kMaxAge = 79.0;

// Marginals of the synthetic cohort. Defaults describe a plausible adult
// primary-care population; every field can be overridden from config.
struct SyntheticCohortParams {
    double age_min = 40.0;
    double age_max = 79.0;

    double sbp_mean = 125.0, sbp_sd = 17.0, sbp_min = 85.0, sbp_max = 210.0;
    double tc_mean = 195.0, tc_sd = 38.0, tc_min = 110.0, tc_max = 350.0;
    // hdl ~ Normal(hdl_slope * total_chol, hdl_sd) on [hdl_min, total_chol - hdl_gap]
    double hdl_slope = 0.28, hdl_sd = 10.0, hdl_min = 20.0, hdl_gap = 30.0;

    double p_female = 0.52;
    std::array<double, 3> race_probs{0.62, 0.24, 0.14}; // white, black, other
    double p_smoker = 0.17;
    double p_diabetes = 0.14;
    double p_bp_treated = 0.25;

    std::uint64_t seed = 0;
};

// Throws ConfigError describing the first violated constraint.
void validate(const SyntheticCohortParams &params);

PatientCovariates sample_patient(const SyntheticCohortParams &params, const SeedStream &stream);

// Returns the patient unchanged, or throws ValidationError listing every violation.
const PatientCovariates &validate_covariates(const PatientCovariates &pc);

// Cohort CSV: header `age,sex,race,systolic_bp,total_chol,hdl_chol,smoker,diabetes,bp_treated`.
// Data rows are numbered from 1 in error messages.
std::vector<PatientCovariates> read_cohort_csv(std::istream &in);
std::vector<PatientCovariates> load_cohort_csv(const std::filesystem::path &path);
void write_cohort_csv(std::ostream &out, const std::vector<PatientCovariates> &patients);

inline constexpr std::string_view kCohortHeader =
    "age,sex,race,systolic_bp,total_chol,hdl_chol,smoker,diabetes,bp_treated";

} // namespace adaptive_rd
