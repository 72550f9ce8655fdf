#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "adaptive_rd/cohort.hpp"

namespace adaptive_rd {

// Transformed covariates entering the Pooled Cohort Equations. A subgroup's
// coefficient is zero for terms its published equation does not use.
enum class PceTerm : std::size_t {
    ln_age,
    ln_age_sq,
    ln_tc,
    ln_age_x_ln_tc,
    ln_hdl,
    ln_age_x_ln_hdl,
    ln_treated_sbp,
    ln_age_x_ln_treated_sbp,
    ln_untreated_sbp,
    ln_age_x_ln_untreated_sbp,
    smoker,
    ln_age_x_smoker,
    diabetes,
};
inline constexpr std::size_t kPceTermCount = 13;
using PceTermVector = std::array<double, kPceTermCount>;

std::string_view term_name(PceTerm term);
PceTermVector pce_terms(const PatientCovariates &pc);

enum class PceSubgroup : std::size_t { white_female, black_female, white_male, black_male };
inline constexpr std::size_t kPceSubgroupCount = 4;

std::string_view subgroup_name(PceSubgroup group);
// race=other uses the white equation of the same sex.
PceSubgroup resolve_subgroup(const PatientCovariates &pc);

struct PceSubgroupCoefficients {
    PceTermVector coef{};
    double s0 = 0.9;     // baseline 10-year survival
    double lp_bar = 0.0; // mean linear predictor
};

struct PceCoefficientSet {
    std::array<PceSubgroupCoefficients, kPceSubgroupCount> groups{};

    const PceSubgroupCoefficients &operator[](PceSubgroup g) const { return groups[static_cast<std::size_t>(g)]; }
    PceSubgroupCoefficients &operator[](PceSubgroup g) { return groups[static_cast<std::size_t>(g)]; }
};

void validate(const PceCoefficientSet &coeffs);

// 2013 ACC/AHA guideline table, transcribed.
const PceCoefficientSet &published_pce_coefficients();
// FNV-1a over the IEEE bit patterns in table order; pins the embedded table.
std::uint64_t checksum(const PceCoefficientSet &coeffs);
std::uint64_t published_pce_checksum();

// JSON object keyed by subgroup name; each entry maps term names to
// coefficients plus "s0" and "lp_bar". Terms not listed are zero.
PceCoefficientSet parse_pce_coefficients(const std::string &json_text);
PceCoefficientSet load_pce_coefficients(const std::filesystem::path &path);
std::string to_json(const PceCoefficientSet &coeffs);

double pce_linear_predictor(const PatientCovariates &pc, const PceCoefficientSet &coeffs);

inline constexpr double kRiskFloor = 1e-12;
inline constexpr double kRiskCeil = 1.0 - 1e-12;

double clamp_risk(double risk);
// 1 - s0^exp(lp - lp_bar), clamped to [1e-12, 1 - 1e-12]. Throws NumericError for non-finite lp.
double pce_risk(double lp, double s0, double lp_bar);
// log(-log(1 - risk)) of the clamped risk.
double cloglog(double risk);
double inverse_cloglog(double eta);

} // namespace adaptive_rd
