#include "adaptive_rd/cohort.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "adaptive_rd/error.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

std::string_view to_string(Sex sex) { return sex == Sex::male ? "male" : "female"; }

std::string_view to_string(Race race)
{
    switch (race) {
        case Race::white: return "white";
        case Race::black: return "black";
        case Race::other: return "other";
    }
    return "other";
}

namespace {

void require(bool ok, const std::string &message)
{
    if (!ok)
        throw ConfigError("cohort params: " + message);
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

bool draw_flag(Engine &rng, double p) { return uniform01(rng) < p; }

} // namespace

void validate(const SyntheticCohortParams &p)
{
    require(std::isfinite(p.age_min) && std::isfinite(p.age_max) && p.age_min >= kMinAge &&
                p.age_max <= kMaxAge && p.age_min < p.age_max,
            "age bounds must lie in [40, 79] with age_min < age_max");
    require(p.sbp_sd > 0.0 && p.sbp_min > 0.0 && p.sbp_min < p.sbp_max, "systolic_bp distribution invalid");
    require(p.tc_sd > 0.0 && p.tc_min > 0.0 && p.tc_min < p.tc_max, "total_chol distribution invalid");
    require(p.hdl_sd > 0.0 && p.hdl_min > 0.0 && p.hdl_gap > 0.0 && std::isfinite(p.hdl_slope),
            "hdl_chol distribution invalid");
    require(p.tc_min - p.hdl_gap > p.hdl_min, "hdl truncation interval empty at tc_min");
    require(std::isfinite(p.sbp_mean) && std::isfinite(p.tc_mean), "means must be finite");
    require(is_probability(p.p_female), "p_female must be in [0,1]");
    require(is_probability(p.p_smoker), "p_smoker must be in [0,1]");
    require(is_probability(p.p_diabetes), "p_diabetes must be in [0,1]");
    require(is_probability(p.p_bp_treated), "p_bp_treated must be in [0,1]");
    double total = 0.0;
    for (double q : p.race_probs) {
        require(is_probability(q), "race probabilities must be in [0,1]");
        total += q;
    }
    require(std::abs(total - 1.0) < 1e-9, "race probabilities must sum to 1");
}

PatientCovariates sample_patient(const SyntheticCohortParams &params, const SeedStream &stream)
{
    validate(params);
    Engine rng = stream.engine();

    PatientCovariates pc;
    pc.age = params.age_min + (params.age_max - params.age_min) * uniform01(rng);
    pc.sex = draw_flag(rng, params.p_female) ? Sex::female : Sex::male;

    const double u = uniform01(rng);
    if (u < params.race_probs[0])
        pc.race = Race::white;
    else if (u < params.race_probs[0] + params.race_probs[1])
        pc.race = Race::black;
    else
        pc.race = Race::other;

    pc.systolic_bp = truncated_normal(rng, params.sbp_mean, params.sbp_sd, params.sbp_min, params.sbp_max);
    pc.total_chol = truncated_normal(rng, params.tc_mean, params.tc_sd, params.tc_min, params.tc_max);
    pc.hdl_chol = truncated_normal(rng, params.hdl_slope * pc.total_chol, params.hdl_sd, params.hdl_min,
                                   pc.total_chol - params.hdl_gap);
    pc.smoker = draw_flag(rng, params.p_smoker);
    pc.diabetes = draw_flag(rng, params.p_diabetes);
    pc.bp_treated = draw_flag(rng, params.p_bp_treated);
    return pc;
}

const PatientCovariates &validate_covariates(const PatientCovariates &pc)
{
    std::vector<std::string> problems;
    auto positive = [&](double v, const char *name) {
        if (!std::isfinite(v))
            problems.push_back(std::string(name) + " is non-finite");
        else if (v <= 0.0)
            problems.push_back(std::string(name) + " must be positive");
    };
    if (!std::isfinite(pc.age))
        problems.push_back("age is non-finite");
    else if (pc.age < kMinAge || pc.age > kMaxAge)
        problems.push_back("age out of range");
    positive(pc.systolic_bp, "systolic_bp");
    positive(pc.total_chol, "total_chol");
    positive(pc.hdl_chol, "hdl_chol");
    if (std::isfinite(pc.hdl_chol) && std::isfinite(pc.total_chol) && !(pc.hdl_chol < pc.total_chol))
        problems.push_back("hdl_chol must be below total_chol");
    if (!problems.empty())
        throw ValidationError(std::move(problems));
    return pc;
}

namespace {

constexpr std::string_view kColumns[] = {"age",        "sex",     "race",     "systolic_bp", "total_chol",
                                         "hdl_chol",   "smoker",  "diabetes", "bp_treated"};

[[noreturn]] void fail(std::size_t row, std::string_view field, const std::string &what)
{
    throw IngestionError(std::string(field) + ": " + what + ", row " + std::to_string(row), row,
                         std::string(field));
}

double number_field(std::string_view text, std::size_t row, std::string_view field)
{
    if (detail::trim(text).empty())
        fail(row, field, "missing value");
    auto v = detail::parse_double(text);
    if (!v)
        fail(row, field, "unparseable value '" + std::string(text) + "'");
    return *v;
}

bool flag_field(std::string_view text, std::size_t row, std::string_view field)
{
    text = detail::trim(text);
    if (text == "1")
        return true;
    if (text == "0")
        return false;
    if (text.empty())
        fail(row, field, "missing value");
    fail(row, field, "flag must be 0 or 1, got '" + std::string(text) + "'");
}

} // namespace

std::vector<PatientCovariates> read_cohort_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line))
        throw IngestionError("cohort csv: missing header", 0, "header");
    auto header = detail::split_csv_line(line);
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
        if (c >= header.size() || detail::trim(header[c]) != kColumns[c])
            throw IngestionError("cohort csv: missing column " + std::string(kColumns[c]), 0,
                                 std::string(kColumns[c]));
    }
    if (header.size() != std::size(kColumns))
        throw IngestionError("cohort csv: unexpected extra columns", 0, "header");

    std::vector<PatientCovariates> patients;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty())
            continue;
        ++row;
        auto f = detail::split_csv_line(line);
        if (f.size() != std::size(kColumns))
            fail(row, f.size() < std::size(kColumns) ? kColumns[f.size()] : "row",
                 "expected 9 fields, got " + std::to_string(f.size()));
        PatientCovariates pc;
        pc.age = number_field(f[0], row, "age");
        auto sex = detail::trim(f[1]);
        if (sex == "male")
            pc.sex = Sex::male;
        else if (sex == "female")
            pc.sex = Sex::female;
        else
            fail(row, "sex", sex.empty() ? "missing value" : "unknown value '" + std::string(sex) + "'");
        auto race = detail::trim(f[2]);
        if (race == "white")
            pc.race = Race::white;
        else if (race == "black")
            pc.race = Race::black;
        else if (race == "other")
            pc.race = Race::other;
        else
            fail(row, "race", race.empty() ? "missing value" : "unknown value '" + std::string(race) + "'");
        pc.systolic_bp = number_field(f[3], row, "systolic_bp");
        pc.total_chol = number_field(f[4], row, "total_chol");
        pc.hdl_chol = number_field(f[5], row, "hdl_chol");
        pc.smoker = flag_field(f[6], row, "smoker");
        pc.diabetes = flag_field(f[7], row, "diabetes");
        pc.bp_treated = flag_field(f[8], row, "bp_treated");
        try {
            validate_covariates(pc);
        } catch (const ValidationError &e) {
            const std::string &first = e.problems().front();
            fail(row, first.substr(0, first.find(' ')), first);
        }
        patients.push_back(pc);
    }
    return patients;
}

std::vector<PatientCovariates> load_cohort_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("cannot open cohort file " + path.string(), 0, "file");
    return read_cohort_csv(in);
}

void write_cohort_csv(std::ostream &out, const std::vector<PatientCovariates> &patients)
{
    out << kCohortHeader << '\n';
    for (const auto &pc : patients) {
        out << detail::format_double(pc.age) << ',' << to_string(pc.sex) << ',' << to_string(pc.race) << ','
            << detail::format_double(pc.systolic_bp) << ',' << detail::format_double(pc.total_chol) << ','
            << detail::format_double(pc.hdl_chol) << ',' << (pc.smoker ? 1 : 0) << ','
            << (pc.diabetes ? 1 : 0) << ',' << (pc.bp_treated ? 1 : 0) << '\n';
    }
}

} // namespace adaptive_rd
