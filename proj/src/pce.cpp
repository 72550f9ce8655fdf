#include "adaptive_rd/pce.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adaptive_rd/error.hpp"

namespace adaptive_rd {

namespace {

constexpr std::string_view kTermNames[kPceTermCount] = {
    "ln_age",           "ln_age_sq",       "ln_tc",
    "ln_age_x_ln_tc",   "ln_hdl",          "ln_age_x_ln_hdl",
    "ln_treated_sbp",   "ln_age_x_ln_treated_sbp",
    "ln_untreated_sbp", "ln_age_x_ln_untreated_sbp",
    "smoker",           "ln_age_x_smoker", "diabetes",
};

constexpr std::string_view kSubgroupNames[kPceSubgroupCount] = {"white_female", "black_female", "white_male",
                                                                "black_male"};

// Frozen checksum of the transcribed guideline table.
constexpr std::uint64_t kPublishedChecksum = 0xec588b1599658e63ULL;

PceCoefficientSet make_published()
{
    using T = PceTerm;
    PceCoefficientSet set;
    auto put = [](PceSubgroupCoefficients &g, T term, double value) { g.coef[static_cast<std::size_t>(term)] = value; };

    auto &wf = set[PceSubgroup::white_female];
    put(wf, T::ln_age, -29.799);
    put(wf, T::ln_age_sq, 4.884);
    put(wf, T::ln_tc, 13.540);
    put(wf, T::ln_age_x_ln_tc, -3.114);
    put(wf, T::ln_hdl, -13.578);
    put(wf, T::ln_age_x_ln_hdl, 3.149);
    put(wf, T::ln_treated_sbp, 2.019);
    put(wf, T::ln_untreated_sbp, 1.957);
    put(wf, T::smoker, 7.574);
    put(wf, T::ln_age_x_smoker, -1.665);
    put(wf, T::diabetes, 0.661);
    wf.s0 = 0.9665;
    wf.lp_bar = -29.18;

    auto &bf = set[PceSubgroup::black_female];
    put(bf, T::ln_age, 17.114);
    put(bf, T::ln_tc, 0.940);
    put(bf, T::ln_hdl, -18.920);
    put(bf, T::ln_age_x_ln_hdl, 4.475);
    put(bf, T::ln_treated_sbp, 29.291);
    put(bf, T::ln_age_x_ln_treated_sbp, -6.432);
    put(bf, T::ln_untreated_sbp, 27.820);
    put(bf, T::ln_age_x_ln_untreated_sbp, -6.087);
    put(bf, T::smoker, 0.691);
    put(bf, T::diabetes, 0.874);
    bf.s0 = 0.9533;
    bf.lp_bar = 86.61;

    auto &wm = set[PceSubgroup::white_male];
    put(wm, T::ln_age, 12.344);
    put(wm, T::ln_tc, 11.853);
    put(wm, T::ln_age_x_ln_tc, -2.664);
    put(wm, T::ln_hdl, -7.990);
    put(wm, T::ln_age_x_ln_hdl, 1.769);
    put(wm, T::ln_treated_sbp, 1.797);
    put(wm, T::ln_untreated_sbp, 1.764);
    put(wm, T::smoker, 7.837);
    put(wm, T::ln_age_x_smoker, -1.795);
    put(wm, T::diabetes, 0.658);
    wm.s0 = 0.9144;
    wm.lp_bar = 61.18;

    auto &bm = set[PceSubgroup::black_male];
    put(bm, T::ln_age, 2.469);
    put(bm, T::ln_tc, 0.302);
    put(bm, T::ln_hdl, -0.307);
    put(bm, T::ln_treated_sbp, 1.916);
    put(bm, T::ln_untreated_sbp, 1.809);
    put(bm, T::smoker, 0.549);
    put(bm, T::diabetes, 0.645);
    bm.s0 = 0.8954;
    bm.lp_bar = 19.54;

    return set;
}

} // namespace

std::string_view term_name(PceTerm term) { return kTermNames[static_cast<std::size_t>(term)]; }
std::string_view subgroup_name(PceSubgroup group) { return kSubgroupNames[static_cast<std::size_t>(group)]; }

PceTermVector pce_terms(const PatientCovariates &pc)
{
    const double la = std::log(pc.age);
    const double ltc = std::log(pc.total_chol);
    const double lhdl = std::log(pc.hdl_chol);
    const double lsbp = std::log(pc.systolic_bp);
    const double smk = pc.smoker ? 1.0 : 0.0;
    const double trt = pc.bp_treated ? 1.0 : 0.0;

    PceTermVector t{};
    t[0] = la;
    t[1] = la * la;
    t[2] = ltc;
    t[3] = la * ltc;
    t[4] = lhdl;
    t[5] = la * lhdl;
    t[6] = trt * lsbp;
    t[7] = trt * la * lsbp;
    t[8] = (1.0 - trt) * lsbp;
    t[9] = (1.0 - trt) * la * lsbp;
    t[10] = smk;
    t[11] = la * smk;
    t[12] = pc.diabetes ? 1.0 : 0.0;
    return t;
}

PceSubgroup resolve_subgroup(const PatientCovariates &pc)
{
    const bool black = pc.race == Race::black;
    if (pc.sex == Sex::female)
        return black ? PceSubgroup::black_female : PceSubgroup::white_female;
    return black ? PceSubgroup::black_male : PceSubgroup::white_male;
}

void validate(const PceCoefficientSet &coeffs)
{
    for (std::size_t g = 0; g < kPceSubgroupCount; ++g) {
        const auto &grp = coeffs.groups[g];
        const std::string name(kSubgroupNames[g]);
        if (!(grp.s0 > 0.0 && grp.s0 < 1.0))
            throw ConfigError("pce coefficients: s0 for " + name + " must lie in (0,1)");
        if (!std::isfinite(grp.lp_bar))
            throw ConfigError("pce coefficients: lp_bar for " + name + " must be finite");
        for (std::size_t t = 0; t < kPceTermCount; ++t)
            if (!std::isfinite(grp.coef[t]))
                throw ConfigError("pce coefficients: " + name + "." + std::string(kTermNames[t]) +
                                  " must be finite");
    }
}

std::uint64_t checksum(const PceCoefficientSet &coeffs)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto &g : coeffs.groups) {
        for (double c : g.coef)
            mix(c);
        mix(g.s0);
        mix(g.lp_bar);
    }
    return h;
}

std::uint64_t published_pce_checksum() { return kPublishedChecksum; }

const PceCoefficientSet &published_pce_coefficients()
{
    static const PceCoefficientSet table = [] {
        PceCoefficientSet set = make_published();
        validate(set);
        if (checksum(set) != kPublishedChecksum)
            throw NumericError("embedded PCE coefficient table failed its checksum");
        return set;
    }();
    return table;
}

PceCoefficientSet parse_pce_coefficients(const std::string &json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("pce coefficients: invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("pce coefficients: top level must be an object keyed by subgroup");

    PceCoefficientSet set;
    for (const auto &[key, value] : doc.items()) {
        std::size_t g = 0;
        while (g < kPceSubgroupCount && kSubgroupNames[g] != key)
            ++g;
        if (g == kPceSubgroupCount)
            throw ConfigError("pce coefficients: unknown subgroup '" + key + "'");
    }
    for (std::size_t g = 0; g < kPceSubgroupCount; ++g) {
        const std::string name(kSubgroupNames[g]);
        if (!doc.contains(name))
            throw ConfigError("pce coefficients: missing subgroup '" + name + "'");
        const auto &obj = doc.at(name);
        if (!obj.is_object())
            throw ConfigError("pce coefficients: '" + name + "' must be an object");
        auto &grp = set.groups[g];
        bool have_s0 = false, have_lp = false;
        for (const auto &[key, value] : obj.items()) {
            if (!value.is_number())
                throw ConfigError("pce coefficients: " + name + "." + key + " must be a number");
            const double v = value.get<double>();
            if (key == "s0") {
                grp.s0 = v;
                have_s0 = true;
                continue;
            }
            if (key == "lp_bar") {
                grp.lp_bar = v;
                have_lp = true;
                continue;
            }
            std::size_t t = 0;
            while (t < kPceTermCount && kTermNames[t] != key)
                ++t;
            if (t == kPceTermCount)
                throw ConfigError("pce coefficients: unknown term '" + key + "' in " + name);
            grp.coef[t] = v;
        }
        if (!have_s0 || !have_lp)
            throw ConfigError("pce coefficients: " + name + " needs both s0 and lp_bar");
    }
    validate(set);
    return set;
}

PceCoefficientSet load_pce_coefficients(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open coefficient file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pce_coefficients(ss.str());
}

std::string to_json(const PceCoefficientSet &coeffs)
{
    nlohmann::ordered_json doc;
    for (std::size_t g = 0; g < kPceSubgroupCount; ++g) {
        nlohmann::ordered_json obj;
        for (std::size_t t = 0; t < kPceTermCount; ++t)
            if (coeffs.groups[g].coef[t] != 0.0)
                obj[std::string(kTermNames[t])] = coeffs.groups[g].coef[t];
        obj["s0"] = coeffs.groups[g].s0;
        obj["lp_bar"] = coeffs.groups[g].lp_bar;
        doc[std::string(kSubgroupNames[g])] = obj;
    }
    return doc.dump(2);
}

double pce_linear_predictor(const PatientCovariates &pc, const PceCoefficientSet &coeffs)
{
    const auto terms = pce_terms(pc);
    const auto &grp = coeffs[resolve_subgroup(pc)];
    double lp = 0.0;
    for (std::size_t t = 0; t < kPceTermCount; ++t)
        lp += grp.coef[t] * terms[t];
    return lp;
}

double clamp_risk(double risk)
{
    if (risk < kRiskFloor)
        return kRiskFloor;
    if (risk > kRiskCeil)
        return kRiskCeil;
    return risk;
}

double pce_risk(double lp, double s0, double lp_bar)
{
    if (!std::isfinite(lp))
        throw NumericError("pce_risk: non-finite linear predictor");
    if (!(s0 > 0.0 && s0 < 1.0))
        throw DomainError("pce_risk: s0 must lie in (0,1)");
    // 1 - s0^e = -expm1(e * log s0)
    const double risk = -std::expm1(std::exp(lp - lp_bar) * std::log(s0));
    return clamp_risk(risk);
}

double cloglog(double risk)
{
    const double r = clamp_risk(risk);
    return std::log(-std::log1p(-r));
}

double inverse_cloglog(double eta) { return -std::expm1(-std::exp(eta)); }

} // namespace adaptive_rd
