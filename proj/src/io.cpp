#include "adaptive_rd/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "adaptive_rd/error.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

using nlohmann::json;
using detail::format_double;

namespace {

constexpr const char *kTrialHeader = "index,age,sex,race,systolic_bp,total_chol,hdl_chol,smoker,diabetes,bp_treated,"
                                     "version_id,raw_risk,threshold,shifted_risk,treated,outcome,baseline_risk";
constexpr std::size_t kTrialFields = 17;

[[noreturn]] void bad(std::size_t line, const std::string &field, const std::string &what)
{
    throw IngestionError("trial csv: " + field + ": " + what + ", line " + std::to_string(line), line, field);
}

double num(std::string_view text, std::size_t line, const char *field)
{
    const auto v = detail::parse_double(text);
    if (!v)
        bad(line, field, "unparseable value '" + std::string(text) + "'");
    return *v;
}

long long integer(std::string_view text, std::size_t line, const char *field)
{
    const auto v = detail::parse_int(text);
    if (!v)
        bad(line, field, "unparseable value '" + std::string(text) + "'");
    return *v;
}

bool flag(std::string_view text, std::size_t line, const char *field)
{
    text = detail::trim(text);
    if (text == "1")
        return true;
    if (text == "0")
        return false;
    bad(line, field, "flag must be 0 or 1");
}

json number_or_null(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

} // namespace

void write_trial_csv(std::ostream &out, const std::vector<PatientRecord> &records)
{
    out << kTrialHeader << '\n';
    for (const auto &r : records) {
        const auto &c = r.covariates;
        out << r.index << ',' << format_double(c.age) << ',' << to_string(c.sex) << ',' << to_string(c.race) << ','
            << format_double(c.systolic_bp) << ',' << format_double(c.total_chol) << ','
            << format_double(c.hdl_chol) << ',' << int(c.smoker) << ',' << int(c.diabetes) << ','
            << int(c.bp_treated) << ',' << r.version_id << ',' << format_double(r.raw_risk) << ','
            << format_double(r.threshold) << ',' << format_double(r.shifted_risk) << ',' << int(r.treated) << ','
            << format_double(r.outcome) << ',' << format_double(r.baseline_risk) << '\n';
    }
}

std::vector<PatientRecord> read_trial_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kTrialHeader)
        throw IngestionError("trial csv: bad or missing header, line 1", 1, "header");
    std::vector<PatientRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        if (in.eof())
            bad(line_no, "row", "truncated line (no terminating newline)");
        const auto f = detail::split_csv_line(line);
        if (f.size() != kTrialFields)
            bad(line_no, "row", "expected 17 fields, got " + std::to_string(f.size()));
        PatientRecord r;
        const long long index = integer(f[0], line_no, "index");
        if (index != static_cast<long long>(records.size()) + 1)
            bad(line_no, "index", "expected " + std::to_string(records.size() + 1));
        r.index = static_cast<std::size_t>(index);
        auto &c = r.covariates;
        c.age = num(f[1], line_no, "age");
        const auto sex = detail::trim(f[2]);
        if (sex == "male")
            c.sex = Sex::male;
        else if (sex == "female")
            c.sex = Sex::female;
        else
            bad(line_no, "sex", "unknown value '" + std::string(sex) + "'");
        const auto race = detail::trim(f[3]);
        if (race == "white")
            c.race = Race::white;
        else if (race == "black")
            c.race = Race::black;
        else if (race == "other")
            c.race = Race::other;
        else
            bad(line_no, "race", "unknown value '" + std::string(race) + "'");
        c.systolic_bp = num(f[4], line_no, "systolic_bp");
        c.total_chol = num(f[5], line_no, "total_chol");
        c.hdl_chol = num(f[6], line_no, "hdl_chol");
        c.smoker = flag(f[7], line_no, "smoker");
        c.diabetes = flag(f[8], line_no, "diabetes");
        c.bp_treated = flag(f[9], line_no, "bp_treated");
        const long long version = integer(f[10], line_no, "version_id");
        if (version < 0)
            bad(line_no, "version_id", "must be non-negative");
        r.version_id = static_cast<int>(version);
        r.raw_risk = num(f[11], line_no, "raw_risk");
        r.threshold = num(f[12], line_no, "threshold");
        r.shifted_risk = num(f[13], line_no, "shifted_risk");
        r.treated = flag(f[14], line_no, "treated");
        r.outcome = num(f[15], line_no, "outcome");
        r.baseline_risk = num(f[16], line_no, "baseline_risk");
        try {
            validate_covariates(c);
        } catch (const ValidationError &e) {
            bad(line_no, "covariates", e.what());
        }
        if (r.shifted_risk != r.raw_risk - r.threshold)
            bad(line_no, "shifted_risk", "does not equal raw_risk - threshold");
        if (r.treated != (r.shifted_risk >= 0.0))
            bad(line_no, "treated", "inconsistent with shifted_risk");
        records.push_back(r);
    }
    return records;
}

void write_events_csv(std::ostream &out, const std::vector<AdaptationEvent> &events)
{
    out << "index,kind,old_value,new_value,detail\n";
    for (const auto &e : events) {
        std::string detail = e.detail;
        for (char &ch : detail)
            if (ch == ',' || ch == '\n' || ch == '\r')
                ch = ';';
        out << e.index << ',' << e.kind << ',' << format_double(e.old_value) << ',' << format_double(e.new_value)
            << ',' << detail << '\n';
    }
}

void write_curve_csv(std::ostream &out, const EffectCurve &curve)
{
    out << "r,beta_hat,se,ci_low,ci_high,mu1,mu0,eff_n_treated,eff_n_untreated\n";
    for (const auto &p : curve.points)
        out << format_double(p.r) << ',' << format_double(p.beta_hat) << ',' << format_double(p.se) << ','
            << format_double(p.ci_low) << ',' << format_double(p.ci_high) << ',' << format_double(p.mu1) << ','
            << format_double(p.mu0) << ',' << format_double(p.eff_n_treated) << ','
            << format_double(p.eff_n_untreated) << '\n';
}

namespace {

json method_json(const MethodResult &m, bool with_ci)
{
    json j;
    j["ok"] = m.ok;
    j["estimate"] = m.ok ? number_or_null(m.estimate) : json(nullptr);
    if (with_ci) {
        j["se"] = m.ok ? number_or_null(m.se) : json(nullptr);
        j["ci_low"] = m.ok ? number_or_null(m.ci_low) : json(nullptr);
        j["ci_high"] = m.ok ? number_or_null(m.ci_high) : json(nullptr);
        j["low_support"] = m.low_support;
    }
    if (!m.ok)
        j["error"] = m.error;
    return j;
}

} // namespace

std::string summary_json(const TrialData &trial, const Evaluation &ev, const TrialFit &fit)
{
    const EffectCurve &curve = fit.curve;
    json j;
    j["scenario"] = trial.config.scenario;
    j["seed"] = trial.config.seed;
    j["n_patients"] = trial.records.size();
    std::size_t treated = 0;
    for (const auto &r : trial.records)
        treated += r.treated ? 1 : 0;
    j["treated_fraction"] = trial.records.empty() ? 0.0 : double(treated) / double(trial.records.size());
    j["final_threshold"] = ev.final_threshold;
    j["final_model_version"] = trial.records.empty() ? 0 : trial.records.back().version_id;
    j["model_versions"] = trial.history.versions.size();
    j["distinct_columns"] = trial.matrix.distinct_columns();
    j["adaptation_events"] = trial.events.size();
    j["clamp_events"] = trial.clamp_events;

    const auto &rd = ev[Method::adaptive_rd];
    j["local_ate"] = method_json(rd, true);
    j["local_ate"]["truth"] = ev.truth;
    j["local_ate"]["confidence"] = trial.config.estimator.confidence;
    json comparators = json::object();
    for (Method m : kMethods)
        if (m != Method::adaptive_rd)
            comparators[std::string(to_string(m))] = method_json(ev[m], false);
    j["comparators"] = comparators;
    j["pca_components"] = fit.surface.components();
    j["pca_columns"] = fit.surface.pc_columns.size();
    j["curve_points"] = curve.points.size();
    j["curve_unsupported"] = curve.unsupported;
    return j.dump(2) + "\n";
}

std::string report_json(const ReplicationReport &report)
{
    json j;
    j["scenario"] = report.config.scenario;
    j["root_seed"] = report.config.seed;
    j["replications"] = report.replications;
    j["trial_failures"] = report.trial_failures;
    j["final_threshold"] = {{"mean", report.final_threshold_mean},
                            {"sd", report.final_threshold_sd},
                            {"min", report.final_threshold_min},
                            {"max", report.final_threshold_max}};
    json methods = json::object();
    for (Method m : kMethods) {
        const auto &s = report[m];
        json mj;
        mj["successes"] = s.successes;
        mj["failures"] = s.failures;
        mj["bias"] = s.bias;
        mj["mse"] = s.mse;
        mj["mean_abs_error"] = s.mean_abs_error;
        if (s.coverage)
            mj["coverage"] = *s.coverage;
        mj["error_quantiles"] = {{"q05", s.error_quantiles[0]},
                                 {"q25", s.error_quantiles[1]},
                                 {"q50", s.error_quantiles[2]},
                                 {"q75", s.error_quantiles[3]},
                                 {"q95", s.error_quantiles[4]}};
        std::vector<json> errors;
        for (const auto &r : report.records) {
            if (!r.trial_ok || !r.evaluation[m].ok)
                continue;
            errors.push_back(r.evaluation[m].estimate - r.evaluation.truth);
        }
        mj["errors"] = errors;
        methods[std::string(to_string(m))] = mj;
    }
    j["methods"] = methods;
    return j.dump(2) + "\n";
}

void write_errors_csv(std::ostream &out, const ReplicationReport &report)
{
    out << "replication,seed,method,status,estimate,truth,error,ci_low,ci_high,message\n";
    for (const auto &r : report.records) {
        const auto seed = replication_seed(report.config.seed, r.replication);
        auto clean = [](std::string s) {
            for (char &ch : s)
                if (ch == ',' || ch == '\n' || ch == '\r')
                    ch = ';';
            return s;
        };
        if (!r.trial_ok) {
            out << r.replication << ',' << seed << ",trial,failed,,,,,," << clean(r.trial_error) << '\n';
            continue;
        }
        for (Method m : kMethods) {
            const auto &res = r.evaluation[m];
            out << r.replication << ',' << seed << ',' << to_string(m) << ',';
            if (!res.ok) {
                out << "failed,," << format_double(r.evaluation.truth) << ",,,," << clean(res.error) << '\n';
                continue;
            }
            out << "ok," << format_double(res.estimate) << ',' << format_double(r.evaluation.truth) << ','
                << format_double(res.estimate - r.evaluation.truth) << ',';
            if (m == Method::adaptive_rd)
                out << format_double(res.ci_low) << ',' << format_double(res.ci_high);
            else
                out << ',';
            out << ",\n";
        }
    }
}

void write_text_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open " + path.string(), 0, "file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace adaptive_rd
