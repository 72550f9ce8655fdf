#include "adaptive_rd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adaptive_rd/error.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

using nlohmann::json;

namespace {

std::string join(const std::string &path, const std::string &key)
{
    return path.empty() ? key : path + "." + key;
}

class Reader {
  public:
    Reader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
    }

    bool has(const std::string &key) const { return j_.contains(key); }
    std::string field(const std::string &key) const { return join(path_, key); }

    const json &raw(const std::string &key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    void number(const std::string &key, double &out)
    {
        if (!has(key))
            return;
        const json &v = raw(key);
        if (!v.is_number())
            throw ConfigError(field(key) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out))
            throw ConfigError(field(key) + ": must be finite");
    }

    template <typename Int> void integer(const std::string &key, Int &out, long long min_value)
    {
        if (!has(key))
            return;
        const json &v = raw(key);
        if (!v.is_number_integer())
            throw ConfigError(field(key) + ": expected an integer");
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (min_value > 0 && u < static_cast<std::uint64_t>(min_value))
                throw ConfigError(field(key) + ": must be at least " + std::to_string(min_value));
            out = static_cast<Int>(u);
            return;
        }
        const auto s = v.get<long long>();
        if (s < min_value)
            throw ConfigError(field(key) + ": must be at least " + std::to_string(min_value));
        out = static_cast<Int>(s);
    }

    void string(const std::string &key, std::string &out)
    {
        if (!has(key))
            return;
        const json &v = raw(key);
        if (!v.is_string())
            throw ConfigError(field(key) + ": expected a string");
        out = v.get<std::string>();
    }

    std::string required_string(const std::string &key)
    {
        if (!has(key))
            throw ConfigError(field(key) + ": required");
        std::string out;
        string(key, out);
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(field(it.key()) + ": unknown key");
    }

  private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_schedule(Reader &r, UpdateSchedule &s)
{
    r.integer("warmup", s.warmup, 1);
    r.integer("update_every", s.update_every, 1);
}

SyntheticCohortParams read_synthetic(const json &j, const std::string &path)
{
    SyntheticCohortParams p;
    Reader r(j, path);
    r.number("age_min", p.age_min);
    r.number("age_max", p.age_max);
    r.number("sbp_mean", p.sbp_mean);
    r.number("sbp_sd", p.sbp_sd);
    r.number("sbp_min", p.sbp_min);
    r.number("sbp_max", p.sbp_max);
    r.number("tc_mean", p.tc_mean);
    r.number("tc_sd", p.tc_sd);
    r.number("tc_min", p.tc_min);
    r.number("tc_max", p.tc_max);
    r.number("hdl_slope", p.hdl_slope);
    r.number("hdl_sd", p.hdl_sd);
    r.number("hdl_min", p.hdl_min);
    r.number("hdl_gap", p.hdl_gap);
    r.number("p_female", p.p_female);
    if (r.has("race_probs")) {
        const json &v = r.raw("race_probs");
        if (!v.is_array() || v.size() != 3)
            throw ConfigError(r.field("race_probs") + ": expected an array of 3 numbers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!v[i].is_number())
                throw ConfigError(r.field("race_probs") + ": expected an array of 3 numbers");
            p.race_probs[i] = v[i].get<double>();
        }
    }
    r.number("p_smoker", p.p_smoker);
    r.number("p_diabetes", p.p_diabetes);
    r.number("p_bp_treated", p.p_bp_treated);
    r.finish();
    return p;
}

CohortSource read_cohort(const json &j)
{
    CohortSource c;
    Reader r(j, "cohort");
    const std::string source = r.required_string("source");
    if (source == "synthetic") {
        c.kind = CohortSource::Kind::synthetic;
        if (r.has("params"))
            c.params = read_synthetic(r.raw("params"), "cohort.params");
    } else if (source == "csv") {
        c.kind = CohortSource::Kind::csv;
        c.path = r.required_string("path");
    } else {
        throw ConfigError("cohort.source: expected \"synthetic\" or \"csv\"");
    }
    r.finish();
    return c;
}

OutcomeParams read_outcome(const json &j)
{
    Reader r(j, "outcome");
    const std::string variant = r.required_string("variant");
    static const json empty = json::object();
    const json &params = r.has("params") ? r.raw("params") : empty;
    OutcomeParams out;
    if (variant == "attendance") {
        AttendanceParams p;
        Reader pr(params, "outcome.params");
        pr.number("alpha1", p.alpha1);
        pr.number("alpha2", p.alpha2);
        pr.finish();
        out = p;
    } else if (variant == "cholesterol") {
        CholesterolParams p;
        Reader pr(params, "outcome.params");
        pr.number("beta1", p.beta1);
        pr.number("beta2", p.beta2);
        pr.number("sigma", p.sigma);
        pr.finish();
        out = p;
    } else if (variant == "ascvd") {
        AscvdParams p;
        Reader pr(params, "outcome.params");
        pr.number("gamma1", p.gamma1);
        pr.number("gamma2", p.gamma2);
        pr.number("gamma3", p.gamma3);
        pr.finish();
        out = p;
    } else {
        throw ConfigError("outcome.variant: expected attendance, cholesterol or ascvd");
    }
    r.finish();
    return out;
}

ThresholdStrategy read_threshold(const json &j, const ScenarioConfig &top)
{
    Reader r(j, "threshold_strategy");
    const std::string kind = r.required_string("kind");
    UpdateSchedule schedule{top.warmup, top.update_every};
    ThresholdStrategy out;
    if (kind == "fixed") {
        FixedThreshold s{top.initial_threshold};
        r.number("c", s.c);
        out = s;
    } else if (kind == "rate_target") {
        RateTarget s;
        s.schedule = schedule;
        r.number("rate", s.rate);
        read_schedule(r, s.schedule);
        out = s;
    } else if (kind == "nnt_target") {
        NntTarget s;
        s.schedule = schedule;
        r.number("nnt", s.nnt);
        r.number("smoothing", s.smoothing);
        read_schedule(r, s.schedule);
        out = s;
    } else {
        throw ConfigError("threshold_strategy.kind: expected fixed, rate_target or nnt_target");
    }
    r.finish();
    return out;
}

ModelUpdateStrategy read_model(const json &j, const ScenarioConfig &top)
{
    Reader r(j, "model_strategy");
    const std::string kind = r.required_string("kind");
    UpdateSchedule schedule{top.warmup, top.update_every};
    ModelUpdateStrategy out;
    if (kind == "none") {
        out = NoModelUpdate{};
    } else if (kind == "recalibrate" || kind == "revise") {
        double n0 = 5000.0;
        r.number("shrink_n0", n0);
        read_schedule(r, schedule);
        if (kind == "recalibrate")
            out = Recalibrate{schedule, n0};
        else
            out = Revise{schedule, n0};
    } else {
        throw ConfigError("model_strategy.kind: expected none, recalibrate or revise");
    }
    r.finish();
    return out;
}

Family default_family(const OutcomeParams &o)
{
    switch (o.index()) {
        case 0: return Family::bernoulli_logit;
        case 1: return Family::gaussian_identity;
        default: return Family::bernoulli_cloglog;
    }
}

EstimatorConfig read_estimator(const json *j, const OutcomeParams &outcome)
{
    EstimatorConfig e;
    e.family = default_family(outcome);
    if (!j)
        return e;
    Reader r(*j, "estimator");
    r.integer("spline_df", e.spline_df, 1);
    r.number("pca_variance", e.pca_variance);
    r.integer("max_components", e.max_components, 0);
    r.number("bandwidth", e.bandwidth);
    if (r.has("family")) {
        std::string name;
        r.string("family", name);
        const auto fam = parse_family(name);
        if (!fam)
            throw ConfigError("estimator.family: expected gaussian, logit or cloglog");
        e.family = *fam;
    }
    r.number("confidence", e.confidence);
    r.number("min_effective_count", e.min_effective_count);
    r.finish();
    return e;
}

CurveGrid read_grid(const json &j)
{
    CurveGrid g;
    Reader r(j, "curve_grid");
    r.number("lo", g.lo);
    r.number("hi", g.hi);
    r.number("step", g.step);
    r.finish();
    return g;
}

void apply_override(json &doc, const std::string &spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override \"" + spec + "\": expected key=value");
    const std::string key = spec.substr(0, eq);
    const std::string text = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception &) {
        value = text;
    }
    json *node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("override \"" + spec + "\": empty key segment");
        if (!node->is_object())
            throw ConfigError("override \"" + key + "\": " + key.substr(0, start ? start - 1 : 0) +
                              " is not an object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null())
            *node = json::object();
        start = dot + 1;
    }
}

ScenarioConfig parse_document(const json &doc)
{
    ScenarioConfig c;
    Reader r(doc, "");
    if (!r.has("scenario"))
        throw ConfigError("scenario: required");
    r.integer("scenario", c.scenario, std::numeric_limits<long long>::min());
    if (c.scenario < 1 || c.scenario > 5)
        throw ConfigError("scenario: must be between 1 and 5");
    r.integer("n_patients", c.n_patients, 1);
    r.integer("warmup", c.warmup, 1);
    r.integer("update_every", c.update_every, 1);
    r.number("initial_threshold", c.initial_threshold);
    r.integer("seed", c.seed, 0);

    if (r.has("cohort"))
        c.cohort = read_cohort(r.raw("cohort"));
    if (!r.has("outcome"))
        throw ConfigError("outcome: required");
    c.outcome = read_outcome(r.raw("outcome"));
    if (!r.has("threshold_strategy"))
        throw ConfigError("threshold_strategy: required");
    c.threshold_strategy = read_threshold(r.raw("threshold_strategy"), c);
    if (r.has("model_strategy"))
        c.model_strategy = read_model(r.raw("model_strategy"), c);
    c.estimator = read_estimator(r.has("estimator") ? &r.raw("estimator") : nullptr, c.outcome);
    if (r.has("curve_grid"))
        c.curve_grid = read_grid(r.raw("curve_grid"));
    if (r.has("pce_coefficients")) {
        std::string p;
        r.string("pce_coefficients", p);
        c.pce_coefficients = p;
    }
    r.finish();
    c.validate();
    return c;
}

json schedule_json(const UpdateSchedule &s)
{
    return {{"warmup", s.warmup}, {"update_every", s.update_every}};
}

} // namespace

std::vector<double> CurveGrid::points() const
{
    validate();
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = lo + static_cast<double>(k) * step;
    return out;
}

void CurveGrid::validate() const
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step))
        throw ConfigError("curve_grid: values must be finite");
    if (!(step > 0.0))
        throw ConfigError("curve_grid.step: must be positive");
    if (!(hi >= lo))
        throw ConfigError("curve_grid.hi: must not be below lo");
    if ((hi - lo) / step > 1e6)
        throw ConfigError("curve_grid: too many points");
}

CurveGrid parse_grid(const std::string &text)
{
    const auto parts = detail::split_csv_line(text, ':');
    if (parts.size() != 3)
        throw ConfigError("--grid: expected lo:hi:step");
    CurveGrid g;
    const auto lo = detail::parse_double(parts[0]);
    const auto hi = detail::parse_double(parts[1]);
    const auto step = detail::parse_double(parts[2]);
    if (!lo || !hi || !step)
        throw ConfigError("--grid: expected lo:hi:step");
    g.lo = *lo;
    g.hi = *hi;
    g.step = *step;
    g.validate();
    return g;
}

void ScenarioConfig::validate() const
{
    if (scenario < 1 || scenario > 5)
        throw ConfigError("scenario: must be between 1 and 5");
    if (n_patients < 1)
        throw ConfigError("n_patients: must be at least 1");
    if (warmup < 1)
        throw ConfigError("warmup: must be at least 1");
    if (update_every < 1)
        throw ConfigError("update_every: must be at least 1");
    if (!(initial_threshold > 0.0 && initial_threshold < 1.0))
        throw ConfigError("initial_threshold: must lie in (0, 1)");
    if (cohort.kind == CohortSource::Kind::synthetic) {
        try {
            adaptive_rd::validate(cohort.params);
        } catch (const ConfigError &e) {
            throw ConfigError(std::string("cohort.params: ") + e.what());
        }
    } else if (cohort.path.empty()) {
        throw ConfigError("cohort.path: required for csv cohorts");
    }
    std::optional<OutcomeModel> model;
    try {
        model.emplace(outcome);
    } catch (const ConfigError &e) {
        throw ConfigError(std::string("outcome.params: ") + e.what());
    }
    adaptive_rd::validate(threshold_strategy);
    adaptive_rd::validate(model_strategy);
    if (const auto *f = std::get_if<FixedThreshold>(&threshold_strategy))
        if (!(f->c > 0.0 && f->c < 1.0))
            throw ConfigError("threshold_strategy.c: must lie in (0, 1)");
    estimator.validate();
    curve_grid.validate();

    if (model->kind() == OutcomeKind::continuous && is_bernoulli(estimator.family))
        throw ConfigError("estimator.family: " + std::string(to_string(estimator.family)) +
                          " does not match the " + std::string(variant_name(outcome)) + " outcome");

    const std::string id = "scenario " + std::to_string(scenario);
    static const char *const expected_variant[] = {"", "attendance", "cholesterol", "cholesterol", "ascvd", "ascvd"};
    if (variant_name(outcome) != expected_variant[scenario])
        throw ConfigError("outcome.variant: " + id + " requires " + expected_variant[scenario]);
    const bool nnt = std::holds_alternative<NntTarget>(threshold_strategy);
    if ((scenario == 3) != nnt)
        throw ConfigError(std::string("threshold_strategy.kind: ") +
                          (scenario == 3 ? id + " requires nnt_target" : id + " does not use nnt_target"));
    const std::size_t expected_model = scenario == 4 ? 1 : scenario == 5 ? 2 : 0;
    static const char *const model_names[] = {"none", "recalibrate", "revise"};
    if (model_strategy.index() != expected_model)
        throw ConfigError("model_strategy.kind: " + id + " requires " + model_names[expected_model]);
}

ScenarioConfig parse_scenario_config(const std::string &json_text, const std::vector<std::string> &overrides)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto &o : overrides)
        apply_override(doc, o);
    return parse_document(doc);
}

ScenarioConfig load_scenario_config(const std::filesystem::path &path, const std::vector<std::string> &overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto config = parse_scenario_config(ss.str(), overrides);
    if (config.cohort.kind == CohortSource::Kind::csv && config.cohort.path.is_relative())
        config.cohort.path = path.parent_path() / config.cohort.path;
    if (config.pce_coefficients && config.pce_coefficients->is_relative())
        config.pce_coefficients = path.parent_path() / *config.pce_coefficients;
    return config;
}

std::string to_json(const ScenarioConfig &c)
{
    json j;
    j["scenario"] = c.scenario;
    j["n_patients"] = c.n_patients;
    j["warmup"] = c.warmup;
    j["update_every"] = c.update_every;
    j["initial_threshold"] = c.initial_threshold;
    j["seed"] = c.seed;

    if (c.cohort.kind == CohortSource::Kind::csv) {
        j["cohort"] = {{"source", "csv"}, {"path", c.cohort.path.string()}};
    } else {
        const auto &p = c.cohort.params;
        j["cohort"] = {{"source", "synthetic"},
                       {"params",
                        {{"age_min", p.age_min},
                         {"age_max", p.age_max},
                         {"sbp_mean", p.sbp_mean},
                         {"sbp_sd", p.sbp_sd},
                         {"sbp_min", p.sbp_min},
                         {"sbp_max", p.sbp_max},
                         {"tc_mean", p.tc_mean},
                         {"tc_sd", p.tc_sd},
                         {"tc_min", p.tc_min},
                         {"tc_max", p.tc_max},
                         {"hdl_slope", p.hdl_slope},
                         {"hdl_sd", p.hdl_sd},
                         {"hdl_min", p.hdl_min},
                         {"hdl_gap", p.hdl_gap},
                         {"p_female", p.p_female},
                         {"race_probs", p.race_probs},
                         {"p_smoker", p.p_smoker},
                         {"p_diabetes", p.p_diabetes},
                         {"p_bp_treated", p.p_bp_treated}}}};
    }

    json outcome;
    outcome["variant"] = std::string(variant_name(c.outcome));
    if (const auto *a = std::get_if<AttendanceParams>(&c.outcome))
        outcome["params"] = {{"alpha1", a->alpha1}, {"alpha2", a->alpha2}};
    else if (const auto *ch = std::get_if<CholesterolParams>(&c.outcome))
        outcome["params"] = {{"beta1", ch->beta1}, {"beta2", ch->beta2}, {"sigma", ch->sigma}};
    else {
        const auto &g = std::get<AscvdParams>(c.outcome);
        outcome["params"] = {{"gamma1", g.gamma1}, {"gamma2", g.gamma2}, {"gamma3", g.gamma3}};
    }
    j["outcome"] = outcome;

    json ts;
    if (const auto *f = std::get_if<FixedThreshold>(&c.threshold_strategy)) {
        ts = {{"kind", "fixed"}, {"c", f->c}};
    } else if (const auto *rt = std::get_if<RateTarget>(&c.threshold_strategy)) {
        ts = schedule_json(rt->schedule);
        ts["kind"] = "rate_target";
        ts["rate"] = rt->rate;
    } else {
        const auto &nt = std::get<NntTarget>(c.threshold_strategy);
        ts = schedule_json(nt.schedule);
        ts["kind"] = "nnt_target";
        ts["nnt"] = nt.nnt;
        ts["smoothing"] = nt.smoothing;
    }
    j["threshold_strategy"] = ts;

    json ms;
    if (std::holds_alternative<NoModelUpdate>(c.model_strategy)) {
        ms = {{"kind", "none"}};
    } else if (const auto *rc = std::get_if<Recalibrate>(&c.model_strategy)) {
        ms = schedule_json(rc->schedule);
        ms["kind"] = "recalibrate";
        ms["shrink_n0"] = rc->shrink_n0;
    } else {
        const auto &rv = std::get<Revise>(c.model_strategy);
        ms = schedule_json(rv.schedule);
        ms["kind"] = "revise";
        ms["shrink_n0"] = rv.shrink_n0;
    }
    j["model_strategy"] = ms;

    const auto &e = c.estimator;
    j["estimator"] = {{"spline_df", e.spline_df},
                      {"pca_variance", e.pca_variance},
                      {"max_components", e.max_components},
                      {"bandwidth", e.bandwidth},
                      {"family", std::string(to_string(e.family))},
                      {"confidence", e.confidence},
                      {"min_effective_count", e.min_effective_count}};
    j["curve_grid"] = {{"lo", c.curve_grid.lo}, {"hi", c.curve_grid.hi}, {"step", c.curve_grid.step}};
    if (c.pce_coefficients)
        j["pce_coefficients"] = c.pce_coefficients->string();
    return j.dump(2);
}

ScenarioConfig preset_config(int scenario)
{
    ScenarioConfig c;
    c.scenario = scenario;
    c.seed = static_cast<std::uint64_t>(scenario);
    const UpdateSchedule schedule{c.warmup, c.update_every};
    switch (scenario) {
        case 1:
            c.outcome = AttendanceParams{};
            c.threshold_strategy = RateTarget{0.30, schedule};
            break;
        case 2:
            c.outcome = CholesterolParams{};
            c.threshold_strategy = RateTarget{0.30, schedule};
            break;
        case 3:
            c.outcome = CholesterolParams{};
            c.threshold_strategy = NntTarget{3.0, schedule, 0.5};
            break;
        case 4:
            c.outcome = AscvdParams{};
            c.threshold_strategy = FixedThreshold{c.initial_threshold};
            c.model_strategy = Recalibrate{schedule, 5000.0};
            break;
        case 5:
            c.outcome = AscvdParams{};
            c.threshold_strategy = FixedThreshold{c.initial_threshold};
            c.model_strategy = Revise{schedule, 5000.0};
            break;
        default:
            throw ConfigError("scenario: must be between 1 and 5");
    }
    c.estimator.family = default_family(c.outcome);
    c.validate();
    return c;
}

std::filesystem::path preset_directory()
{
    return ADAPTIVE_RD_PRESET_DIR;
}

} // namespace adaptive_rd
