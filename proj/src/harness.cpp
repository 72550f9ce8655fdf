#include "adaptive_rd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "adaptive_rd/comparators.hpp"
#include "adaptive_rd/error.hpp"
#include "adaptive_rd/stats.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

std::vector<char> TrialData::treatments() const
{
    std::vector<char> out(records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
        out[k] = records[k].treated ? 1 : 0;
    return out;
}

std::vector<double> TrialData::outcomes() const
{
    std::vector<double> out(records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
        out[k] = records[k].outcome;
    return out;
}

std::vector<double> TrialData::baseline_risks() const
{
    std::vector<double> out(records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
        out[k] = records[k].baseline_risk;
    return out;
}

std::vector<PatientCovariates> TrialData::covariates() const
{
    std::vector<PatientCovariates> out(records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
        out[k] = records[k].covariates;
    return out;
}

CohortRows load_cohort_rows(const ScenarioConfig &config)
{
    if (config.cohort.kind != CohortSource::Kind::csv)
        return {};
    auto rows = load_cohort_csv(config.cohort.path);
    if (rows.empty())
        throw IngestionError("cohort csv has no rows", 0, "");
    return rows;
}

namespace {

constexpr std::size_t kNntGridPoints = 101;

class TrialRunner {
  public:
    TrialRunner(const ScenarioConfig &config, const CohortRows *rows)
        : config_(config), outcome_(config.outcome), stream_(config.seed, 0)
    {
        config_.validate();
        const PceCoefficientSet coeffs =
            config.pce_coefficients ? load_pce_coefficients(*config.pce_coefficients) : published_pce_coefficients();
        trial_.config = config;
        trial_.history.versions.push_back(original_pce_model(coeffs));
        if (config.cohort.kind == CohortSource::Kind::csv) {
            if (rows) {
                rows_ = rows;
            } else {
                owned_rows_ = load_cohort_rows(config);
                rows_ = &owned_rows_;
            }
        }
        if (const auto *f = std::get_if<FixedThreshold>(&config.threshold_strategy))
            threshold_ = f->c;
        else
            threshold_ = config.initial_threshold;

        const std::size_t n = config.n_patients;
        trial_.records.reserve(n);
        trial_.history.entries.reserve(n);
        covariates_.reserve(n);
        baseline_.reserve(n);
        treated_.reserve(n);
        outcomes_.reserve(n);
        cache_[0].reserve(n);
    }

    TrialData run()
    {
        const std::size_t n = config_.n_patients;
        for (std::size_t i = 1; i <= n; ++i) {
            admit(i);
            update_model(i);
            update_threshold(i);
        }
        for (auto &[v, risks] : cache_)
            extend(v, n);
        trial_.matrix = build_counterfactual_matrix(trial_.history, cache_, n);
        trial_.clamp_events = clamps_.events;
        return std::move(trial_);
    }

  private:
    const RiskModelVersion &original() const { return trial_.history.versions.front(); }
    const RiskModelVersion &current() const { return trial_.history.versions[static_cast<std::size_t>(version_)]; }

    PatientCovariates draw_covariates(std::size_t i) const
    {
        const SeedStream s = stream_.child(2 * i);
        if (rows_) {
            Engine rng = s.engine();
            const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(rows_->size()));
            return (*rows_)[std::min(pick, rows_->size() - 1)];
        }
        return sample_patient(config_.cohort.params, s);
    }

    void admit(std::size_t i)
    {
        PatientRecord rec;
        rec.index = i;
        rec.covariates = validate_covariates(draw_covariates(i));
        rec.version_id = version_;
        rec.baseline_risk = predict_risk(original(), rec.covariates);
        rec.raw_risk = version_ == 0 ? rec.baseline_risk : predict_risk(current(), rec.covariates);
        rec.threshold = threshold_;
        rec.shifted_risk = rec.raw_risk - rec.threshold;
        rec.treated = assign_treatment(rec.shifted_risk);
        rec.outcome = draw_outcome(outcome_, rec.baseline_risk, rec.treated, stream_.child(2 * i + 1), &clamps_);

        auto &base_cache = cache_[0];
        if (base_cache.size() == i - 1)
            base_cache.push_back(rec.baseline_risk);
        if (version_ != 0) {
            auto &cur = cache_[version_];
            if (cur.size() == i - 1)
                cur.push_back(rec.raw_risk);
        }

        covariates_.push_back(rec.covariates);
        baseline_.push_back(rec.baseline_risk);
        treated_.push_back(rec.treated ? 1 : 0);
        outcomes_.push_back(rec.outcome);
        trial_.history.entries.push_back({version_, threshold_});
        trial_.records.push_back(std::move(rec));
    }

    void extend(int v, std::size_t upto)
    {
        auto &risks = cache_[v];
        const auto &model = trial_.history.versions[static_cast<std::size_t>(v)];
        while (risks.size() < upto)
            risks.push_back(predict_risk(model, covariates_[risks.size()]));
    }

    UpdateData update_data() const { return {covariates_, baseline_, treated_, outcomes_}; }

    void log(std::size_t i, std::string kind, double old_value, double new_value, std::string detail)
    {
        trial_.events.push_back({i, std::move(kind), old_value, new_value, std::move(detail)});
    }

    void update_model(std::size_t i)
    {
        const auto &strategy = config_.model_strategy;
        if (std::holds_alternative<NoModelUpdate>(strategy))
            return;
        const int next = static_cast<int>(trial_.history.versions.size());
        try {
            RiskModelVersion model;
            std::ostringstream note;
            if (const auto *rc = std::get_if<Recalibrate>(&strategy)) {
                if (!rc->schedule.is_update_index(i, config_.n_patients))
                    return;
                model = recalibrate_model(update_data(), original(), rc->shrink_n0, next);
                const auto &cal = std::get<PceStratified>(model.kind).calibration;
                note << "intercept=" << detail::format_double(cal.intercept)
                       << " slope=" << detail::format_double(cal.slope);
            } else {
                const auto &rv = std::get<Revise>(strategy);
                if (!rv.schedule.is_update_index(i, config_.n_patients))
                    return;
                model = revise_model(update_data(), original(), rv.shrink_n0, next);
                note << "treatment=" << detail::format_double(std::get<GlmUnstratified>(model.kind).treatment_coefficient);
            }
            const int old = version_;
            trial_.history.versions.push_back(std::move(model));
            version_ = next;
            cache_[version_].reserve(config_.n_patients);
            log(i, "model", old, next, note.str());
        } catch (const Error &e) {
            log(i, "model_skipped", version_, version_, e.what());
        }
    }

    double nnt_threshold(std::size_t i, const NntTarget &s)
    {
        for (auto &[v, risks] : cache_)
            extend(v, i);
        const auto matrix = build_counterfactual_matrix(trial_.history, cache_, i);
        const auto surface = fit_outcome_surface(matrix, treated_, outcomes_, config_.estimator);
        const auto pred = predict_surface(surface, matrix);

        std::vector<double> sorted(pred.focal);
        std::sort(sorted.begin(), sorted.end());
        const double lo = quantile_sorted(sorted, 0.01);
        const double hi = quantile_sorted(sorted, 0.99);
        std::vector<double> grid(kNntGridPoints);
        for (std::size_t g = 0; g < kNntGridPoints; ++g)
            grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(kNntGridPoints - 1);
        const auto curve = effect_curve(surface, pred, grid);

        const double focal_threshold = matrix.column(matrix.focal_column()).threshold;
        std::vector<CurvePoint> effect;
        effect.reserve(curve.points.size());
        for (const auto &p : curve.points)
            effect.push_back({p.r + focal_threshold, p.beta_hat});
        const auto d = cohens_d_curve(effect, pooled_sd(outcomes_, treated_));
        return threshold_for_nnt(d, nnt_to_cohens_d(s.nnt), threshold_, s.smoothing);
    }

    void update_threshold(std::size_t i)
    {
        const auto &strategy = config_.threshold_strategy;
        if (std::holds_alternative<FixedThreshold>(strategy))
            return;
        try {
            double next = threshold_;
            if (const auto *rt = std::get_if<RateTarget>(&strategy)) {
                if (!rt->schedule.is_update_index(i, config_.n_patients))
                    return;
                extend(version_, i);
                next = threshold_for_rate({cache_[version_].data(), i}, rt->rate);
            } else {
                const auto &nt = std::get<NntTarget>(strategy);
                if (!nt.schedule.is_update_index(i, config_.n_patients))
                    return;
                next = nnt_threshold(i, nt);
            }
            if (!(next > 0.0 && next < 1.0))
                throw DomainError("updated threshold outside (0, 1): " + detail::format_double(next));
            log(i, "threshold", threshold_, next, "");
            threshold_ = next;
        } catch (const Error &e) {
            log(i, "threshold_skipped", threshold_, threshold_, e.what());
        }
    }

    ScenarioConfig config_;
    OutcomeModel outcome_;
    SeedStream stream_;
    const CohortRows *rows_ = nullptr;
    CohortRows owned_rows_;
    ClampCounter clamps_;

    TrialData trial_;
    int version_ = 0;
    double threshold_ = 0.1;
    std::map<int, std::vector<double>> cache_;

    std::vector<PatientCovariates> covariates_;
    std::vector<double> baseline_;
    std::vector<char> treated_;
    std::vector<double> outcomes_;
};

} // namespace

TrialData run_scenario(const ScenarioConfig &config, const CohortRows *rows)
{
    return TrialRunner(config, rows).run();
}

std::string_view to_string(Method m)
{
    switch (m) {
        case Method::adaptive_rd: return "adaptive_rd";
        case Method::naive: return "naive";
        case Method::outcome_regression: return "outcome_regression";
        case Method::ipw: return "ipw";
        case Method::aipw: return "aipw";
    }
    return "unknown";
}

TrialFit fit_logged(const CounterfactualRiskMatrix &matrix, std::span<const char> treatments,
                    std::span<const double> outcomes, const EstimatorConfig &config, std::span<const double> grid)
{
    TrialFit out{fit_outcome_surface(matrix, treatments, outcomes, config), {}, {}};
    out.predictions = predict_surface(out.surface, matrix);
    out.curve = effect_curve(out.surface, out.predictions, grid);
    return out;
}

TrialFit fit_trial(const TrialData &trial)
{
    const auto treatments = trial.treatments();
    const auto outcomes = trial.outcomes();
    const auto grid = trial.config.curve_grid.points();
    return fit_logged(trial.matrix, treatments, outcomes, trial.config.estimator, grid);
}

namespace {

template <typename F> void attempt(MethodResult &slot, F &&f)
{
    try {
        slot.estimate = f();
        slot.ok = std::isfinite(slot.estimate);
        if (!slot.ok)
            slot.error = "non-finite estimate";
    } catch (const Error &e) {
        slot.ok = false;
        slot.error = e.what();
    }
}

} // namespace

Evaluation evaluate_at_final_threshold(const TrialData &trial)
{
    if (trial.records.empty())
        throw InsufficientDataError("evaluate: empty trial");
    const auto &cfg = trial.config;
    const OutcomeModel model(cfg.outcome);
    const auto treatments = trial.treatments();
    const auto outcomes = trial.outcomes();
    const auto baseline = trial.baseline_risks();
    const auto covariates = trial.covariates();
    const auto focal = trial.matrix.focal_shifted();

    Evaluation ev;
    ev.final_threshold = trial.records.back().threshold;
    ev.truth = true_smoothed_ate(model, baseline, focal, 0.0, cfg.estimator.bandwidth);

    auto &rd = ev[Method::adaptive_rd];
    attempt(rd, [&] {
        const auto surface = fit_outcome_surface(trial.matrix, treatments, outcomes, cfg.estimator);
        const auto est = estimate_effect(surface, predict_surface(surface, trial.matrix), 0.0);
        rd.se = est.se;
        rd.ci_low = est.ci_low;
        rd.ci_high = est.ci_high;
        rd.low_support = est.low_support;
        return est.beta_hat;
    });

    attempt(ev[Method::naive], [&] { return naive_diff(outcomes, treatments); });

    const ComparatorData data{covariates, treatments, outcomes, focal};
    ComparatorOptions opts;
    opts.family = cfg.estimator.family;
    opts.bandwidth = cfg.estimator.bandwidth;
    attempt(ev[Method::outcome_regression], [&] { return outcome_regression_ate(data, 0.0, opts); });
    attempt(ev[Method::ipw], [&] { return ipw_ate(data, 0.0, opts); });
    attempt(ev[Method::aipw], [&] { return aipw_ate(data, 0.0, opts); });
    return ev;
}

std::uint64_t replication_seed(std::uint64_t root, std::size_t index)
{
    const SeedStream s = SeedStream(root, 0).child(index);
    return splitmix64(s.root() ^ splitmix64(s.index()));
}

void aggregate(ReplicationReport &report)
{
    report.replications = report.records.size();
    report.trial_failures = 0;
    std::vector<double> finals;
    for (const auto &r : report.records) {
        if (!r.trial_ok) {
            ++report.trial_failures;
            continue;
        }
        finals.push_back(r.evaluation.final_threshold);
    }

    for (Method m : kMethods) {
        MethodSummary s;
        std::vector<double> errors;
        std::size_t covered = 0;
        for (const auto &r : report.records) {
            if (!r.trial_ok)
                continue;
            const auto &res = r.evaluation[m];
            if (!res.ok) {
                ++s.failures;
                continue;
            }
            errors.push_back(res.estimate - r.evaluation.truth);
            if (m == Method::adaptive_rd && res.ci_low <= r.evaluation.truth && r.evaluation.truth <= res.ci_high)
                ++covered;
        }
        s.successes = errors.size();
        if (!errors.empty()) {
            double sum = 0.0, sq = 0.0, ab = 0.0;
            for (double e : errors) {
                sum += e;
                sq += e * e;
                ab += std::abs(e);
            }
            const double cnt = static_cast<double>(errors.size());
            s.bias = sum / cnt;
            s.mse = sq / cnt;
            s.mean_abs_error = ab / cnt;
            std::sort(errors.begin(), errors.end());
            const double probs[5] = {0.05, 0.25, 0.5, 0.75, 0.95};
            for (std::size_t q = 0; q < 5; ++q)
                s.error_quantiles[q] = quantile_sorted(errors, probs[q]);
            if (m == Method::adaptive_rd)
                s.coverage = static_cast<double>(covered) / cnt;
        }
        report.methods[static_cast<std::size_t>(m)] = s;
    }

    if (!finals.empty()) {
        double sum = 0.0;
        for (double f : finals)
            sum += f;
        const double mean = sum / static_cast<double>(finals.size());
        double ss = 0.0;
        for (double f : finals)
            ss += (f - mean) * (f - mean);
        report.final_threshold_mean = mean;
        report.final_threshold_sd = finals.size() > 1 ? std::sqrt(ss / static_cast<double>(finals.size() - 1)) : 0.0;
        report.final_threshold_min = *std::min_element(finals.begin(), finals.end());
        report.final_threshold_max = *std::max_element(finals.begin(), finals.end());
    }
}

ReplicationReport run_replications(const ScenarioConfig &config, std::size_t count, std::size_t workers)
{
    if (count < 1)
        throw ConfigError("replications: must be at least 1");
    config.validate();
    const CohortRows rows = load_cohort_rows(config);

    ReplicationReport report;
    report.config = config;
    report.records.resize(count);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t r = next++; r < count; r = next++) {
            ReplicationRecord &rec = report.records[r];
            rec.replication = r;
            ScenarioConfig cfg = config;
            cfg.seed = replication_seed(config.seed, r);
            try {
                const TrialData trial = run_scenario(cfg, &rows);
                rec.evaluation = evaluate_at_final_threshold(trial);
                rec.trial_ok = true;
            } catch (const std::exception &e) {
                rec.trial_ok = false;
                rec.trial_error = e.what();
            }
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, count);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    aggregate(report);
    return report;
}

} // namespace adaptive_rd
