#include "adaptive_rd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/io.hpp"
#include "adaptive_rd/pce.hpp"
#include "adaptive_rd/svg.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::size_t replications = 100;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string grid;
    bool svg = false;
    std::string trial;
    std::string matrix;
    std::string input;
    std::string coefficients;
};

ScenarioConfig load_config(const Options &o)
{
    auto overrides = o.overrides;
    if (o.seed)
        overrides.push_back("seed=" + std::to_string(*o.seed));
    return load_scenario_config(o.config, overrides);
}

fs::path prepare_out(const std::string &dir)
{
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw Error("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

template <typename F> void write_stream(const fs::path &path, F &&f)
{
    std::ostringstream ss;
    f(ss);
    write_text_file(path, ss.str());
}

int cmd_simulate(const Options &o, std::ostream &out)
{
    const auto config = load_config(o);
    const auto dir = prepare_out(o.out);
    const TrialData trial = run_scenario(config);
    const Evaluation ev = evaluate_at_final_threshold(trial);
    const TrialFit fit = fit_trial(trial);

    write_stream(dir / "trial.csv", [&](std::ostream &s) { write_trial_csv(s, trial.records); });
    write_stream(dir / "events.csv", [&](std::ostream &s) { write_events_csv(s, trial.events); });
    write_stream(dir / "curve.csv", [&](std::ostream &s) { write_curve_csv(s, fit.curve); });
    write_stream(dir / "matrix.csv", [&](std::ostream &s) { write_matrix_csv(s, trial.matrix); });
    write_text_file(dir / "summary.json", summary_json(trial, ev, fit));
    if (o.svg)
        write_text_file(dir / "curve.svg", curve_svg(fit.curve, "Scenario " + std::to_string(config.scenario)));

    const auto &rd = ev[Method::adaptive_rd];
    out << "scenario " << config.scenario << ": final threshold " << detail::format_double(ev.final_threshold);
    if (rd.ok)
        out << ", local ATE " << rd.estimate << " [" << rd.ci_low << ", " << rd.ci_high << "]";
    else
        out << ", local ATE unavailable (" << rd.error << ")";
    out << ", truth " << ev.truth << "\n";
    return kExitOk;
}

int cmd_replicate(const Options &o, std::ostream &out)
{
    const auto config = load_config(o);
    if (o.replications < 1)
        throw ConfigError("--replications: must be at least 1");
    const auto dir = prepare_out(o.out);
    const ReplicationReport report = run_replications(config, o.replications, o.workers);
    write_text_file(dir / "report.json", report_json(report));
    write_stream(dir / "errors.csv", [&](std::ostream &s) { write_errors_csv(s, report); });
    if (o.svg)
        write_text_file(dir / "errors.svg",
                        error_boxplot_svg(report, "Scenario " + std::to_string(config.scenario) + " estimation error"));
    for (Method m : kMethods) {
        const auto &s = report[m];
        out << to_string(m) << ": bias " << s.bias << ", mse " << s.mse;
        if (s.coverage)
            out << ", coverage " << *s.coverage;
        out << ", failures " << s.failures << "\n";
    }
    return kExitOk;
}

int cmd_estimate(const Options &o, std::ostream &out)
{
    const auto config = load_config(o);
    std::ifstream trial_in(o.trial);
    if (!trial_in)
        throw IngestionError("cannot open " + o.trial, 0, "file");
    const auto records = read_trial_csv(trial_in);
    if (records.empty())
        throw IngestionError("trial csv has no records", 0, "row");
    std::vector<HistoryEntry> entries;
    std::vector<char> treatments;
    std::vector<double> outcomes;
    for (const auto &r : records) {
        entries.push_back({r.version_id, r.threshold});
        treatments.push_back(r.treated ? 1 : 0);
        outcomes.push_back(r.outcome);
    }
    std::ifstream matrix_in(o.matrix);
    if (!matrix_in)
        throw IngestionError("cannot open " + o.matrix, 0, "file");
    const auto matrix = read_matrix_csv(matrix_in, entries);
    for (std::size_t k = 0; k < records.size(); ++k)
        if (matrix.raw(k, k) != records[k].raw_risk)
            throw IngestionError("matrix csv: diagonal does not match trial raw_risk for patient " +
                                     std::to_string(k + 1),
                                 k + 1, "raw_risk");

    const CurveGrid grid = o.grid.empty() ? config.curve_grid : parse_grid(o.grid);
    const auto points = grid.points();
    const TrialFit fit = fit_logged(matrix, treatments, outcomes, config.estimator, points);

    const fs::path dest(o.out);
    fs::path file = dest;
    if (dest.extension() != ".csv") {
        prepare_out(o.out);
        file = dest / "curve.csv";
    }
    write_stream(file, [&](std::ostream &s) { write_curve_csv(s, fit.curve); });
    if (o.svg)
        write_text_file(file.parent_path() / "curve.svg", curve_svg(fit.curve, "Re-estimated effect curve"));
    out << "wrote " << fit.curve.points.size() << " curve points to " << file.string();
    if (!fit.curve.unsupported.empty())
        out << " (" << fit.curve.unsupported.size() << " grid points without kernel support omitted)";
    out << "\n";
    return kExitOk;
}

int cmd_risk(const Options &o, std::ostream &out)
{
    const PceCoefficientSet coeffs =
        o.coefficients.empty() ? published_pce_coefficients() : load_pce_coefficients(o.coefficients);
    const auto patients = load_cohort_csv(o.input);
    std::ostringstream ss;
    ss << "row,sex,race,subgroup,risk\n";
    for (std::size_t k = 0; k < patients.size(); ++k) {
        const auto &pc = patients[k];
        const auto group = resolve_subgroup(pc);
        const auto &g = coeffs[group];
        const double risk = pce_risk(pce_linear_predictor(pc, coeffs), g.s0, g.lp_bar);
        ss << k + 1 << ',' << to_string(pc.sex) << ',' << to_string(pc.race) << ','
           << (pc.race == Race::other ? std::string("white-model-applied") : std::string(subgroup_name(group)))
           << ',' << detail::format_double(risk) << '\n';
    }
    if (o.out.empty())
        out << ss.str();
    else
        write_text_file(o.out, ss.str());
    return kExitOk;
}

int cmd_validate(const Options &o, std::ostream &out)
{
    const auto config = load_config(o);
    out << "ok: scenario " << config.scenario << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Adaptive regression-discontinuity simulator and estimator"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", o.config, "Scenario JSON")->required();
        sub->add_option("--override", o.overrides, "Dotted key=value override (repeatable)");
        sub->add_option("--seed", o.seed, "Root seed override");
    };

    auto *simulate = app.add_subcommand("simulate", "Run one trial and write its outputs");
    common(simulate);
    simulate->add_option("--out", o.out, "Output directory")->required();
    simulate->add_flag("--svg", o.svg, "Also write curve.svg");

    auto *replicate = app.add_subcommand("replicate", "Run seeded replications and aggregate estimator errors");
    common(replicate);
    replicate->add_option("--out", o.out, "Output directory")->required();
    replicate->add_option("--replications", o.replications, "Number of replications");
    replicate->add_option("--workers", o.workers, "Worker threads");
    replicate->add_flag("--svg", o.svg, "Also write errors.svg");

    auto *estimate = app.add_subcommand("estimate", "Re-estimate the effect curve from logged trial data");
    common(estimate);
    estimate->add_option("--trial", o.trial, "trial.csv from simulate")->required();
    estimate->add_option("--matrix", o.matrix, "matrix.csv from simulate")->required();
    estimate->add_option("--grid", o.grid, "Evaluation grid lo:hi:step");
    estimate->add_option("--out", o.out, "Output directory or .csv path")->required();
    estimate->add_flag("--svg", o.svg, "Also write curve.svg");

    auto *risk = app.add_subcommand("risk", "Pooled Cohort Equations risk for a covariate CSV");
    risk->add_option("--input", o.input, "Cohort CSV")->required();
    risk->add_option("--out", o.out, "Output CSV (default stdout)");
    risk->add_option("--coefficients", o.coefficients, "Coefficient JSON (default: published values)");

    auto *validate_cmd = app.add_subcommand("validate-config", "Check a scenario file against the schema");
    common(validate_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        if (*simulate)
            return cmd_simulate(o, out);
        if (*replicate)
            return cmd_replicate(o, out);
        if (*estimate)
            return cmd_estimate(o, out);
        if (*risk)
            return cmd_risk(o, out);
        return cmd_validate(o, out);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IngestionError &e) {
        err << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError &e) {
        err << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace adaptive_rd
