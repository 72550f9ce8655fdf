#include <doctest.h>

#include <json.hpp>
#include <sstream>
#include <string>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/harness.hpp"
#include "adaptive_rd/io.hpp"

using namespace adaptive_rd;

namespace {

TrialData trial()
{
    auto cfg = preset_config(5);
    cfg.n_patients = 700;
    return run_scenario(cfg);
}

} // namespace

TEST_CASE("trial csv round trip")
{
    auto t = trial();
    std::ostringstream out;
    write_trial_csv(out, t.records);
    std::istringstream in(out.str());
    auto back = read_trial_csv(in);
    REQUIRE(back.size() == t.records.size());
    for (std::size_t j = 0; j < back.size(); ++j) {
        CHECK(back[j].covariates == t.records[j].covariates);
        CHECK(back[j].raw_risk == t.records[j].raw_risk);
        CHECK(back[j].shifted_risk == t.records[j].shifted_risk);
        CHECK(back[j].outcome == t.records[j].outcome);
        CHECK(back[j].baseline_risk == t.records[j].baseline_risk);
        CHECK(back[j].version_id == t.records[j].version_id);
        CHECK(back[j].threshold == t.records[j].threshold);
    }
}

TEST_CASE("trial csv rejects inconsistent rows")
{
    auto t = trial();
    std::ostringstream out;
    write_trial_csv(out, {t.records.begin(), t.records.begin() + 3});
    std::string text = out.str();

    std::istringstream ok(text);
    CHECK(read_trial_csv(ok).size() == 3);

    // flip the treated flag of the first record
    auto line_end = text.find('\n', text.find('\n') + 1);
    std::string row = text.substr(text.find('\n') + 1, line_end - text.find('\n') - 1);
    auto fields_end = row.rfind(',');
    fields_end = row.rfind(',', fields_end - 1);
    auto treated_pos = row.rfind(',', fields_end - 1) + 1;
    std::string flipped = row;
    flipped[treated_pos] = row[treated_pos] == '1' ? '0' : '1';
    std::string bad = text;
    bad.replace(text.find(row), row.size(), flipped);
    std::istringstream in(bad);
    try {
        read_trial_csv(in);
        FAIL("expected IngestionError");
    } catch (const IngestionError &e) {
        CHECK(e.row() == 2);
    }

    std::istringstream header_only(text.substr(0, text.find('\n') + 1));
    CHECK(read_trial_csv(header_only).empty());
    std::istringstream wrong("index,age\n");
    CHECK_THROWS_AS(read_trial_csv(wrong), IngestionError);
}

TEST_CASE("report json is consistent")
{
    auto cfg = preset_config(1);
    cfg.n_patients = 600;
    auto report = run_replications(cfg, 4, 2);
    auto j = nlohmann::json::parse(report_json(report));
    for (auto &[name, m] : j["methods"].items()) {
        double bias = m["bias"], mse = m["mse"];
        CHECK(bias * bias <= mse + 1e-15);
        CHECK(m["successes"].get<int>() + m["failures"].get<int>() == 4);
        auto q = m["error_quantiles"];
        CHECK(q["q05"].get<double>() <= q["q50"].get<double>());
        CHECK(q["q50"].get<double>() <= q["q95"].get<double>());
    }
    std::ostringstream errors;
    write_errors_csv(errors, report);
    std::istringstream lines(errors.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line))
        ++n;
    CHECK(n == 1 + 4 * kMethods.size());
}

TEST_CASE("events csv")
{
    auto t = trial();
    std::ostringstream out;
    write_events_csv(out, t.events);
    auto text = out.str();
    CHECK(text.rfind("index,kind,old_value,new_value,detail\n", 0) == 0);
    CHECK(text.find(",model,") != std::string::npos);
}
