#include <doctest.h>

#include <json.hpp>
#include <string>
#include <vector>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/io.hpp"
#include "adaptive_rd/scenario.hpp"

using namespace adaptive_rd;
using nlohmann::json;

namespace {

json preset_json(int s)
{
    return json::parse(read_text_file(preset_directory() / ("scenario" + std::to_string(s) + ".json")));
}

bool rejected(const json &doc)
{
    try {
        parse_scenario_config(doc.dump());
        return false;
    } catch (const ConfigError &) {
        return true;
    }
}

} // namespace

TEST_CASE("bundled presets equal the built-in definitions")
{
    for (int s = 1; s <= 5; ++s) {
        auto file = load_scenario_config(preset_directory() / ("scenario" + std::to_string(s) + ".json"));
        CHECK(to_json(file) == to_json(preset_config(s)));
        CHECK(file.n_patients == 3000);
        CHECK(file.warmup == 400);
        CHECK(file.update_every == 100);
        CHECK(file.initial_threshold == 0.10);
    }
    CHECK(std::get<RateTarget>(preset_config(1).threshold_strategy).rate == 0.30);
    auto nnt = std::get<NntTarget>(preset_config(3).threshold_strategy);
    CHECK(nnt.nnt == 3.0);
    CHECK(nnt.smoothing == 0.5);
    CHECK(std::holds_alternative<Recalibrate>(preset_config(4).model_strategy));
    CHECK(std::holds_alternative<Revise>(preset_config(5).model_strategy));
    CHECK_THROWS_AS(preset_config(6), ConfigError);
}

TEST_CASE("to_json round trips")
{
    for (int s = 1; s <= 5; ++s) {
        auto cfg = preset_config(s);
        CHECK(to_json(parse_scenario_config(to_json(cfg))) == to_json(cfg));
    }
}

TEST_CASE("every range-constrained field rejects an out-of-range value")
{
    struct Mutation {
        int scenario;
        json::json_pointer path;
        json value;
    };
    const std::vector<Mutation> cases = {
        {1, json::json_pointer("/scenario"), 9},
        {1, json::json_pointer("/scenario"), 0},
        {1, json::json_pointer("/n_patients"), 0},
        {1, json::json_pointer("/warmup"), 0},
        {1, json::json_pointer("/update_every"), 0},
        {1, json::json_pointer("/initial_threshold"), 1.5},
        {1, json::json_pointer("/initial_threshold"), 0.0},
        {1, json::json_pointer("/seed"), -1},
        {1, json::json_pointer("/outcome/variant"), "blood"},
        {1, json::json_pointer("/threshold_strategy/rate"), 1.2},
        {1, json::json_pointer("/threshold_strategy/rate"), 0.0},
        {1, json::json_pointer("/threshold_strategy/kind"), "nnt_target"},
        {2, json::json_pointer("/outcome/params/sigma"), -5.0},
        {2, json::json_pointer("/estimator/family"), "logit"},
        {3, json::json_pointer("/threshold_strategy/nnt"), 0.5},
        {3, json::json_pointer("/threshold_strategy/smoothing"), 1.5},
        {4, json::json_pointer("/model_strategy/shrink_n0"), -1.0},
        {4, json::json_pointer("/model_strategy/kind"), "revise"},
        {5, json::json_pointer("/model_strategy/kind"), "none"},
        {4, json::json_pointer("/threshold_strategy/c"), 2.0},
        {4, json::json_pointer("/estimator/spline_df"), 0},
        {4, json::json_pointer("/estimator/pca_variance"), 1.5},
        {4, json::json_pointer("/estimator/bandwidth"), 0.0},
        {4, json::json_pointer("/estimator/confidence"), 1.0},
        {4, json::json_pointer("/estimator/family"), "probit"},
        {1, json::json_pointer("/cohort/source"), "database"},
        {1, json::json_pointer("/outcome/params/alpha2"), "big"},
    };
    for (const auto &m : cases) {
        auto doc = preset_json(m.scenario);
        CHECK_FALSE(rejected(doc));
        doc[m.path] = m.value;
        INFO("scenario " << m.scenario << " " << m.path.to_string() << " = " << m.value.dump());
        CHECK(rejected(doc));
    }
}

TEST_CASE("every numeric leaf of every preset rejects a wrong type")
{
    for (int s = 1; s <= 5; ++s) {
        auto doc = preset_json(s);
        auto flat = doc.flatten();
        for (auto it = flat.begin(); it != flat.end(); ++it) {
            if (!it.value().is_number())
                continue;
            auto bad = flat;
            bad[it.key()] = "not a number";
            INFO("scenario " << s << " " << it.key());
            CHECK(rejected(bad.unflatten()));
        }
    }
}

TEST_CASE("strict schema")
{
    auto doc = preset_json(2);
    doc["colour"] = "blue";
    try {
        parse_scenario_config(doc.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("colour") != std::string::npos);
    }
    doc = preset_json(2);
    doc["estimator"]["kernel"] = "epanechnikov";
    CHECK(rejected(doc));

    doc = preset_json(1);
    doc["scenario"] = 9;
    try {
        parse_scenario_config(doc.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("scenario") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario_config("{ not json"), ConfigError);
}

TEST_CASE("dotted overrides")
{
    auto text = preset_json(1).dump();
    auto cfg = parse_scenario_config(text, {"n_patients=200", "estimator.bandwidth=0.03", "seed=44"});
    CHECK(cfg.n_patients == 200);
    CHECK(cfg.estimator.bandwidth == 0.03);
    CHECK(cfg.seed == 44);
    auto nnt = parse_scenario_config(preset_json(3).dump(), {"threshold_strategy.smoothing=0.25"});
    CHECK(std::get<NntTarget>(nnt.threshold_strategy).smoothing == 0.25);
    CHECK_THROWS_AS(parse_scenario_config(text, {"n_patients"}), ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(text, {"nope.deeper=1"}), ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(text, {"n_patients=-3"}), ConfigError);
}

TEST_CASE("curve grid")
{
    CurveGrid g;
    CHECK(g.points().size() == 41);
    auto c = parse_grid("-0.1:0.1:0.01");
    auto pts = c.points();
    REQUIRE(pts.size() == 21);
    CHECK(pts.front() == -0.1);
    CHECK(pts.back() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(parse_grid("0.1:-0.1:0.01"), ConfigError);
    CHECK_THROWS_AS(parse_grid("a:b:c"), ConfigError);
    CHECK_THROWS_AS(parse_grid("0:1"), ConfigError);
    CHECK(parse_grid("0:0:0.1").points().size() == 1);
}
