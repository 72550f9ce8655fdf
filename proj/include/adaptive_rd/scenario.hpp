#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adaptive_rd/adaptation.hpp"
#include "adaptive_rd/cohort.hpp"
#include "adaptive_rd/estimator.hpp"
#include "adaptive_rd/outcomes.hpp"

namespace adaptive_rd {

struct CohortSource {
    enum class Kind { synthetic, csv } kind = Kind::synthetic;
    SyntheticCohortParams params;
    // csv: patients are resampled uniformly with replacement from these rows.
    std::filesystem::path path;
};

struct CurveGrid {
    double lo = -0.10;
    double hi = 0.10;
    double step = 0.005;

    std::vector<double> points() const;
    void validate() const;
};

// Parses "lo:hi:step".
CurveGrid parse_grid(const std::string &text);

struct ScenarioConfig {
    int scenario = 1;
    std::size_t n_patients = 3000;
    int warmup = 400;
    int update_every = 100;
    double initial_threshold = 0.10;
    std::uint64_t seed = 1;

    CohortSource cohort;
    OutcomeParams outcome = AttendanceParams{};
    ThresholdStrategy threshold_strategy = RateTarget{};
    ModelUpdateStrategy model_strategy = NoModelUpdate{};
    EstimatorConfig estimator;
    CurveGrid curve_grid;
    std::optional<std::filesystem::path> pce_coefficients;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Strict parse: unknown keys, wrong types and out-of-range values are errors.
ScenarioConfig parse_scenario_config(const std::string &json_text,
                                     const std::vector<std::string> &overrides = {});
ScenarioConfig load_scenario_config(const std::filesystem::path &path,
                                    const std::vector<std::string> &overrides = {});
std::string to_json(const ScenarioConfig &config);

// Built-in definitions of scenarios 1-5 (n = 3000, warm-up 400, updates every 100).
ScenarioConfig preset_config(int scenario);

// Directory holding the bundled scenarioN.json files.
std::filesystem::path preset_directory();

} // namespace adaptive_rd
