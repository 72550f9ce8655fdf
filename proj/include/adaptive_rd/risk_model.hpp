#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "adaptive_rd/cohort.hpp"
#include "adaptive_rd/pce.hpp"

namespace adaptive_rd {

// Calibration map applied on the complementary log-log scale:
// risk = icloglog(intercept + slope * cloglog(pce_risk)).
struct Calibration {
    double intercept = 0.0;
    double slope = 1.0;

    bool is_identity() const { return intercept == 0.0 && slope == 1.0; }
};

struct PceStratified {
    PceCoefficientSet coefficients;
    Calibration calibration;
};

// Terms of the unstratified revision model: intercept followed by the 13 PCE
// transforms. Sex and race do not enter.
inline constexpr std::size_t kUnstratifiedTermCount = 1 + kPceTermCount;
std::array<double, kUnstratifiedTermCount> unstratified_terms(const PatientCovariates &pc);

struct GlmUnstratified {
    std::array<double, kUnstratifiedTermCount> coefficients{};
    // Fitted alongside the risk terms but not used for prediction: predicted
    // risk is the untreated risk.
    double treatment_coefficient = 0.0;
};

enum class Provenance { original, recalibrated, revised };
std::string_view to_string(Provenance p);

struct RiskModelVersion {
    int version_id = 0;
    std::variant<PceStratified, GlmUnstratified> kind;
    Provenance provenance = Provenance::original;
};

RiskModelVersion original_pce_model(const PceCoefficientSet &coeffs = published_pce_coefficients());

// Probability in [1e-12, 1 - 1e-12].
double predict_risk(const RiskModelVersion &model, const PatientCovariates &pc);

// 1 iff shifted_risk >= 0. Throws DomainError for non-finite input.
bool assign_treatment(double shifted_risk);

struct HistoryEntry {
    int version_id = 0;
    double threshold = 0.1;
};

// Model and threshold in force for each patient, 1..i without gaps.
struct ModelHistory {
    std::vector<RiskModelVersion> versions; // indexed by version_id
    std::vector<HistoryEntry> entries;      // one per patient

    const RiskModelVersion &model_for(std::size_t patient) const;
    void validate() const;
};

struct CounterfactualColumn {
    int version_id = 0;
    double threshold = 0.0;
    std::vector<double> raw;     // risk of every patient k under this model
    std::vector<double> shifted; // raw - threshold
    std::size_t multiplicity = 0; // number of patients j that used this (model, threshold)
};

// r̄[k][j] = risk of patient k under the model of patient j, minus C_j.
// Columns are stored once per distinct (version, threshold) pair.
class CounterfactualRiskMatrix {
  public:
    CounterfactualRiskMatrix() = default;
    CounterfactualRiskMatrix(std::vector<CounterfactualColumn> columns, std::vector<std::size_t> column_of);

    std::size_t patients() const { return column_of_.size(); }
    std::size_t distinct_columns() const { return columns_.size(); }
    const CounterfactualColumn &column(std::size_t c) const { return columns_[c]; }
    const std::vector<CounterfactualColumn> &columns() const { return columns_; }
    std::size_t column_of(std::size_t j) const { return column_of_[j]; }
    const std::vector<std::size_t> &column_map() const { return column_of_; }

    double shifted(std::size_t k, std::size_t j) const { return columns_[column_of_[j]].shifted[k]; }
    double raw(std::size_t k, std::size_t j) const { return columns_[column_of_[j]].raw[k]; }

    // Column of the last patient: the model/threshold the estimate is anchored to.
    std::size_t focal_column() const { return column_of_.back(); }
    std::span<const double> focal_shifted() const { return columns_[focal_column()].shifted; }

  private:
    std::vector<CounterfactualColumn> columns_;
    std::vector<std::size_t> column_of_;
};

CounterfactualRiskMatrix build_counterfactual_matrix(const ModelHistory &history,
                                                     std::span<const PatientCovariates> patients);

// Same matrix from per-version raw risks already computed for the first
// `patients` rows (used by the trial loop, which maintains them incrementally).
CounterfactualRiskMatrix build_counterfactual_matrix(const ModelHistory &history,
                                                     const std::map<int, std::vector<double>> &raw_by_version,
                                                     std::size_t patients);

// Long format: patient_index,version_id,threshold,raw_risk,shifted_risk
// (one row per patient per distinct column, patient_index 1-based).
void write_matrix_csv(std::ostream &out, const CounterfactualRiskMatrix &matrix);
// Inverse of write_matrix_csv given the per-patient history entries.
CounterfactualRiskMatrix read_matrix_csv(std::istream &in, const std::vector<HistoryEntry> &entries);

} // namespace adaptive_rd
