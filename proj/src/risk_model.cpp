#include "adaptive_rd/risk_model.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "adaptive_rd/error.hpp"
#include "text_util.hpp"

namespace adaptive_rd {

std::string_view to_string(Provenance p)
{
    switch (p) {
        case Provenance::original: return "original";
        case Provenance::recalibrated: return "recalibrated";
        case Provenance::revised: return "revised";
    }
    return "original";
}

std::array<double, kUnstratifiedTermCount> unstratified_terms(const PatientCovariates &pc)
{
    std::array<double, kUnstratifiedTermCount> out{};
    out[0] = 1.0;
    const auto t = pce_terms(pc);
    for (std::size_t i = 0; i < kPceTermCount; ++i)
        out[i + 1] = t[i];
    return out;
}

RiskModelVersion original_pce_model(const PceCoefficientSet &coeffs)
{
    validate(coeffs);
    return RiskModelVersion{0, PceStratified{coeffs, Calibration{}}, Provenance::original};
}

double predict_risk(const RiskModelVersion &model, const PatientCovariates &pc)
{
    if (const auto *pce = std::get_if<PceStratified>(&model.kind)) {
        const auto &grp = pce->coefficients[resolve_subgroup(pc)];
        const double risk = pce_risk(pce_linear_predictor(pc, pce->coefficients), grp.s0, grp.lp_bar);
        if (pce->calibration.is_identity())
            return risk;
        const double eta = pce->calibration.intercept + pce->calibration.slope * cloglog(risk);
        return clamp_risk(inverse_cloglog(eta));
    }
    const auto &glm = std::get<GlmUnstratified>(model.kind);
    const auto terms = unstratified_terms(pc);
    double eta = 0.0;
    for (std::size_t i = 0; i < kUnstratifiedTermCount; ++i)
        eta += glm.coefficients[i] * terms[i];
    return clamp_risk(inverse_cloglog(eta));
}

bool assign_treatment(double shifted_risk)
{
    if (!std::isfinite(shifted_risk))
        throw DomainError("assign_treatment: shifted risk must be finite");
    return shifted_risk >= 0.0;
}

const RiskModelVersion &ModelHistory::model_for(std::size_t patient) const
{
    return versions.at(static_cast<std::size_t>(entries.at(patient).version_id));
}

void ModelHistory::validate() const
{
    for (std::size_t v = 0; v < versions.size(); ++v)
        if (versions[v].version_id != static_cast<int>(v))
            throw ShapeError("model history: version ids must equal their position");
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const auto &e = entries[j];
        if (e.version_id < 0 || static_cast<std::size_t>(e.version_id) >= versions.size())
            throw ShapeError("model history: unknown version id at patient " + std::to_string(j + 1));
        if (!(e.threshold > 0.0 && e.threshold < 1.0))
            throw ShapeError("model history: threshold outside (0,1) at patient " + std::to_string(j + 1));
    }
}

CounterfactualRiskMatrix::CounterfactualRiskMatrix(std::vector<CounterfactualColumn> columns,
                                                   std::vector<std::size_t> column_of)
    : columns_(std::move(columns)), column_of_(std::move(column_of))
{
    for (std::size_t c : column_of_)
        if (c >= columns_.size())
            throw ShapeError("counterfactual matrix: column index out of range");
    for (const auto &col : columns_)
        if (col.raw.size() != column_of_.size() || col.shifted.size() != column_of_.size())
            throw ShapeError("counterfactual matrix: column length does not match patient count");
}

namespace {

struct ColumnKey {
    int version_id;
    std::uint64_t threshold_bits;
    auto operator<=>(const ColumnKey &) const = default;
};

ColumnKey key_of(const HistoryEntry &e) { return {e.version_id, std::bit_cast<std::uint64_t>(e.threshold)}; }

template <typename RawFor>
CounterfactualRiskMatrix assemble(const ModelHistory &history, std::size_t n, RawFor &&raw_for)
{
    if (history.entries.size() < n)
        throw ShapeError("counterfactual matrix: history shorter than patient sequence");
    std::map<ColumnKey, std::size_t> index;
    std::vector<CounterfactualColumn> columns;
    std::vector<std::size_t> column_of(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto &e = history.entries[j];
        auto [it, inserted] = index.try_emplace(key_of(e), columns.size());
        if (inserted) {
            CounterfactualColumn col;
            col.version_id = e.version_id;
            col.threshold = e.threshold;
            col.raw = raw_for(e.version_id);
            col.shifted.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                col.shifted[k] = col.raw[k] - e.threshold;
            columns.push_back(std::move(col));
        }
        column_of[j] = it->second;
        ++columns[it->second].multiplicity;
    }
    return CounterfactualRiskMatrix(std::move(columns), std::move(column_of));
}

} // namespace

CounterfactualRiskMatrix build_counterfactual_matrix(const ModelHistory &history,
                                                     std::span<const PatientCovariates> patients)
{
    history.validate();
    const std::size_t n = patients.size();
    std::map<int, std::vector<double>> cache;
    return assemble(history, n, [&](int version) {
        auto [it, inserted] = cache.try_emplace(version);
        if (inserted) {
            const auto &model = history.versions.at(static_cast<std::size_t>(version));
            it->second.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                it->second[k] = predict_risk(model, patients[k]);
        }
        return it->second;
    });
}

CounterfactualRiskMatrix build_counterfactual_matrix(const ModelHistory &history,
                                                     const std::map<int, std::vector<double>> &raw_by_version,
                                                     std::size_t patients)
{
    return assemble(history, patients, [&](int version) {
        const auto &all = raw_by_version.at(version);
        if (all.size() < patients)
            throw ShapeError("counterfactual matrix: cached risks shorter than patient prefix");
        return std::vector<double>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(patients));
    });
}

void write_matrix_csv(std::ostream &out, const CounterfactualRiskMatrix &matrix)
{
    out << "patient_index,version_id,threshold,raw_risk,shifted_risk\n";
    for (const auto &col : matrix.columns()) {
        const std::string thr = detail::format_double(col.threshold);
        for (std::size_t k = 0; k < matrix.patients(); ++k)
            out << (k + 1) << ',' << col.version_id << ',' << thr << ',' << detail::format_double(col.raw[k])
                << ',' << detail::format_double(col.shifted[k]) << '\n';
    }
}

CounterfactualRiskMatrix read_matrix_csv(std::istream &in, const std::vector<HistoryEntry> &entries)
{
    const std::size_t n = entries.size();
    std::string line;
    if (!std::getline(in, line) ||
        detail::trim(line) != "patient_index,version_id,threshold,raw_risk,shifted_risk")
        throw IngestionError("matrix csv: bad or missing header, line 1", 1, "header");

    std::map<ColumnKey, CounterfactualColumn> by_key;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        auto f = detail::split_csv_line(line);
        auto where = [&](const char *field) {
            return std::string(field) + ", line " + std::to_string(line_no);
        };
        if (in.eof())
            throw IngestionError("matrix csv: truncated line, " + where("row"), line_no, "row");
        if (f.size() != 5)
            throw IngestionError("matrix csv: expected 5 fields, " + where("row"), line_no, "row");
        auto idx = detail::parse_int(f[0]);
        auto ver = detail::parse_int(f[1]);
        auto thr = detail::parse_double(f[2]);
        auto raw = detail::parse_double(f[3]);
        auto sh = detail::parse_double(f[4]);
        if (!idx || *idx < 1 || static_cast<std::size_t>(*idx) > n)
            throw IngestionError("matrix csv: bad patient_index, " + where("patient_index"), line_no,
                                 "patient_index");
        if (!ver)
            throw IngestionError("matrix csv: bad version_id, " + where("version_id"), line_no, "version_id");
        if (!thr)
            throw IngestionError("matrix csv: bad threshold, " + where("threshold"), line_no, "threshold");
        if (!raw)
            throw IngestionError("matrix csv: bad raw_risk, " + where("raw_risk"), line_no, "raw_risk");
        if (!sh)
            throw IngestionError("matrix csv: bad shifted_risk, " + where("shifted_risk"), line_no,
                                 "shifted_risk");
        ColumnKey key{static_cast<int>(*ver), std::bit_cast<std::uint64_t>(*thr)};
        auto &col = by_key[key];
        if (col.raw.empty()) {
            col.version_id = key.version_id;
            col.threshold = *thr;
            col.raw.assign(n, std::nan(""));
            col.shifted.assign(n, std::nan(""));
        }
        col.raw[static_cast<std::size_t>(*idx - 1)] = *raw;
        col.shifted[static_cast<std::size_t>(*idx - 1)] = *sh;
    }

    std::map<ColumnKey, std::size_t> order;
    std::vector<CounterfactualColumn> columns;
    std::vector<std::size_t> column_of(n);
    for (std::size_t j = 0; j < n; ++j) {
        const ColumnKey key = key_of(entries[j]);
        auto [it, inserted] = order.try_emplace(key, columns.size());
        if (inserted) {
            auto found = by_key.find(key);
            if (found == by_key.end())
                throw IngestionError("matrix csv: no column for version " + std::to_string(key.version_id) +
                                         " used by patient " + std::to_string(j + 1),
                                     line_no, "version_id");
            for (std::size_t k = 0; k < n; ++k)
                if (std::isnan(found->second.raw[k]))
                    throw IngestionError("matrix csv: column for version " + std::to_string(key.version_id) +
                                             " missing patient " + std::to_string(k + 1),
                                         line_no, "patient_index");
            columns.push_back(std::move(found->second));
            columns.back().multiplicity = 0;
        }
        column_of[j] = it->second;
        ++columns[it->second].multiplicity;
    }
    return CounterfactualRiskMatrix(std::move(columns), std::move(column_of));
}

} // namespace adaptive_rd
