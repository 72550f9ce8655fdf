#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adaptive_rd/harness.hpp"

namespace adaptive_rd {

// index,age,sex,race,systolic_bp,total_chol,hdl_chol,smoker,diabetes,bp_treated,
// version_id,raw_risk,threshold,shifted_risk,treated,outcome,baseline_risk
void write_trial_csv(std::ostream &out, const std::vector<PatientRecord> &records);
// Throws IngestionError naming the line for malformed or truncated input.
std::vector<PatientRecord> read_trial_csv(std::istream &in);

// index,kind,old_value,new_value,detail
void write_events_csv(std::ostream &out, const std::vector<AdaptationEvent> &events);

// r,beta_hat,se,ci_low,ci_high,mu1,mu0,eff_n_treated,eff_n_untreated
void write_curve_csv(std::ostream &out, const EffectCurve &curve);

std::string summary_json(const TrialData &trial, const Evaluation &evaluation, const TrialFit &fit);
std::string report_json(const ReplicationReport &report);
// replication,seed,method,status,estimate,truth,error,ci_low,ci_high,message
void write_errors_csv(std::ostream &out, const ReplicationReport &report);

void write_text_file(const std::filesystem::path &path, const std::string &text);
std::string read_text_file(const std::filesystem::path &path);

} // namespace adaptive_rd
