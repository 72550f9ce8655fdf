#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

#include "adaptive_rd/rng.hpp"

namespace adaptive_rd {

// P(Y=1) = alpha1 r + alpha2 a (r + 0.5)(1 - r): largest effect (alpha2 * 9/16) at r = 0.25.
struct AttendanceParams {
    double alpha1 = 0.10;
    double alpha2 = 0.25 * 16.0 / 9.0;
};

// E[Y] = beta1 + beta2 a r, Y ~ Normal(E[Y], sigma). Change in total cholesterol, mg/dL.
struct CholesterolParams {
    double beta1 = 2.0;
    double beta2 = -10.0;
    double sigma = 5.0;
};

// P(Y=1) = icloglog(gamma1 + gamma2 cloglog(r) + gamma3 a). (0, 1, 0) reproduces r.
struct AscvdParams {
    double gamma1 = 0.1;
    double gamma2 = 0.9;
    double gamma3 = 0.4;
};

using OutcomeParams = std::variant<AttendanceParams, CholesterolParams, AscvdParams>;

enum class OutcomeKind { binary, continuous };

std::string_view variant_name(const OutcomeParams &params);

// Counts probabilities that had to be clamped into [0, 1].
struct ClampCounter {
    std::size_t events = 0;
};

class OutcomeModel {
  public:
    // Validates the parameters. Attendance parameters whose probabilities leave
    // [0,1] somewhere on a grid are accepted and flagged (draws are clamped).
    explicit OutcomeModel(OutcomeParams params);

    const OutcomeParams &params() const { return params_; }
    OutcomeKind kind() const { return kind_; }
    bool clamps_on_grid() const { return clamps_on_grid_; }

    // Conditional mean of Y given baseline risk r̄ (original model) and arm a.
    double mean(double baseline_risk, bool treated, ClampCounter *clamps = nullptr) const;
    double sigma() const; // 0 for binary outcomes

  private:
    OutcomeParams params_;
    OutcomeKind kind_;
    bool clamps_on_grid_ = false;
};

double attendance_prob(double baseline_risk, bool treated, const AttendanceParams &p, ClampCounter *clamps = nullptr);
double cholesterol_mean(double baseline_risk, bool treated, const CholesterolParams &p);
double ascvd_prob(double baseline_risk, bool treated, const AscvdParams &p);

double draw_outcome(const OutcomeModel &model, double baseline_risk, bool treated, const SeedStream &stream,
                    ClampCounter *clamps = nullptr);

// E[Y(1) - Y(0) | r̄]
double true_local_ate(const OutcomeModel &model, double baseline_risk);

// Kernel-weighted average of true_local_ate over a cohort. Weights come from
// `weighting_values` (the focal shifted risks) around `r`.
double true_smoothed_ate(const OutcomeModel &model, std::span<const double> baseline_risks,
                         std::span<const double> weighting_values, double r, double bandwidth);
// Same smoothing applied to one arm's conditional mean.
double true_smoothed_mean(const OutcomeModel &model, std::span<const double> baseline_risks,
                          std::span<const double> weighting_values, double r, double bandwidth, bool treated);

} // namespace adaptive_rd
