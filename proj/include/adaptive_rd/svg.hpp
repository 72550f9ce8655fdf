#pragma once

#include <string>

#include "adaptive_rd/estimator.hpp"
#include "adaptive_rd/harness.hpp"

namespace adaptive_rd {

// Effect curve with its confidence band plus the two arm-mean curves.
std::string curve_svg(const EffectCurve &curve, const std::string &title);

// One box per method: 5/25/50/75/95% error quantiles, zero line for reference.
std::string error_boxplot_svg(const ReplicationReport &report, const std::string &title);

} // namespace adaptive_rd
