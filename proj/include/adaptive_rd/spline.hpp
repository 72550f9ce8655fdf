#pragma once

#include <span>
#include <vector>

#include "adaptive_rd/linalg.hpp"

namespace adaptive_rd {

// Natural cubic spline basis without intercept: `df` columns, cubic between the
// boundary knots and linear outside them.
struct SplineBasis {
    std::vector<double> interior_knots; // strictly increasing, inside the boundary
    double lower = 0.0;
    double upper = 1.0;
    int df = 1; // == interior_knots.size() + 1

    void validate() const;
};

// Empirical quantile with linear interpolation between order statistics
// (the "type 7" rule). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);

// Boundary knots at min/max, df-1 interior knots at the k/df quantiles.
// Throws DegenerateSupportError when values has fewer than df+2 distinct points.
SplineBasis choose_knots(std::span<const double> values, int df);

// |x| x df basis matrix.
RowMatrix natural_cubic_basis(std::span<const double> x, const SplineBasis &basis);
// Writes one basis row (df values) for a single point.
void natural_cubic_basis_row(double x, const SplineBasis &basis, std::span<double> out);

} // namespace adaptive_rd
