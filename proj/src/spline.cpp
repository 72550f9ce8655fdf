#include "adaptive_rd/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptive_rd/error.hpp"

namespace adaptive_rd {

void SplineBasis::validate() const
{
    if (df < 1)
        throw DomainError("spline basis: df must be at least 1");
    if (static_cast<int>(interior_knots.size()) != df - 1)
        throw ShapeError("spline basis: expected df-1 interior knots");
    if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper))
        throw DomainError("spline basis: boundary knots must be finite and increasing");
    double prev = lower;
    for (double k : interior_knots) {
        if (!(k > prev))
            throw DomainError("spline basis: knots must be strictly increasing inside the boundary");
        prev = k;
    }
    if (!(upper > prev))
        throw DomainError("spline basis: knots must be strictly increasing inside the boundary");
}

double quantile_sorted(std::span<const double> sorted, double prob)
{
    if (sorted.empty())
        throw InsufficientDataError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SplineBasis choose_knots(std::span<const double> values, int df)
{
    if (df < 1)
        throw DomainError("choose_knots: df must be at least 1");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
    if (distinct < df + 2)
        throw DegenerateSupportError("choose_knots: need at least " + std::to_string(df + 2) +
                                     " distinct values, got " + std::to_string(distinct));
    sorted.assign(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    SplineBasis basis;
    basis.df = df;
    basis.lower = sorted.front();
    basis.upper = sorted.back();
    for (int k = 1; k < df; ++k)
        basis.interior_knots.push_back(quantile_sorted(sorted, static_cast<double>(k) / df));
    // ties in the data can make quantile knots coincide; nudge them apart
    for (std::size_t k = 0; k < basis.interior_knots.size(); ++k) {
        double prev = k == 0 ? basis.lower : basis.interior_knots[k - 1];
        if (!(basis.interior_knots[k] > prev))
            basis.interior_knots[k] = std::nextafter(prev, basis.upper);
    }
    basis.validate();
    return basis;
}

namespace {

inline double cube_plus(double v) { return v > 0.0 ? v * v * v : 0.0; }

} // namespace

// Truncated-power form of the natural spline on the rescaled axis
// u = (x - lower) / (upper - lower): N_1 = u and, for interior knot k,
// N_{k+1} = d_k(u) - d_K(u) with d_k(u) = ((u-ξ_k)^3_+ - (u-ξ_K)^3_+) / (ξ_K - ξ_k),
// where ξ_K = 1 is the upper boundary and d_K uses the last interior knot.
// Every column is linear for u <= 0 and u >= 1.
void natural_cubic_basis_row(double x, const SplineBasis &basis, std::span<double> out)
{
    const double span = basis.upper - basis.lower;
    const double u = (x - basis.lower) / span;
    out[0] = u;
    const std::size_t m = basis.interior_knots.size();
    if (m == 0)
        return;
    // knots on the unit scale; the lower boundary contributes no truncated term
    auto knot = [&](std::size_t k) { return (basis.interior_knots[k] - basis.lower) / span; };
    auto d = [&](double xi) { return (cube_plus(u - xi) - cube_plus(u - 1.0)) / (1.0 - xi); };
    // Use the lower boundary (ξ = 0) plus interior knots as the K-1 free knots;
    // the last one defines the subtracted term.
    const double last = knot(m - 1);
    const double d_last = d(last);
    // first truncated function anchored at the lower boundary
    out[1] = d(0.0) - d_last;
    for (std::size_t k = 0; k + 1 < m; ++k)
        out[k + 2] = d(knot(k)) - d_last;
}

RowMatrix natural_cubic_basis(std::span<const double> x, const SplineBasis &basis)
{
    basis.validate();
    RowMatrix out(static_cast<Eigen::Index>(x.size()), basis.df);
    for (std::size_t i = 0; i < x.size(); ++i)
        natural_cubic_basis_row(x[i], basis, std::span<double>(out.row(static_cast<Eigen::Index>(i)).data(),
                                                               static_cast<std::size_t>(basis.df)));
    return out;
}

} // namespace adaptive_rd
