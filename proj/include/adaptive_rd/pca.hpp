#pragma once

#include <span>

#include "adaptive_rd/linalg.hpp"

namespace adaptive_rd {

struct PcaOptions {
    double variance_threshold = 0.90; // keep the smallest q reaching this share
    int max_components = 10;
    // Total variance at or below this is treated as zero (no components).
    double zero_variance_tolerance = 0.0;
};

struct PcaResult {
    Vector means;              // column means used for centering (m)
    Matrix loadings;           // m x q, orthonormal columns
    Vector eigenvalues;        // all m sample-covariance eigenvalues, non-increasing
    Vector explained_ratio;    // eigenvalues / total, non-increasing
    int retained = 0;

    // Scores of one raw (uncentered) row on the retained components.
    Vector project(std::span<const double> row) const;
};

// PCA of an n x m matrix through the eigendecomposition of its sample covariance.
PcaResult pca(const RowMatrix &data, const PcaOptions &options = {});

} // namespace adaptive_rd
