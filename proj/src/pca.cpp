#include "adaptive_rd/pca.hpp"

#include <algorithm>
#include <cmath>

#include "adaptive_rd/error.hpp"
#include "adaptive_rd/simd.hpp"

namespace adaptive_rd {

Vector PcaResult::project(std::span<const double> row) const
{
    if (row.size() != static_cast<std::size_t>(means.size()))
        throw ShapeError("pca projection: row length does not match the fitted columns");
    Vector centered(means.size());
    for (Eigen::Index j = 0; j < means.size(); ++j)
        centered[j] = row[static_cast<std::size_t>(j)] - means[j];
    return loadings.transpose() * centered;
}

PcaResult pca(const RowMatrix &data, const PcaOptions &options)
{
    const Eigen::Index n = data.rows();
    const Eigen::Index m = data.cols();
    if (n < 2)
        throw InsufficientDataError("pca: need at least 2 rows");
    if (!(options.variance_threshold > 0.0 && options.variance_threshold <= 1.0))
        throw DomainError("pca: variance threshold must lie in (0,1]");

    PcaResult out;
    out.means = data.colwise().mean().transpose();
    if (m == 0) {
        out.loadings = Matrix(0, 0);
        out.eigenvalues = Vector(0);
        out.explained_ratio = Vector(0);
        return out;
    }

    RowMatrix centered = data.rowwise() - out.means.transpose();
    Matrix cov(m, m);
    simd::kernels().weighted_gram(centered.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(m),
                                  nullptr, cov.data());
    cov /= static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericError("pca: eigendecomposition failed");
    // ascending -> descending
    Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
    Matrix vectors = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index c = 0; c < m; ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0)
            vectors.col(c) *= -1.0;
    }

    const double total = values.sum();
    out.eigenvalues = values;
    if (!(total > options.zero_variance_tolerance) || !(total > 0.0)) {
        out.explained_ratio = Vector::Zero(m);
        out.loadings = Matrix(m, 0);
        return out;
    }
    out.explained_ratio = values / total;

    const int cap = static_cast<int>(std::min<Eigen::Index>(m, options.max_components));
    int q = 0;
    double cum = 0.0;
    while (q < cap && cum < options.variance_threshold * (1.0 - 1e-12)) {
        cum += out.explained_ratio[q];
        ++q;
    }
    out.retained = q;
    out.loadings = vectors.leftCols(q);
    return out;
}

} // namespace adaptive_rd
