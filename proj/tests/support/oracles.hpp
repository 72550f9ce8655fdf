#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's spline, GLM or kernel code.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

enum class Link { identity, logit, cloglog };

inline double quantile7(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    double h = (v.size() - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

// Natural cubic spline in the truncated-power form: x, then d_k - d_{K-1}.
struct NaturalSpline {
    std::vector<double> knots; // boundary knots included, ascending

    static NaturalSpline from_values(const std::vector<double> &x, int df)
    {
        NaturalSpline s;
        for (int k = 0; k <= df; ++k)
            s.knots.push_back(quantile7(x, double(k) / df));
        return s;
    }

    std::vector<double> row(double x) const
    {
        const std::size_t K = knots.size();
        auto cube = [](double v) { return v > 0 ? v * v * v : 0.0; };
        auto d = [&](std::size_t k) {
            return (cube(x - knots[k]) - cube(x - knots[K - 1])) / (knots[K - 1] - knots[k]);
        };
        std::vector<double> out{x};
        for (std::size_t k = 0; k + 2 < K; ++k)
            out.push_back(d(k) - d(K - 2));
        return out;
    }
};

inline double inv_link(Link l, double eta)
{
    switch (l) {
        case Link::identity: return eta;
        case Link::logit: return 1.0 / (1.0 + std::exp(-eta));
        case Link::cloglog: return 1.0 - std::exp(-std::exp(eta));
    }
    return eta;
}

inline double dmu(Link l, double eta)
{
    switch (l) {
        case Link::identity: return 1.0;
        case Link::logit: {
            double m = inv_link(l, eta);
            return m * (1 - m);
        }
        case Link::cloglog: return std::exp(eta - std::exp(eta));
    }
    return 1.0;
}

// Plain Fisher scoring from a zero start.
inline Eigen::VectorXd fit(Link link, const Eigen::MatrixXd &X, const Eigen::VectorXd &y)
{
    if (link == Link::identity)
        return X.colPivHouseholderQr().solve(y);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd eta = X * b;
        Eigen::VectorXd w(X.rows()), z(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            double m = inv_link(link, eta(i)), g = dmu(link, eta(i));
            double var = std::max(m * (1 - m), 1e-300);
            w(i) = g * g / var;
            z(i) = eta(i) + (y(i) - m) / g;
        }
        Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
        Eigen::VectorXd next = xtwx.ldlt().solve(X.transpose() * w.asDiagonal() * z);
        double step = (next - b).cwiseAbs().maxCoeff();
        b = next;
        if (step < 1e-12 * (1.0 + b.cwiseAbs().maxCoeff()))
            return b;
    }
    throw std::runtime_error("oracle fit did not converge");
}

// Kernel RD with one spline regression per arm on a single running variable.
struct StaticRd {
    std::vector<double> mu0, mu1;
    std::vector<double> running;
    double h = 0.02;

    StaticRd(const std::vector<double> &f, const std::vector<char> &a, const std::vector<double> &y, Link link,
             int df, double bandwidth)
        : mu0(f.size()), mu1(f.size()), running(f), h(bandwidth)
    {
        for (int arm = 0; arm < 2; ++arm) {
            std::vector<double> xs, ys;
            for (std::size_t k = 0; k < f.size(); ++k)
                if ((a[k] != 0) == (arm == 1)) {
                    xs.push_back(f[k]);
                    ys.push_back(y[k]);
                }
            auto spline = NaturalSpline::from_values(xs, df);
            auto design_row = [&](double x) {
                auto r = spline.row(x);
                r.insert(r.begin(), 1.0);
                return r;
            };
            Eigen::MatrixXd X(xs.size(), df + 1);
            Eigen::VectorXd Y(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) {
                auto r = design_row(xs[i]);
                for (int j = 0; j <= df; ++j)
                    X(i, j) = r[j];
                Y(i) = ys[i];
            }
            Eigen::VectorXd b = fit(link, X, Y);
            for (std::size_t k = 0; k < f.size(); ++k) {
                auto r = design_row(f[k]);
                double eta = 0.0;
                for (int j = 0; j <= df; ++j)
                    eta += r[j] * b(j);
                (arm ? mu1 : mu0)[k] = inv_link(link, eta);
            }
        }
    }

    double effect(double r) const
    {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < running.size(); ++k) {
            double u = (running[k] - r) / h;
            double w = std::exp(-0.5 * u * u);
            num += w * (mu1[k] - mu0[k]);
            den += w;
        }
        return num / den;
    }
};

} // namespace oracle
