#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "transmean/core.hpp"
#include "transmean/normal.hpp"
#include "transmean/rng.hpp"

namespace transmean::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Philox& rng) {
    std::normal_distribution<double> z;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    }
    return m;
}

inline DataStack gaussian_stack(std::size_t n, Eigen::Index r, Eigen::Index c, Philox& rng, const Matrix* mean = nullptr) {
    std::vector<Matrix> xs;
    for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(gaussian(r, c, rng));
        if (mean) xs.back() += *mean;
    }
    return DataStack(std::move(xs));
}

/// Haar-ish random orthogonal matrix from a QR factorization.
inline Matrix random_orthogonal(Eigen::Index n, Philox& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR();
    for (Eigen::Index k = 0; k < n; ++k) {
        if (r(k, k) < 0) q.col(k) *= -1.0;
    }
    return q;
}

inline double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Asymptotic Kolmogorov tail P(sqrt(n) D > lambda) with Stephens' small-n
/// correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double kolmogorov_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sided one-sample KS statistic against N(0, 1).
inline double ks_statistic_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace transmean::testing
