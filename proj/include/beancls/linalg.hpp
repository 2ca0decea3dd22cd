#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Eigenvalues sorted descending; eigenvector k lives in column k and the
/// columns are orthonormal.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Population covariance (divide by n) of the column-centered input.
/// The result is symmetric by construction: only the upper triangle is
/// computed and then mirrored.
inline Matrix covariance(const Matrix& x) {
    if (x.rows() < 2) throw DataError("covariance: need at least 2 rows, got " + std::to_string(x.rows()));
    const std::size_t n = x.rows(), p = x.cols();
    const std::vector<double> mu = column_means(x);
    Matrix cov(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += (x(r, i) - mu[i]) * (x(r, j) - mu[j]);
            const double v = s / static_cast<double>(n);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }
    return cov;
}

namespace detail {

inline double max_off_diagonal(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps rotate every
/// off-diagonal (p,q) pair in row order until the largest off-diagonal
/// magnitude drops below tol; 100 sweeps without convergence is an error.
///
/// Sign convention: each eigenvector is flipped so its largest-magnitude
/// entry is positive, which makes loading reports deterministic.
inline EigenDecomposition symmetric_eigen(const Matrix& input, double tol = 1e-12) {
    const std::size_t n = input.rows();
    if (n == 0 || input.cols() != n)
        throw DataError("symmetric_eigen: matrix must be square and non-empty");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-10)
                throw DataError("symmetric_eigen: asymmetry beyond 1e-10 at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");

    Matrix a = input;
    Matrix v = Matrix::identity(n);

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (detail::max_off_diagonal(a) >= tol) {
        if (++sweep > kMaxSweeps)
            throw NumericError("symmetric_eigen: no convergence after " + std::to_string(kMaxSweeps) +
                               " sweeps (max off-diagonal " + fmt_double(detail::max_off_diagonal(a)) + ")");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = a(src, src);
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double mag = std::abs(v(r, src));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        const double flip = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = flip * v(r, src);
    }
    return out;
}

}  // namespace beancls
