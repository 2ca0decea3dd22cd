#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "beancls/linalg.hpp"
#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Principal axes of the fit data. `components` is n_features x k with
/// the axes in the columns, ordered by explained variance. The full
/// eigenvalue spectrum is retained so explained ratios stay normalized
/// over all n_features components.
struct PcaModel {
    Matrix components;
    std::vector<double> explained_variance;   // length k, descending
    std::vector<double> explained_ratio;      // length k
    std::vector<double> all_eigenvalues;      // length n_features, clamped at 0
    double variance_threshold = 1.0;
    std::vector<double> input_means;

    std::size_t n_components() const { return components.cols(); }
    std::size_t n_features() const { return components.rows(); }
};

namespace detail {

inline PcaModel pca_fit_impl(const Matrix& x, double variance_threshold, std::size_t fixed_k) {
    const Matrix cov = covariance(x);
    const EigenDecomposition eig = symmetric_eigen(cov);
    const std::size_t p = x.cols();

    std::vector<double> lambda(p);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        lambda[i] = std::max(eig.eigenvalues[i], 0.0);  // covariance is PSD; clip rounding noise
        total += lambda[i];
    }
    if (total <= 0.0) throw NumericError("pca_fit: zero total variance");

    std::vector<double> ratio(p), cumulative(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        ratio[i] = lambda[i] / total;
        acc += ratio[i];
        cumulative[i] = acc;
    }
    cumulative[p - 1] = 1.0;  // full retention is exact by definition

    std::size_t k = fixed_k;
    if (k == 0) {
        k = p;
        for (std::size_t i = 0; i < p; ++i) {
            if (cumulative[i] >= variance_threshold) {
                k = i + 1;
                break;
            }
        }
    }

    PcaModel m;
    m.variance_threshold = variance_threshold;
    m.input_means = column_means(x);
    m.all_eigenvalues = lambda;
    m.explained_variance.assign(lambda.begin(), lambda.begin() + static_cast<std::ptrdiff_t>(k));
    m.explained_ratio.assign(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(k));
    m.components = Matrix(p, k);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < k; ++c) m.components(r, c) = eig.eigenvectors(r, c);
    return m;
}

}  // namespace detail

/// Keep the smallest k whose cumulative explained ratio reaches the
/// threshold. The caller is expected to have scaled x already.
inline PcaModel pca_fit(const Matrix& x, double variance_threshold) {
    if (!(variance_threshold > 0.0) || variance_threshold > 1.0)
        throw DataError("pca_fit: variance threshold must be in (0, 1]");
    return detail::pca_fit_impl(x, variance_threshold, 0);
}

/// Keep exactly k components.
inline PcaModel pca_fit_fixed(const Matrix& x, std::size_t k) {
    if (k == 0 || k > x.cols()) throw DataError("pca_fit_fixed: k must be in [1, n_features]");
    return detail::pca_fit_impl(x, 1.0, k);
}

/// Scores: (x - input_means) * components.
inline Matrix pca_transform(const PcaModel& m, const Matrix& x) {
    if (x.cols() != m.n_features())
        throw DataError("pca_transform: expected " + std::to_string(m.n_features()) + " columns, got " +
                        std::to_string(x.cols()));
    const std::size_t k = m.n_components();
    Matrix out(x.rows(), k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t f = 0; f < m.n_features(); ++f)
                s += (x(r, f) - m.input_means[f]) * m.components(f, c);
            out(r, c) = s;
        }
    }
    return out;
}

/// For each kept component, the top_n feature names ranked by absolute
/// loading (descending, ties by feature order).
inline std::vector<std::vector<std::string>> pca_top_features(const PcaModel& m,
                                                              std::span<const std::string> feature_names,
                                                              std::size_t top_n) {
    if (feature_names.size() != m.n_features())
        throw DataError("pca_top_features: name count mismatch");
    if (top_n > m.n_features()) throw DataError("pca_top_features: top_n exceeds feature count");
    std::vector<std::vector<std::string>> out;
    out.reserve(m.n_components());
    for (std::size_t c = 0; c < m.n_components(); ++c) {
        std::vector<std::size_t> order(m.n_features());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(m.components(a, c)) > std::abs(m.components(b, c));
        });
        std::vector<std::string> names;
        names.reserve(top_n);
        for (std::size_t i = 0; i < top_n; ++i) names.push_back(feature_names[order[i]]);
        out.push_back(std::move(names));
    }
    return out;
}

}  // namespace beancls
