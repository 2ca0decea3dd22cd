#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Per-feature standardization parameters. Population convention (divide
/// by n) throughout, matching the covariance and z-score code paths.
struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stds;
};

inline ScalerParams scaler_fit(const Matrix& x, std::span<const std::string> column_names = {}) {
    if (x.rows() < 2) throw DataError("scaler_fit: need at least 2 rows, got " + std::to_string(x.rows()));
    ScalerParams p;
    p.means = column_means(x);
    p.stds.resize(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double d = x(r, c) - p.means[c];
            s += d * d;
        }
        p.stds[c] = std::sqrt(s / static_cast<double>(x.rows()));
        if (p.stds[c] <= 0.0) {
            const std::string name =
                c < column_names.size() ? "'" + column_names[c] + "'" : "index " + std::to_string(c);
            throw DataError("scaler_fit: constant column " + name);
        }
    }
    return p;
}

inline Matrix scaler_apply(const ScalerParams& p, const Matrix& x) {
    if (x.cols() != p.means.size())
        throw DataError("scaler_apply: expected " + std::to_string(p.means.size()) + " columns, got " +
                        std::to_string(x.cols()));
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - p.means[c]) / p.stds[c];
    return out;
}

/// Inverse of scaler_apply; x * sigma + mu.
inline Matrix scaler_invert(const ScalerParams& p, const Matrix& x) {
    if (x.cols() != p.means.size()) throw DataError("scaler_invert: column count mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * p.stds[c] + p.means[c];
    return out;
}

}  // namespace beancls
