#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "beancls/dataset.hpp"
#include "beancls/textio.hpp"

namespace beancls {

struct OutlierReport {
    std::vector<std::size_t> removed_row_indices;          // ascending
    std::vector<std::pair<std::string, std::size_t>> per_class_removed;  // class-id order
    double threshold = 0.0;
};

/// Per-class z-score filter. Class statistics are computed in a single
/// pass on the unfiltered class (population std); a row is removed iff
/// any feature has |z| strictly above the threshold. A zero-variance
/// feature within a class contributes z = 0. Row order is preserved.
inline std::pair<Dataset, OutlierReport> zscore_filter(const Dataset& d, double threshold) {
    if (!(threshold > 0.0)) throw DataError("zscore_filter: threshold must be > 0");

    const std::size_t n = d.n_rows(), p = d.n_features(), k = d.n_classes();
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t r = 0; r < n; ++r) by_class[static_cast<std::size_t>(d.labels[r])].push_back(r);
    for (std::size_t c = 0; c < k; ++c)
        if (by_class[c].size() < 2)
            throw DataError("zscore_filter: class '" + d.class_names[c] + "' has fewer than 2 rows");

    std::vector<bool> keep(n, true);
    OutlierReport report;
    report.threshold = threshold;
    report.per_class_removed.reserve(k);

    for (std::size_t c = 0; c < k; ++c) {
        const auto& rows = by_class[c];
        const double m = static_cast<double>(rows.size());
        std::vector<double> mu(p, 0.0), sd(p, 0.0);
        for (std::size_t r : rows)
            for (std::size_t f = 0; f < p; ++f) mu[f] += d.features(r, f);
        for (double& v : mu) v /= m;
        for (std::size_t r : rows)
            for (std::size_t f = 0; f < p; ++f) {
                const double dv = d.features(r, f) - mu[f];
                sd[f] += dv * dv;
            }
        for (double& v : sd) v = std::sqrt(v / m);

        std::size_t removed = 0;
        for (std::size_t r : rows) {
            for (std::size_t f = 0; f < p; ++f) {
                if (sd[f] == 0.0) continue;  // z defined as 0
                if (std::abs((d.features(r, f) - mu[f]) / sd[f]) > threshold) {
                    keep[r] = false;
                    ++removed;
                    break;
                }
            }
        }
        report.per_class_removed.emplace_back(d.class_names[c], removed);
    }

    std::vector<std::size_t> kept_rows;
    kept_rows.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (keep[r])
            kept_rows.push_back(r);
        else
            report.removed_row_indices.push_back(r);
    }
    return {select_rows(d, kept_rows), std::move(report)};
}

}  // namespace beancls
