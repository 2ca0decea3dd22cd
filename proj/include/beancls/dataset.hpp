#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Labeled feature table. Immutable once built; class ids are ranks in the
/// lexicographically sorted list of class names.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_features() const { return features.cols(); }
    std::size_t n_classes() const { return class_names.size(); }

    void validate() const {
        if (features.rows() != labels.size()) throw DataError("dataset: feature rows != label count");
        if (features.cols() != feature_names.size()) throw DataError("dataset: feature cols != name count");
        if (!features.all_finite()) throw DataError("dataset: non-finite feature value");
        if (!std::is_sorted(class_names.begin(), class_names.end()))
            throw DataError("dataset: class names not sorted");
        if (std::adjacent_find(class_names.begin(), class_names.end()) != class_names.end())
            throw DataError("dataset: duplicate class name");
        std::set<std::string> unique_features(feature_names.begin(), feature_names.end());
        if (unique_features.size() != feature_names.size()) throw DataError("dataset: duplicate feature name");
        for (int l : labels)
            if (l < 0 || static_cast<std::size_t>(l) >= class_names.size())
                throw DataError("dataset: label id out of range");
    }
};

struct ClassDistribution {
    struct Entry {
        std::string name;
        std::size_t count;
        double fraction;
    };
    std::vector<Entry> entries;  // descending by count
};

/// Rows picked by index, original order of `indices` preserved.
inline Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices) {
    Dataset out;
    out.feature_names = d.feature_names;
    out.class_names = d.class_names;
    out.features = Matrix(indices.size(), d.n_features());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t r = indices[i];
        for (std::size_t c = 0; c < d.n_features(); ++c) out.features(i, c) = d.features(r, c);
        out.labels.push_back(d.labels[r]);
    }
    return out;
}

/// CSV loader per the frozen dialect: comma separated, header row, '.'
/// decimal point, no quoting. Labels are encoded by rank in the sorted
/// list of distinct label strings.
inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "': empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split(line, ',');
    std::set<std::string> seen;
    for (const std::string& h : header) {
        if (h.empty()) throw DataError("'" + path.string() + "': empty header name");
        if (!seen.insert(h).second) throw DataError("'" + path.string() + "': duplicate header '" + h + "'");
    }
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        throw DataError("'" + path.string() + "': label column '" + label_column + "' not in header");
    const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::string> feature_names;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != label_idx) feature_names.push_back(header[i]);

    std::vector<double> cells;
    std::vector<std::string> raw_labels;
    std::size_t row_number = 1;  // 1-based, header is row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.find('"') != std::string::npos)
            throw DataError("'" + path.string() + "' row " + std::to_string(row_number) +
                            ": quoted cells are not supported");
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != header.size())
            throw DataError("'" + path.string() + "' row " + std::to_string(row_number) + ": expected " +
                            std::to_string(header.size()) + " cells, got " + std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_idx) {
                raw_labels.push_back(fields[i]);
            } else {
                double v = 0;
                if (!try_parse_double(fields[i], v))
                    throw DataError("'" + path.string() + "' row " + std::to_string(row_number) + " column '" +
                                    header[i] + "': cannot parse '" + fields[i] + "' as a finite real");
                cells.push_back(v);
            }
        }
    }
    if (raw_labels.empty()) throw DataError("'" + path.string() + "': no data rows");

    Dataset d;
    d.feature_names = std::move(feature_names);
    const std::size_t n = raw_labels.size(), p = d.feature_names.size();
    d.features = Matrix(n, p);
    std::copy(cells.begin(), cells.end(), d.features.values().begin());

    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    d.class_names.assign(distinct.begin(), distinct.end());
    d.labels.reserve(n);
    for (const std::string& s : raw_labels) {
        const auto it = std::lower_bound(d.class_names.begin(), d.class_names.end(), s);
        d.labels.push_back(static_cast<int>(it - d.class_names.begin()));
    }
    d.validate();
    return d;
}

/// Per-class counts and fractions, descending by count (ties by class id).
inline ClassDistribution class_distribution(const Dataset& d) {
    if (d.n_rows() == 0) throw DataError("class_distribution: empty dataset");
    std::vector<std::size_t> counts(d.n_classes(), 0);
    for (int l : d.labels) ++counts[static_cast<std::size_t>(l)];
    std::vector<std::size_t> order(d.n_classes());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
    ClassDistribution dist;
    for (std::size_t c : order)
        dist.entries.push_back({d.class_names[c], counts[c],
                                static_cast<double>(counts[c]) / static_cast<double>(d.n_rows())});
    return dist;
}

/// Pearson correlation matrix (population convention). Symmetric with a
/// unit diagonal; entries clamped to [-1, 1] against rounding.
inline Matrix correlation_matrix(const Dataset& d) {
    const Matrix& x = d.features;
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 2) throw DataError("correlation_matrix: need at least 2 rows");
    const std::vector<double> mu = column_means(x);
    std::vector<double> sd(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = x(r, c) - mu[c];
            s += dv * dv;
        }
        sd[c] = std::sqrt(s / static_cast<double>(n));
        if (sd[c] == 0.0)
            throw DataError("correlation_matrix: zero-variance column '" + d.feature_names[c] + "'");
    }
    Matrix corr(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        corr(i, i) = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += (x(r, i) - mu[i]) * (x(r, j) - mu[j]);
            double rho = (s / static_cast<double>(n)) / (sd[i] * sd[j]);
            rho = std::clamp(rho, -1.0, 1.0);
            corr(i, j) = rho;
            corr(j, i) = rho;
        }
    }
    return corr;
}

}  // namespace beancls
