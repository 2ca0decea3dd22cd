#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beancls/textio.hpp"

namespace beancls {

/// Rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::string> class_names;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts)
            for (std::int64_t v : row) t += v;
        return t;
    }
    std::int64_t trace() const {
        std::int64_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }
};

struct Metrics {
    double accuracy = 0.0;
    double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    std::vector<double> per_class_precision, per_class_recall, per_class_f1;
};

/// Confusion counts plus accuracy/precision/recall/F1 with 0/0 defined as
/// 0. For single-label multiclass the micro aggregates all equal the
/// accuracy exactly, which the computation preserves bit-for-bit.
inline std::pair<ConfusionMatrix, Metrics> evaluate(std::span<const int> truth, std::span<const int> predicted,
                                                    const std::vector<std::string>& class_names) {
    if (truth.size() != predicted.size()) throw DataError("evaluate: length mismatch");
    if (truth.empty()) throw DataError("evaluate: empty input");
    const std::size_t k = class_names.size();

    ConfusionMatrix cm;
    cm.class_names = class_names;
    cm.counts.assign(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = static_cast<std::size_t>(truth[i]);
        const auto p = static_cast<std::size_t>(predicted[i]);
        if (t >= k || p >= k) throw DataError("evaluate: class id out of range");
        ++cm.counts[t][p];
    }

    Metrics m;
    std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    auto safe_div = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t tp = cm.counts[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += cm.counts[o][c];
            fn += cm.counts[c][o];
        }
        const double precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
        const double recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
        const double f1 = safe_div(2.0 * precision * recall, precision + recall);
        m.per_class_precision.push_back(precision);
        m.per_class_recall.push_back(recall);
        m.per_class_f1.push_back(f1);
        m.macro_precision += precision;
        m.macro_recall += recall;
        m.macro_f1 += f1;
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn;
    }
    m.macro_precision /= static_cast<double>(k);
    m.macro_recall /= static_cast<double>(k);
    m.macro_f1 /= static_cast<double>(k);

    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
    m.micro_precision = safe_div(static_cast<double>(tp_sum), static_cast<double>(tp_sum + fp_sum));
    m.micro_recall = safe_div(static_cast<double>(tp_sum), static_cast<double>(tp_sum + fn_sum));
    // equal precision and recall short-circuits the harmonic mean, keeping
    // micro-F1 == accuracy an exact identity rather than a rounded one
    m.micro_f1 = m.micro_precision == m.micro_recall
                     ? m.micro_precision
                     : safe_div(2.0 * m.micro_precision * m.micro_recall, m.micro_precision + m.micro_recall);
    return {std::move(cm), std::move(m)};
}

}  // namespace beancls
