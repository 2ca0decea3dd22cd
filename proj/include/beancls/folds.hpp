#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "beancls/prng.hpp"
#include "beancls/textio.hpp"

namespace beancls {

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;  // fold id per row
    std::uint64_t seed = 0;
    bool stratified = true;

    std::vector<std::size_t> test_rows(int fold) const {
        std::vector<std::size_t> out;
        for (std::size_t r = 0; r < assignments.size(); ++r)
            if (assignments[r] == fold) out.push_back(r);
        return out;
    }
    std::vector<std::size_t> train_rows(int fold) const {
        std::vector<std::size_t> out;
        for (std::size_t r = 0; r < assignments.size(); ++r)
            if (assignments[r] != fold) out.push_back(r);
        return out;
    }
};

/// Within each class (ascending id), rows are shuffled by the seeded
/// generator and dealt round-robin, so per-class fold counts differ by at
/// most one.
inline FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("stratified_kfold: k must be >= 2");
    const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t r = 0; r < labels.size(); ++r) by_class[static_cast<std::size_t>(labels[r])].push_back(r);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw DataError("stratified_kfold: class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " rows, fewer than k=" + std::to_string(k));

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), -1);
    Xorshift64Star rng(mix_seed(seed, 0xf01d));
    for (auto& rows : by_class) {
        shuffle_in_place(rows, rng);
        for (std::size_t t = 0; t < rows.size(); ++t)
            plan.assignments[rows[t]] = static_cast<int>(t % static_cast<std::size_t>(k));
    }
    return plan;
}

/// Seeded stratified subsample of about n rows (per-class quotas by
/// largest remainder); returns ascending row indices.
inline std::vector<std::size_t> stratified_subsample(std::span<const int> labels, std::size_t n,
                                                     std::uint64_t seed) {
    const std::size_t total = labels.size();
    if (n >= total) {
        std::vector<std::size_t> all(total);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    const int n_classes = total == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t r = 0; r < total; ++r) by_class[static_cast<std::size_t>(labels[r])].push_back(r);

    std::vector<std::size_t> quota(by_class.size());
    std::vector<double> remainder(by_class.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const double exact =
            static_cast<double>(n) * static_cast<double>(by_class[c].size()) / static_cast<double>(total);
        quota[c] = static_cast<std::size_t>(exact);
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::vector<std::size_t> order(by_class.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n && i < order.size(); ++i) {
        if (quota[order[i]] < by_class[order[i]].size()) {
            ++quota[order[i]];
            ++assigned;
        }
    }

    Xorshift64Star rng(mix_seed(seed, 0x50b5));
    std::vector<std::size_t> picked;
    picked.reserve(n);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        shuffle_in_place(rows, rng);
        for (std::size_t t = 0; t < quota[c]; ++t) picked.push_back(rows[t]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace beancls
