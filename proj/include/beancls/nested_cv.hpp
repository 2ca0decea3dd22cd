#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "beancls/dataset.hpp"
#include "beancls/folds.hpp"
#include "beancls/gbt.hpp"
#include "beancls/grid.hpp"
#include "beancls/metrics.hpp"
#include "beancls/outlier.hpp"
#include "beancls/pca.hpp"
#include "beancls/scaler.hpp"
#include "beancls/svm.hpp"
#include "beancls/textio.hpp"

namespace beancls {

enum class ModelKind { svm, gbt };

enum class PipelineMode {
    paper_faithful,  // transforms fitted once on the full dataset, before any split
    leakage_free     // transforms refit inside every training split
};

inline std::string model_kind_name(ModelKind m) { return m == ModelKind::svm ? "svm" : "gbt"; }
inline std::string pipeline_mode_name(PipelineMode m) {
    return m == PipelineMode::paper_faithful ? "paper-faithful" : "leakage-free";
}

struct CvOptions {
    ModelKind model = ModelKind::svm;
    PipelineMode mode = PipelineMode::paper_faithful;
    std::uint64_t seed = 42;
    int outer_k = 5;
    int inner_k = 3;
    double z_threshold = 3.0;
    double variance_threshold = 0.9999;
    int jobs = 1;
    ParamGrid grid;
};

struct FoldResult {
    Candidate best_params;
    double inner_mean_accuracy = 0.0;
    Metrics metrics;
    ConfusionMatrix confusion;
    std::vector<double> fitted_scaler_means;  // leakage-free refit audit; empty otherwise
};

struct CvAggregate {
    double mean = 0.0;
    double stddev = 0.0;  // population, over folds
};

struct CvReport {
    PipelineMode mode = PipelineMode::paper_faithful;
    ModelKind model = ModelKind::svm;
    std::vector<FoldResult> folds;
    CvAggregate accuracy, micro_f1, macro_f1, micro_recall, macro_recall;
    std::vector<std::string> disqualified;
};

namespace detail {

// Index-addressed work pool. Results land in caller-owned slots, so the
// reduction order never depends on scheduling.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Train on `train`, predict `test` feature rows. In leakage-free mode the
/// z-filter, scaler, and PCA are fitted on the training split only; the
/// candidate's n_components, when present, pins the per-split PCA width.
inline std::vector<int> train_predict(const Dataset& train, const Matrix& test_features, ModelKind kind,
                                      const Candidate& cand, const CvOptions& opt,
                                      std::vector<double>* fitted_means_out) {
    const Dataset* fit_data = &train;
    Dataset transformed_train;
    Matrix test_x = test_features;

    if (opt.mode == PipelineMode::leakage_free) {
        auto [filtered, report] = zscore_filter(train, opt.z_threshold);
        const ScalerParams scaler = scaler_fit(filtered.features, filtered.feature_names);
        if (fitted_means_out) *fitted_means_out = scaler.means;
        const Matrix train_scaled = scaler_apply(scaler, filtered.features);
        PcaModel pca;
        if (const std::string* nc = candidate_find(cand, "n_components"))
            pca = pca_fit_fixed(train_scaled, static_cast<std::size_t>(parse_double(*nc, "n_components")));
        else
            pca = pca_fit(train_scaled, opt.variance_threshold);
        transformed_train.features = pca_transform(pca, train_scaled);
        transformed_train.labels = filtered.labels;
        transformed_train.class_names = filtered.class_names;
        transformed_train.feature_names.resize(pca.n_components());
        for (std::size_t i = 0; i < pca.n_components(); ++i)
            transformed_train.feature_names[i] = "pc" + std::to_string(i);
        fit_data = &transformed_train;
        test_x = pca_transform(pca, scaler_apply(scaler, test_features));
    }

    if (kind == ModelKind::svm) {
        const SvmModel model = svm_train(*fit_data, svm_hyper_from(cand));
        return svm_predict(model, test_x);
    }
    const GbtModel model = gbt_train(*fit_data, gbt_hyper_from(cand, opt.seed));
    return gbt_predict(model, test_x).first;
}

}  // namespace detail

struct GridSearchResult {
    Candidate best;
    double best_mean_accuracy = 0.0;
    std::vector<std::string> disqualified;
};

/// Mean inner-fold accuracy per candidate; the best candidate wins, ties
/// resolved toward the earliest enumeration index. A candidate that fails
/// on any fold is disqualified and logged, never fatal.
inline GridSearchResult grid_search(const Dataset& train, ModelKind kind, const ParamGrid& grid,
                                    int inner_k, std::uint64_t seed, const CvOptions& opt) {
    grid.validate();
    const std::size_t n_cand = grid.candidate_count();
    if (n_cand == 0) throw DataError("grid_search: empty grid");
    const FoldPlan plan = stratified_kfold(train.labels, inner_k, seed);

    struct Slot {
        double accuracy = 0.0;
        std::string error;
    };
    std::vector<Slot> slots(n_cand * static_cast<std::size_t>(inner_k));

    detail::parallel_for(slots.size(), opt.jobs, [&](std::size_t t) {
        const std::size_t ci = t / static_cast<std::size_t>(inner_k);
        const int fi = static_cast<int>(t % static_cast<std::size_t>(inner_k));
        const Candidate cand = candidate_at(grid, ci);
        try {
            const auto train_rows = plan.train_rows(fi);
            const auto test_rows = plan.test_rows(fi);
            const Dataset inner_train = select_rows(train, train_rows);
            const Dataset inner_test = select_rows(train, test_rows);
            const std::vector<int> pred =
                detail::train_predict(inner_train, inner_test.features, kind, cand, opt, nullptr);
            slots[t].accuracy = evaluate(inner_test.labels, pred, train.class_names).second.accuracy;
        } catch (const std::exception& e) {
            slots[t].error = e.what();
        }
    });

    GridSearchResult out;
    bool have_best = false;
    for (std::size_t ci = 0; ci < n_cand; ++ci) {
        double mean = 0.0;
        bool ok = true;
        for (int fi = 0; fi < inner_k; ++fi) {
            const Slot& s = slots[ci * static_cast<std::size_t>(inner_k) + static_cast<std::size_t>(fi)];
            if (!s.error.empty()) {
                out.disqualified.push_back("candidate {" + candidate_to_string(candidate_at(grid, ci)) +
                                           "} fold " + std::to_string(fi) + ": " + s.error);
                ok = false;
                break;
            }
            mean += s.accuracy;
        }
        if (!ok) continue;
        mean /= static_cast<double>(inner_k);
        if (!have_best || mean > out.best_mean_accuracy) {
            have_best = true;
            out.best_mean_accuracy = mean;
            out.best = candidate_at(grid, ci);
        }
    }
    if (!have_best) throw DataError("grid_search: every candidate failed");
    return out;
}

/// Outer loop: per fold, grid-search the training side, refit the winner,
/// score the held-out side. Aggregates are plain means (and population
/// standard deviations) of the per-fold metrics.
inline CvReport nested_cv(const Dataset& d, const CvOptions& opt) {
    CvReport report;
    report.mode = opt.mode;
    report.model = opt.model;

    const FoldPlan outer = stratified_kfold(d.labels, opt.outer_k, mix_seed(opt.seed, 1));

    // partition law: every row appears in exactly one outer test fold
    {
        std::vector<char> seen(d.n_rows(), 0);
        for (int f = 0; f < opt.outer_k; ++f)
            for (std::size_t r : outer.test_rows(f)) seen[r] = 1;
        for (char s : seen)
            if (!s) throw NumericError("nested_cv: outer folds do not cover the dataset");
    }

    for (int f = 0; f < opt.outer_k; ++f) {
        const Dataset outer_train = select_rows(d, outer.train_rows(f));
        const Dataset outer_test = select_rows(d, outer.test_rows(f));
        const std::uint64_t inner_seed = mix_seed(opt.seed, 100 + static_cast<std::uint64_t>(f));

        GridSearchResult gs = grid_search(outer_train, opt.model, opt.grid, opt.inner_k, inner_seed, opt);
        for (auto& line : gs.disqualified)
            report.disqualified.push_back("outer fold " + std::to_string(f) + ": " + std::move(line));

        FoldResult fr;
        fr.best_params = gs.best;
        fr.inner_mean_accuracy = gs.best_mean_accuracy;
        const std::vector<int> pred = detail::train_predict(outer_train, outer_test.features, opt.model,
                                                            gs.best, opt, &fr.fitted_scaler_means);
        auto [cm, metrics] = evaluate(outer_test.labels, pred, d.class_names);
        if (metrics.micro_f1 != metrics.accuracy || metrics.micro_recall != metrics.accuracy)
            throw NumericError("nested_cv: micro-F1/recall/accuracy identity violated");
        fr.metrics = std::move(metrics);
        fr.confusion = std::move(cm);
        report.folds.push_back(std::move(fr));
    }

    auto aggregate = [&](auto getter) {
        CvAggregate a;
        for (const FoldResult& fr : report.folds) a.mean += getter(fr);
        a.mean /= static_cast<double>(report.folds.size());
        double var = 0.0;
        for (const FoldResult& fr : report.folds) {
            const double dlt = getter(fr) - a.mean;
            var += dlt * dlt;
        }
        a.stddev = std::sqrt(var / static_cast<double>(report.folds.size()));
        return a;
    };
    report.accuracy = aggregate([](const FoldResult& fr) { return fr.metrics.accuracy; });
    report.micro_f1 = aggregate([](const FoldResult& fr) { return fr.metrics.micro_f1; });
    report.macro_f1 = aggregate([](const FoldResult& fr) { return fr.metrics.macro_f1; });
    report.micro_recall = aggregate([](const FoldResult& fr) { return fr.metrics.micro_recall; });
    report.macro_recall = aggregate([](const FoldResult& fr) { return fr.metrics.macro_recall; });
    return report;
}

}  // namespace beancls
