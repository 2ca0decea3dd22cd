// beancls: dry-bean classification pipeline CLI.
//
// Subcommands: inspect, preprocess, nested-cv, report. All outputs are
// deterministic for a fixed config and seed; wall-clock timing goes to
// stdout and timing.txt only.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beancls/beancls.hpp"

namespace fs = std::filesystem;
using namespace beancls;

namespace {

struct CommonOpts {
    std::string data;
    std::string label_column = "Class";
    std::uint64_t seed = 42;
    std::size_t subsample = 0;
    std::string out_dir = ".";
    double z_threshold = 3.0;
    double variance_threshold = 0.9999;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out) {
    cmd->add_option("--data", o.data, "input CSV path")->required();
    cmd->add_option("--label-column", o.label_column, "label column name (default Class)");
    cmd->add_option("--seed", o.seed, "PRNG seed (default 42)");
    cmd->add_option("--subsample", o.subsample, "stratified subsample size, 0 = full dataset");
    cmd->add_option("--z-threshold", o.z_threshold, "per-class z-score bound (default 3)");
    cmd->add_option("--variance-threshold", o.variance_threshold,
                    "PCA explained-variance threshold (default 0.9999)");
    auto* out = cmd->add_option("--out", o.out_dir, "output directory");
    if (needs_out) out->required();
}

Dataset load_input(const CommonOpts& o) {
    Dataset d = load_csv(o.data, o.label_column);
    if (o.subsample > 0 && o.subsample < d.n_rows()) {
        const auto rows = stratified_subsample(d.labels, o.subsample, o.seed);
        d = select_rows(d, rows);
    }
    return d;
}

ConfigEcho common_echo(const std::string& command, const CommonOpts& o) {
    ConfigEcho e;
    e.emplace_back("command", command);
    e.emplace_back("data", o.data);
    e.emplace_back("label_column", o.label_column);
    e.emplace_back("seed", std::to_string(o.seed));
    e.emplace_back("subsample", std::to_string(o.subsample));
    e.emplace_back("z_threshold", fmt_double(o.z_threshold));
    e.emplace_back("variance_threshold", fmt_double(o.variance_threshold));
    return e;
}

std::ofstream open_output(const fs::path& path, const ConfigEcho& echo) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& [k, v] : echo) out << "# " << k << " = " << v << "\n";
    return out;
}

void write_distribution_csv(const fs::path& path, const ConfigEcho& echo, const Dataset& d) {
    auto out = open_output(path, echo);
    out << "class,count,fraction\n";
    for (const auto& e : class_distribution(d).entries)
        out << e.name << "," << e.count << "," << fmt_double(e.fraction) << "\n";
}

void write_correlation_csv(const fs::path& path, const ConfigEcho& echo, const Dataset& d) {
    const Matrix corr = correlation_matrix(d);
    auto out = open_output(path, echo);
    out << "feature";
    for (const auto& name : d.feature_names) out << "," << name;
    out << "\n";
    for (std::size_t i = 0; i < corr.rows(); ++i) {
        out << d.feature_names[i];
        for (std::size_t j = 0; j < corr.cols(); ++j) out << "," << fmt_double(corr(i, j));
        out << "\n";
    }
}

int cmd_inspect(const CommonOpts& o) {
    const Dataset d = load_input(o);
    const auto [filtered, report] = zscore_filter(d, o.z_threshold);
    const ConfigEcho echo = common_echo("inspect", o);
    const fs::path dir(o.out_dir);
    write_distribution_csv(dir / "class_distribution_raw.csv", echo, d);
    write_distribution_csv(dir / "class_distribution_filtered.csv", echo, filtered);
    write_correlation_csv(dir / "correlation_raw.csv", echo, d);
    write_correlation_csv(dir / "correlation_filtered.csv", echo, filtered);
    std::cout << "inspect: " << d.n_rows() << " rows, " << d.n_features() << " features, "
              << d.n_classes() << " classes; " << filtered.n_rows()
              << " rows after z-filter; reports in " << dir.string() << "\n";
    return 0;
}

int cmd_preprocess(const CommonOpts& o) {
    const Dataset d = load_input(o);
    const auto [filtered, outliers] = zscore_filter(d, o.z_threshold);
    const ScalerParams scaler = scaler_fit(filtered.features, filtered.feature_names);
    const Matrix scaled = scaler_apply(scaler, filtered.features);
    const PcaModel pca = pca_fit(scaled, o.variance_threshold);

    const ConfigEcho echo = common_echo("preprocess", o);
    const fs::path dir(o.out_dir);

    {
        auto out = open_output(dir / "filtered_dataset.csv", echo);
        for (const auto& name : filtered.feature_names) out << name << ",";
        out << o.label_column << "\n";
        for (std::size_t r = 0; r < filtered.n_rows(); ++r) {
            for (std::size_t c = 0; c < filtered.n_features(); ++c)
                out << fmt_double(filtered.features(r, c)) << ",";
            out << filtered.class_names[static_cast<std::size_t>(filtered.labels[r])] << "\n";
        }
    }
    {
        ConfigEcho e = echo;
        e.emplace_back("removed_total", std::to_string(outliers.removed_row_indices.size()));
        e.emplace_back("remaining", std::to_string(filtered.n_rows()));
        for (const auto& [name, count] : outliers.per_class_removed)
            e.emplace_back("removed_" + name, std::to_string(count));
        auto out = open_output(dir / "outlier_report.csv", e);
        out << "removed_row_index,class\n";
        for (std::size_t r : outliers.removed_row_indices)
            out << r << "," << d.class_names[static_cast<std::size_t>(d.labels[r])] << "\n";
    }
    {
        auto out = open_output(dir / "scree.csv", echo);
        out << "component,explained_variance,explained_ratio,cumulative_ratio\n";
        const double total =
            std::accumulate(pca.all_eigenvalues.begin(), pca.all_eigenvalues.end(), 0.0);
        double cum = 0.0;
        for (std::size_t i = 0; i < pca.all_eigenvalues.size(); ++i) {
            const double ratio = pca.all_eigenvalues[i] / total;
            cum = (i + 1 == pca.all_eigenvalues.size()) ? 1.0 : cum + ratio;
            out << (i + 1) << "," << fmt_double(pca.all_eigenvalues[i]) << "," << fmt_double(ratio)
                << "," << fmt_double(cum) << "\n";
        }
    }
    {
        auto out = open_output(dir / "loadings_top4.csv", echo);
        out << "component,first,second,third,fourth\n";
        const auto tops = pca_top_features(pca, filtered.feature_names, 4);
        for (std::size_t c = 0; c < tops.size(); ++c) {
            out << c;
            for (const auto& name : tops[c]) out << "," << name;
            out << "\n";
        }
    }
    std::cout << "preprocess: removed " << outliers.removed_row_indices.size() << " of " << d.n_rows()
              << " rows; " << pca.n_components() << " principal components at threshold "
              << fmt_double(o.variance_threshold) << "; outputs in " << dir.string() << "\n";
    return 0;
}

struct NestedCvOpts {
    CommonOpts common;
    std::string model = "svm";
    std::string mode = "paper-faithful";
    int outer_k = 5;
    int inner_k = 3;
    int jobs = 1;
    std::string grid_file;
};

int cmd_nested_cv(const NestedCvOpts& nco) {
    const auto t0 = std::chrono::steady_clock::now();
    const CommonOpts& o = nco.common;

    CvOptions opt;
    if (nco.model == "svm")
        opt.model = ModelKind::svm;
    else if (nco.model == "gbt")
        opt.model = ModelKind::gbt;
    else
        throw DataError("unknown model '" + nco.model + "' (expected svm or gbt)");
    if (nco.mode == "paper-faithful")
        opt.mode = PipelineMode::paper_faithful;
    else if (nco.mode == "leakage-free")
        opt.mode = PipelineMode::leakage_free;
    else
        throw DataError("unknown mode '" + nco.mode + "' (expected paper-faithful or leakage-free)");
    opt.seed = o.seed;
    opt.outer_k = nco.outer_k;
    opt.inner_k = nco.inner_k;
    opt.z_threshold = o.z_threshold;
    opt.variance_threshold = o.variance_threshold;
    opt.jobs = nco.jobs;
    opt.grid = nco.grid_file.empty()
                   ? (opt.model == ModelKind::svm ? default_svm_grid() : default_gbt_grid())
                   : parse_grid_file(nco.grid_file);

    const Dataset loaded = load_input(o);

    // paper-faithful: transforms fitted once on the whole dataset, before
    // any split; leakage-free: everything happens inside the folds.
    Dataset cv_data;
    if (opt.mode == PipelineMode::paper_faithful) {
        const auto [filtered, outliers] = zscore_filter(loaded, opt.z_threshold);
        const ScalerParams scaler = scaler_fit(filtered.features, filtered.feature_names);
        const Matrix scaled = scaler_apply(scaler, filtered.features);
        const PcaModel pca = pca_fit(scaled, opt.variance_threshold);
        cv_data.features = pca_transform(pca, scaled);
        cv_data.labels = filtered.labels;
        cv_data.class_names = filtered.class_names;
        for (std::size_t i = 0; i < pca.n_components(); ++i)
            cv_data.feature_names.push_back("pc" + std::to_string(i));
    } else {
        cv_data = loaded;
    }

    const CvReport report = nested_cv(cv_data, opt);

    ConfigEcho echo = common_echo("nested-cv", o);
    echo.emplace_back("outer_k", std::to_string(opt.outer_k));
    echo.emplace_back("inner_k", std::to_string(opt.inner_k));
    echo.emplace_back("jobs", std::to_string(opt.jobs));
    echo.emplace_back("cv_rows", std::to_string(cv_data.n_rows()));
    echo.emplace_back("cv_features", std::to_string(cv_data.n_features()));
    for (const auto& axis : opt.grid.axes) {
        std::string values;
        for (std::size_t i = 0; i < axis.values.size(); ++i)
            values += (i ? "," : "") + axis.values[i];
        echo.emplace_back("grid_" + axis.name, values);
    }

    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "nested_cv_report.txt", std::ios::binary);
        if (!out) throw IoError("cannot write '" + (dir / "nested_cv_report.txt").string() + "'");
        write_cv_report(out, report, echo);
    }
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
        auto out = open_output(dir / ("confusion_fold" + std::to_string(f) + ".csv"), echo);
        const ConfusionMatrix& cm = report.folds[f].confusion;
        out << "true\\pred";
        for (const auto& name : cm.class_names) out << "," << name;
        out << "\n";
        for (std::size_t i = 0; i < cm.counts.size(); ++i) {
            out << cm.class_names[i];
            for (std::int64_t v : cm.counts[i]) out << "," << v;
            out << "\n";
        }
    }
    {
        const FoldPlan outer = stratified_kfold(cv_data.labels, opt.outer_k, mix_seed(opt.seed, 1));
        auto out = open_output(dir / "fold_assignments.csv", echo);
        out << "cv_row,class,outer_fold\n";
        for (std::size_t r = 0; r < cv_data.n_rows(); ++r)
            out << r << "," << cv_data.class_names[static_cast<std::size_t>(cv_data.labels[r])] << ","
                << outer.assignments[r] << "\n";
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ofstream out(dir / "timing.txt", std::ios::binary);
        out << "wall_clock_seconds = " << fmt_double(wall) << "\n";
    }
    std::cout << "nested-cv " << model_kind_name(report.model) << " ("
              << pipeline_mode_name(report.mode) << "): mean accuracy "
              << fmt_double(report.accuracy.mean) << ", micro F1 " << fmt_double(report.micro_f1.mean)
              << ", macro F1 " << fmt_double(report.macro_f1.mean) << " over "
              << report.folds.size() << " folds; wall clock " << fmt_fixed(wall, 1)
              << " s; report in " << (dir / "nested_cv_report.txt").string() << "\n";
    return 0;
}

int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report '" + path + "'");
    const ParsedReport rep = parse_cv_report(in);

    const auto* config = rep.find("config");
    if (!config) throw FormatError("report has no [config] section");
    auto cfg = [&](const char* key) {
        const std::string* v = ParsedReport::value(*config, key);
        return v ? *v : std::string("?");
    };
    std::cout << "model: " << cfg("model") << "   mode: " << cfg("mode") << "   seed: " << cfg("seed")
              << "   subsample: " << cfg("subsample") << "\n\n";

    const auto* agg = rep.find("aggregate");
    if (!agg) throw FormatError("report has no [aggregate] section");
    std::cout << "aggregate over " << (ParsedReport::value(*agg, "folds") ? *ParsedReport::value(*agg, "folds") : "?")
              << " folds (mean / std):\n";
    for (const char* name : {"accuracy", "micro_f1", "micro_recall", "macro_f1", "macro_recall"}) {
        const std::string* mean = ParsedReport::value(*agg, "mean_" + std::string(name));
        const std::string* stdv = ParsedReport::value(*agg, "std_" + std::string(name));
        std::cout << "  " << std::left << std::setw(14) << name << (mean ? *mean : "?") << " / "
                  << (stdv ? *stdv : "?") << "\n";
    }
    std::cout << "\n";

    for (std::size_t f = 0;; ++f) {
        const auto* fold = rep.find("fold " + std::to_string(f));
        if (!fold) break;
        const std::string* acc = ParsedReport::value(*fold, "accuracy");
        const std::string* best = ParsedReport::value(*fold, "best_params");
        std::cout << "fold " << f << ": accuracy " << (acc ? *acc : "?") << ", best {"
                  << (best ? *best : "?") << "}\n";
    }
    std::cout << "\n";

    for (std::size_t f = 0;; ++f) {
        const auto* conf = rep.find("fold " + std::to_string(f) + " confusion");
        if (!conf) break;
        std::cout << "confusion, fold " << f << " (rows = true, cols = predicted):\n";
        std::vector<std::vector<std::string>> cells;
        std::size_t width = 0;
        for (const auto& line : conf->raw_lines) {
            cells.push_back(split(line, ','));
            for (const auto& c : cells.back()) width = std::max(width, c.size());
        }
        for (const auto& row : cells) {
            std::cout << " ";
            for (const auto& c : row) std::cout << " " << std::right << std::setw(static_cast<int>(width)) << c;
            std::cout << "\n";
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dry-bean multiclass classification pipeline"};
    app.require_subcommand(1);

    CommonOpts inspect_opts;
    auto* inspect = app.add_subcommand("inspect", "class distribution and correlation reports");
    add_common(inspect, inspect_opts, true);

    CommonOpts preprocess_opts;
    auto* preprocess =
        app.add_subcommand("preprocess", "z-filter, scaler, and PCA reports (cleaned CSV, scree, loadings)");
    add_common(preprocess, preprocess_opts, true);

    NestedCvOpts cv_opts;
    auto* nested = app.add_subcommand("nested-cv", "nested cross-validation with grid search");
    add_common(nested, cv_opts.common, true);
    nested->add_option("--model", cv_opts.model, "svm or gbt")->required();
    nested->add_option("--mode", cv_opts.mode, "paper-faithful (default) or leakage-free");
    nested->add_option("--outer-k", cv_opts.outer_k, "outer folds (default 5)");
    nested->add_option("--inner-k", cv_opts.inner_k, "inner folds (default 3)");
    nested->add_option("--jobs", cv_opts.jobs, "worker threads (default 1)");
    nested->add_option("--grid", cv_opts.grid_file, "grid file overriding the built-in grid");

    std::string report_path;
    auto* report = app.add_subcommand("report", "print a human-readable summary of a nested-cv report");
    report->add_option("report-path", report_path, "report file written by nested-cv")->required();

    try {
        app.parse(argc, argv);
        if (*inspect) return cmd_inspect(inspect_opts);
        if (*preprocess) return cmd_preprocess(preprocess_opts);
        if (*nested) return cmd_nested_cv(cv_opts);
        if (*report) return cmd_report(report_path);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
