#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "beancls/gbt.hpp"
#include "beancls/smo.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Ordered hyperparameter axes; the cartesian product is enumerated
/// row-major (last declared axis varies fastest).
struct ParamGrid {
    struct Axis {
        std::string name;
        std::vector<std::string> values;
    };
    std::vector<Axis> axes;

    std::size_t candidate_count() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.values.size();
        return axes.empty() ? 0 : n;
    }

    void validate() const {
        for (const auto& a : axes)
            if (a.values.empty()) throw DataError("grid: axis '" + a.name + "' has no values");
    }
};

/// One point of the grid, in axis declaration order.
using Candidate = std::vector<std::pair<std::string, std::string>>;

inline Candidate candidate_at(const ParamGrid& grid, std::size_t index) {
    Candidate c;
    c.resize(grid.axes.size());
    std::size_t rem = index;
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
        const auto& axis = grid.axes[a];
        c[a] = {axis.name, axis.values[rem % axis.values.size()]};
        rem /= axis.values.size();
    }
    return c;
}

inline std::string candidate_to_string(const Candidate& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += " ";
        s += c[i].first + "=" + c[i].second;
    }
    return s;
}

inline const std::string* candidate_find(const Candidate& c, const std::string& name) {
    for (const auto& [key, value] : c)
        if (key == name) return &value;
    return nullptr;
}

/// Table of tuned values for the SVM model.
inline ParamGrid default_svm_grid() {
    ParamGrid g;
    g.axes.push_back({"n_components", {"10"}});
    g.axes.push_back({"C", {"0.1", "1", "10"}});
    g.axes.push_back({"kernel", {"linear", "rbf"}});
    g.axes.push_back({"gamma", {"scale", "auto"}});
    return g;
}

/// Table of tuned values for the boosted-tree model.
inline ParamGrid default_gbt_grid() {
    ParamGrid g;
    g.axes.push_back({"n_estimators", {"50", "100", "150"}});
    g.axes.push_back({"learning_rate", {"0.1", "0.3"}});
    g.axes.push_back({"colsample_bytree", {"0.3", "0.7", "1"}});
    g.axes.push_back({"max_depth", {"10"}});
    return g;
}

/// Grid file: one axis per line, `name = v1, v2, v3`. Blank lines and
/// `#` comments are skipped.
inline ParamGrid parse_grid(std::istream& is, const std::string& origin) {
    ParamGrid g;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw FormatError(origin + " line " + std::to_string(line_no) + ": expected 'name = values'");
        ParamGrid::Axis axis;
        axis.name = std::string(trim(t.substr(0, eq)));
        if (axis.name.empty())
            throw FormatError(origin + " line " + std::to_string(line_no) + ": empty axis name");
        for (const auto& v : split(t.substr(eq + 1), ',')) {
            const auto tv = trim(v);
            if (tv.empty())
                throw FormatError(origin + " line " + std::to_string(line_no) + ": empty value");
            axis.values.emplace_back(tv);
        }
        g.axes.push_back(std::move(axis));
    }
    if (g.axes.empty()) throw FormatError(origin + ": no axes");
    g.validate();
    return g;
}

inline ParamGrid parse_grid_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid file '" + path.string() + "'");
    return parse_grid(in, path.string());
}

inline SvmHyper svm_hyper_from(const Candidate& c) {
    SvmHyper h;
    for (const auto& [key, value] : c) {
        if (key == "C") {
            h.C = parse_double(value, "grid axis C");
        } else if (key == "kernel") {
            h.kernel.kind = kernel_kind_from(value);
        } else if (key == "gamma") {
            if (value == "scale") {
                h.kernel.gamma_mode = GammaMode::scale;
            } else if (value == "auto") {
                h.kernel.gamma_mode = GammaMode::auto_;
            } else {
                h.kernel.gamma_mode = GammaMode::fixed;
                h.kernel.gamma_value = parse_double(value, "grid axis gamma");
            }
        } else if (key == "degree") {
            h.kernel.degree = static_cast<int>(parse_double(value, "grid axis degree"));
        } else if (key == "coef0") {
            h.kernel.coef0 = parse_double(value, "grid axis coef0");
        } else if (key == "tol") {
            h.tol = parse_double(value, "grid axis tol");
        } else if (key == "max_passes") {
            h.max_passes = static_cast<int>(parse_double(value, "grid axis max_passes"));
        } else if (key == "n_components") {
            // pipeline parameter, consumed by the fold preparation
        } else {
            throw FormatError("unknown SVM grid axis '" + key + "'");
        }
    }
    h.validate();
    return h;
}

inline GbtHyper gbt_hyper_from(const Candidate& c, std::uint64_t seed) {
    GbtHyper h;
    h.seed = seed;
    for (const auto& [key, value] : c) {
        if (key == "n_estimators") {
            h.n_estimators = static_cast<int>(parse_double(value, "grid axis n_estimators"));
        } else if (key == "learning_rate") {
            h.learning_rate = parse_double(value, "grid axis learning_rate");
        } else if (key == "colsample_bytree") {
            h.colsample_bytree = parse_double(value, "grid axis colsample_bytree");
        } else if (key == "max_depth") {
            h.max_depth = static_cast<int>(parse_double(value, "grid axis max_depth"));
        } else if (key == "reg_lambda") {
            h.reg_lambda = parse_double(value, "grid axis reg_lambda");
        } else if (key == "min_child_weight") {
            h.min_child_weight = parse_double(value, "grid axis min_child_weight");
        } else if (key == "n_components") {
            // pipeline parameter, consumed by the fold preparation
        } else {
            throw FormatError("unknown GBT grid axis '" + key + "'");
        }
    }
    h.validate();
    return h;
}

}  // namespace beancls
