#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "beancls/metrics.hpp"
#include "beancls/nested_cv.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// Ordered key/value pairs echoed into the [config] section so every
/// report is self-describing.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Key-value + embedded CSV blocks, versioned, closed by an [end] marker
/// so truncation is always detectable. Every number is written with
/// shortest round-trip formatting; rewriting the same run reproduces the
/// file byte for byte.
inline void write_cv_report(std::ostream& os, const CvReport& r, const ConfigEcho& config) {
    os << "beancls-report 1\n";
    os << "[config]\n";
    os << "model = " << model_kind_name(r.model) << "\n";
    os << "mode = " << pipeline_mode_name(r.mode) << "\n";
    for (const auto& [k, v] : config) os << k << " = " << v << "\n";

    for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const FoldResult& fr = r.folds[f];
        os << "[fold " << f << "]\n";
        os << "best_params = " << candidate_to_string(fr.best_params) << "\n";
        os << "inner_mean_accuracy = " << fmt_double(fr.inner_mean_accuracy) << "\n";
        os << "accuracy = " << fmt_double(fr.metrics.accuracy) << "\n";
        os << "micro_f1 = " << fmt_double(fr.metrics.micro_f1) << "\n";
        os << "micro_recall = " << fmt_double(fr.metrics.micro_recall) << "\n";
        os << "macro_f1 = " << fmt_double(fr.metrics.macro_f1) << "\n";
        os << "macro_recall = " << fmt_double(fr.metrics.macro_recall) << "\n";
        os << "[fold " << f << " confusion]\n";
        os << "true\\pred";
        for (const auto& name : fr.confusion.class_names) os << "," << name;
        os << "\n";
        for (std::size_t i = 0; i < fr.confusion.counts.size(); ++i) {
            os << fr.confusion.class_names[i];
            for (std::int64_t v : fr.confusion.counts[i]) os << "," << v;
            os << "\n";
        }
    }

    os << "[aggregate]\n";
    os << "folds = " << r.folds.size() << "\n";
    auto agg = [&](const char* name, const CvAggregate& a) {
        os << "mean_" << name << " = " << fmt_double(a.mean) << "\n";
        os << "std_" << name << " = " << fmt_double(a.stddev) << "\n";
    };
    agg("accuracy", r.accuracy);
    agg("micro_f1", r.micro_f1);
    agg("micro_recall", r.micro_recall);
    agg("macro_f1", r.macro_f1);
    agg("macro_recall", r.macro_recall);

    os << "[log]\n";
    os << "disqualified = " << r.disqualified.size() << "\n";
    for (const auto& line : r.disqualified) os << "- " << line << "\n";
    os << "[end]\n";
}

/// Generic parsed form: sections in file order, with `key = value` lines
/// split out and everything else kept raw (confusion rows, log entries).
struct ParsedReport {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> kv;
        std::vector<std::string> raw_lines;
    };
    std::vector<Section> sections;

    const Section* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    static const std::string* value(const Section& s, const std::string& key) {
        for (const auto& [k, v] : s.kv)
            if (k == key) return &v;
        return nullptr;
    }
};

inline ParsedReport parse_cv_report(std::istream& is) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line)) throw FormatError("line 1: empty report");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "beancls-report 1")
        throw FormatError("line 1: expected 'beancls-report 1', got '" + line + "'");

    ParsedReport out;
    bool ended = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (ended && !trim(line).empty())
            throw FormatError("line " + std::to_string(line_no) + ": content after [end]");
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw FormatError("line " + std::to_string(line_no) + ": unterminated section header");
            const std::string name = line.substr(1, line.size() - 2);
            if (name == "end") {
                ended = true;
                continue;
            }
            out.sections.push_back({name, {}, {}});
            continue;
        }
        if (out.sections.empty())
            throw FormatError("line " + std::to_string(line_no) + ": content before first section");
        const auto eq = line.find(" = ");
        if (eq != std::string::npos)
            out.sections.back().kv.emplace_back(line.substr(0, eq), line.substr(eq + 3));
        else
            out.sections.back().raw_lines.push_back(line);
    }
    if (!ended) throw FormatError("line " + std::to_string(line_no) + ": missing [end] marker (truncated?)");
    return out;
}

}  // namespace beancls
