#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "beancls/dataset.hpp"
#include "beancls/smo.hpp"
#include "beancls/textio.hpp"

namespace beancls {

/// One-vs-one multiclass SVM: one binary machine per unordered class
/// pair, stored in sorted (a, b) order. The machine for (a, b) is trained
/// with +1 for class a, so a positive decision votes a.
struct SvmModel {
    struct PairMachine {
        int class_a = 0;
        int class_b = 0;
        BinarySvmModel machine;
    };

    std::vector<std::string> class_names;
    KernelSpec kernel;
    double gamma = 0.0;  // resolved numeric value
    SvmHyper hyper;
    std::size_t n_features = 0;
    std::vector<PairMachine> machines;

    bool all_converged() const {
        for (const auto& pm : machines)
            if (!pm.machine.converged) return false;
        return true;
    }
};

inline SvmModel svm_train(const Dataset& d, const SvmHyper& hyper) {
    hyper.validate();
    const std::size_t k = d.n_classes();
    if (k < 2) throw DataError("svm_train: need at least 2 classes");

    SvmModel model;
    model.class_names = d.class_names;
    model.kernel = hyper.kernel;
    model.gamma = resolve_gamma(hyper.kernel, d.features);
    model.hyper = hyper;
    model.n_features = d.n_features();

    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t r = 0; r < d.n_rows(); ++r) by_class[static_cast<std::size_t>(d.labels[r])].push_back(r);

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            const auto& ra = by_class[a];
            const auto& rb = by_class[b];
            if (ra.empty() || rb.empty())
                throw DataError("svm_train: class '" + d.class_names[ra.empty() ? a : b] + "' has no rows");
            Matrix x(ra.size() + rb.size(), d.n_features());
            std::vector<int> y(ra.size() + rb.size());
            std::size_t at = 0;
            for (std::size_t r : ra) {
                for (std::size_t f = 0; f < d.n_features(); ++f) x(at, f) = d.features(r, f);
                y[at++] = 1;
            }
            for (std::size_t r : rb) {
                for (std::size_t f = 0; f < d.n_features(); ++f) x(at, f) = d.features(r, f);
                y[at++] = -1;
            }
            SvmModel::PairMachine pm;
            pm.class_a = static_cast<int>(a);
            pm.class_b = static_cast<int>(b);
            pm.machine = smo_train_binary(x, y, hyper, model.gamma);
            model.machines.push_back(std::move(pm));
        }
    }
    return model;
}

/// Majority vote over the pairwise machines; ties go to the class with
/// the larger summed |decision| over the machines it won, then to the
/// lowest class id.
inline std::vector<int> svm_predict(const SvmModel& m, const Matrix& x) {
    if (x.cols() != m.n_features)
        throw DataError("svm_predict: expected " + std::to_string(m.n_features) + " features, got " +
                        std::to_string(x.cols()));
    const std::size_t k = m.class_names.size();
    std::vector<int> out;
    out.reserve(x.rows());
    std::vector<int> votes(k);
    std::vector<double> magnitude(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0);
        std::fill(magnitude.begin(), magnitude.end(), 0.0);
        for (const auto& pm : m.machines) {
            const double f = pm.machine.decision(m.kernel, m.gamma, x.row(r));
            const int winner = f > 0.0 ? pm.class_a : pm.class_b;
            ++votes[static_cast<std::size_t>(winner)];
            magnitude[static_cast<std::size_t>(winner)] += std::abs(f);
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
            if (votes[c] > votes[best] ||
                (votes[c] == votes[best] && magnitude[c] > magnitude[best]))
                best = c;
        }
        out.push_back(static_cast<int>(best));
    }
    return out;
}

// --- serialization (text, versioned; doubles round-trip bit-exactly) ---

inline void svm_save(const SvmModel& m, std::ostream& os) {
    os << "beancls-svm 1\n";
    os << "kernel " << kernel_kind_name(m.kernel.kind) << "\n";
    os << "degree " << m.kernel.degree << "\n";
    os << "coef0 " << fmt_double(m.kernel.coef0) << "\n";
    os << "gamma " << fmt_double(m.gamma) << "\n";
    os << "C " << fmt_double(m.hyper.C) << "\n";
    os << "tol " << fmt_double(m.hyper.tol) << "\n";
    os << "max_passes " << m.hyper.max_passes << "\n";
    os << "n_features " << m.n_features << "\n";
    os << "classes " << m.class_names.size() << "\n";
    for (const auto& name : m.class_names) os << name << "\n";
    os << "machines " << m.machines.size() << "\n";
    for (const auto& pm : m.machines) {
        os << "machine " << pm.class_a << " " << pm.class_b << " " << pm.machine.support_vectors.rows()
           << " " << fmt_double(pm.machine.bias) << " " << (pm.machine.converged ? 1 : 0) << "\n";
        for (std::size_t i = 0; i < pm.machine.support_vectors.rows(); ++i) {
            os << fmt_double(pm.machine.dual_coefs[i]);
            for (double v : pm.machine.support_vectors.row(i)) os << " " << fmt_double(v);
            os << "\n";
        }
    }
    os << "end\n";
}

namespace detail {

inline std::string read_line_or_throw(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError(std::string("svm model: truncated before ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace detail

inline SvmModel svm_load(std::istream& is) {
    using detail::read_line_or_throw;
    if (read_line_or_throw(is, "header") != "beancls-svm 1")
        throw FormatError("svm model: bad header");
    SvmModel m;
    auto kv = [&](const char* key) {
        const std::string line = read_line_or_throw(is, key);
        const auto sp = line.find(' ');
        if (sp == std::string::npos || line.substr(0, sp) != key)
            throw FormatError("svm model: expected '" + std::string(key) + "', got '" + line + "'");
        return line.substr(sp + 1);
    };
    m.kernel.kind = kernel_kind_from(kv("kernel"));
    m.kernel.degree = static_cast<int>(parse_double(kv("degree"), "degree"));
    m.kernel.coef0 = parse_double(kv("coef0"), "coef0");
    m.gamma = parse_double(kv("gamma"), "gamma");
    m.kernel.gamma_mode = GammaMode::fixed;
    m.kernel.gamma_value = m.gamma;
    m.hyper.C = parse_double(kv("C"), "C");
    m.hyper.tol = parse_double(kv("tol"), "tol");
    m.hyper.max_passes = static_cast<int>(parse_double(kv("max_passes"), "max_passes"));
    m.hyper.kernel = m.kernel;
    m.n_features = static_cast<std::size_t>(parse_double(kv("n_features"), "n_features"));
    const std::size_t n_classes = static_cast<std::size_t>(parse_double(kv("classes"), "classes"));
    for (std::size_t i = 0; i < n_classes; ++i)
        m.class_names.push_back(read_line_or_throw(is, "class name"));
    const std::size_t n_machines = static_cast<std::size_t>(parse_double(kv("machines"), "machines"));
    for (std::size_t i = 0; i < n_machines; ++i) {
        const std::string line = read_line_or_throw(is, "machine");
        const auto parts = split(line, ' ');
        if (parts.size() != 6 || parts[0] != "machine") throw FormatError("svm model: bad machine line");
        SvmModel::PairMachine pm;
        pm.class_a = static_cast<int>(parse_double(parts[1], "class_a"));
        pm.class_b = static_cast<int>(parse_double(parts[2], "class_b"));
        const std::size_t n_sv = static_cast<std::size_t>(parse_double(parts[3], "n_sv"));
        pm.machine.bias = parse_double(parts[4], "bias");
        pm.machine.converged = parts[5] == "1";
        pm.machine.support_vectors = Matrix(n_sv, m.n_features);
        pm.machine.dual_coefs.reserve(n_sv);
        for (std::size_t s = 0; s < n_sv; ++s) {
            const auto cells = split(read_line_or_throw(is, "support vector"), ' ');
            if (cells.size() != m.n_features + 1) throw FormatError("svm model: bad support vector line");
            pm.machine.dual_coefs.push_back(parse_double(cells[0], "dual coef"));
            for (std::size_t f = 0; f < m.n_features; ++f)
                pm.machine.support_vectors(s, f) = parse_double(cells[f + 1], "support vector value");
        }
        m.machines.push_back(std::move(pm));
    }
    if (read_line_or_throw(is, "end") != "end") throw FormatError("svm model: missing end marker");
    return m;
}

}  // namespace beancls
