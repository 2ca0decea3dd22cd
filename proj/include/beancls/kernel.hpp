#pragma once

#include <cmath>
#include <cstddef>
#include <list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

enum class KernelKind { linear, polynomial, rbf, sigmoid };

enum class GammaMode { scale, auto_, fixed };

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    GammaMode gamma_mode = GammaMode::scale;
    double gamma_value = 1.0;  // used when gamma_mode == fixed
    int degree = 3;            // polynomial only
    double coef0 = 0.0;        // polynomial / sigmoid

    void validate() const {
        if (gamma_mode == GammaMode::fixed && !(gamma_value > 0.0))
            throw DataError("kernel: fixed gamma must be > 0");
        if (degree < 1) throw DataError("kernel: degree must be >= 1");
    }
};

inline std::string kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::rbf: return "rbf";
        case KernelKind::sigmoid: return "sigmoid";
    }
    return "?";
}

inline KernelKind kernel_kind_from(const std::string& s) {
    if (s == "linear") return KernelKind::linear;
    if (s == "polynomial" || s == "poly") return KernelKind::polynomial;
    if (s == "rbf") return KernelKind::rbf;
    if (s == "sigmoid") return KernelKind::sigmoid;
    throw FormatError("unknown kernel '" + s + "'");
}

/// auto: 1/n_features. scale: 1/(n_features * pooled population variance
/// of every entry of x).
inline double resolve_gamma(const KernelSpec& spec, const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0) throw DataError("resolve_gamma: empty matrix");
    const double p = static_cast<double>(x.cols());
    switch (spec.gamma_mode) {
        case GammaMode::fixed:
            return spec.gamma_value;
        case GammaMode::auto_:
            return 1.0 / p;
        case GammaMode::scale: {
            double mean = 0.0;
            for (double v : x.values()) mean += v;
            mean /= static_cast<double>(x.values().size());
            double var = 0.0;
            for (double v : x.values()) var += (v - mean) * (v - mean);
            var /= static_cast<double>(x.values().size());
            if (var <= 0.0) throw DataError("resolve_gamma: pooled variance is zero under scale mode");
            return 1.0 / (p * var);
        }
    }
    throw DataError("resolve_gamma: bad gamma mode");
}

inline double kernel_eval(const KernelSpec& spec, double gamma, std::span<const double> x,
                          std::span<const double> z) {
    if (x.size() != z.size())
        throw DataError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(z.size()) + ")");
    switch (spec.kind) {
        case KernelKind::linear:
            return dot(x, z);
        case KernelKind::rbf:
            return std::exp(-gamma * squared_distance(x, z));
        case KernelKind::polynomial:
            return std::pow(gamma * dot(x, z) + spec.coef0, spec.degree);
        case KernelKind::sigmoid:
            return std::tanh(gamma * dot(x, z) + spec.coef0);
    }
    throw DataError("kernel_eval: bad kernel kind");
}

/// Row cache over the Gram matrix of one training set. LRU eviction under
/// a fixed byte budget; the SMO solver touches rows for its working pair
/// on every step, so recently used rows are hot.
class KernelCache {
public:
    KernelCache(const Matrix& x, const KernelSpec& spec, double gamma,
                std::size_t budget_bytes = 256ull * 1024 * 1024)
        : x_(x), spec_(spec), gamma_(gamma) {
        const std::size_t row_bytes = x.rows() * sizeof(double);
        max_rows_ = row_bytes ? std::max<std::size_t>(2, budget_bytes / row_bytes) : 2;
        if (spec.kind == KernelKind::rbf) {
            self_dot_.resize(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) self_dot_[i] = dot(x.row(i), x.row(i));
        }
    }

    std::span<const double> row(std::size_t i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
            return it->second.values;
        }
        if (map_.size() >= max_rows_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            map_.erase(victim);
        }
        Entry e;
        e.values.resize(x_.rows());
        compute_row(i, e.values);
        lru_.push_front(i);
        e.lru_pos = lru_.begin();
        auto [pos, inserted] = map_.emplace(i, std::move(e));
        return pos->second.values;
    }

    double diag(std::size_t i) const {
        if (spec_.kind == KernelKind::rbf) return 1.0;
        return kernel_eval(spec_, gamma_, x_.row(i), x_.row(i));
    }

private:
    struct Entry {
        std::vector<double> values;
        std::list<std::size_t>::iterator lru_pos;
    };

    void compute_row(std::size_t i, std::vector<double>& out) const {
        const auto xi = x_.row(i);
        if (spec_.kind == KernelKind::rbf) {
            for (std::size_t j = 0; j < x_.rows(); ++j) {
                const double d2 = self_dot_[i] + self_dot_[j] - 2.0 * dot(xi, x_.row(j));
                out[j] = std::exp(-gamma_ * (d2 > 0.0 ? d2 : 0.0));
            }
        } else {
            for (std::size_t j = 0; j < x_.rows(); ++j) out[j] = kernel_eval(spec_, gamma_, xi, x_.row(j));
        }
    }

    const Matrix& x_;
    KernelSpec spec_;
    double gamma_;
    std::size_t max_rows_;
    std::vector<double> self_dot_;
    std::unordered_map<std::size_t, Entry> map_;
    std::list<std::size_t> lru_;
};

}  // namespace beancls
