#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "beancls/kernel.hpp"
#include "beancls/matrix.hpp"
#include "beancls/textio.hpp"

namespace beancls {

struct SvmHyper {
    double C = 1.0;
    KernelSpec kernel;
    double tol = 1e-3;     // KKT tolerance
    int max_passes = 200;  // cap on full examine-all passes

    void validate() const {
        if (!(C > 0.0)) throw DataError("svm: C must be > 0");
        if (!(tol > 0.0)) throw DataError("svm: tol must be > 0");
        if (max_passes < 1) throw DataError("svm: max_passes must be >= 1");
        kernel.validate();
    }
};

/// One soft-margin binary machine. Only rows with alpha > 0 are kept;
/// dual_coefs holds alpha_i * y_i.
struct BinarySvmModel {
    Matrix support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
    bool converged = true;

    double decision(const KernelSpec& spec, double gamma, std::span<const double> x) const {
        double f = bias;
        for (std::size_t i = 0; i < support_vectors.rows(); ++i)
            f += dual_coefs[i] * kernel_eval(spec, gamma, support_vectors.row(i), x);
        return f;
    }
};

namespace detail {

// Platt-style SMO. Working-pair selection is fully ordered (first argmax
// of |E_i - E_j|, then ascending scans), so training is deterministic.
class SmoSolver {
public:
    SmoSolver(const Matrix& x, std::span<const int> y, const SvmHyper& hyper, double gamma)
        : x_(x),
          y_(y),
          hyper_(hyper),
          gamma_(gamma),
          cache_(x, hyper.kernel, gamma),
          alpha_(x.rows(), 0.0),
          errors_(x.rows()) {
        // f(x) = 0 everywhere at alpha = 0, so E_i = -y_i
        for (std::size_t i = 0; i < x.rows(); ++i) errors_[i] = -static_cast<double>(y[i]);
    }

    BinarySvmModel solve() {
        const std::size_t n = x_.rows();
        bool examine_all = true;
        int full_passes = 0;
        bool converged = false;
        while (true) {
            std::size_t changed = 0;
            if (examine_all) {
                if (++full_passes > hyper_.max_passes) break;
                for (std::size_t i = 0; i < n; ++i) changed += examine(i);
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    if (is_free(alpha_[i])) changed += examine(i);
            }
            if (examine_all) {
                if (changed == 0) {
                    converged = true;
                    break;
                }
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        return extract(converged);
    }

private:
    bool is_free(double a) const { return a > 0.0 && a < hyper_.C; }

    std::size_t examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double e2 = errors_[i2];
        const double r2 = e2 * y2;
        const bool violates =
            (r2 < -hyper_.tol && alpha_[i2] < hyper_.C) || (r2 > hyper_.tol && alpha_[i2] > 0.0);
        if (!violates) return 0;

        const std::size_t n = x_.rows();
        // first choice: largest |E1 - E2| among free multipliers
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == i2 || !is_free(alpha_[i])) continue;
            const double gap = std::abs(errors_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return 1;
        // then every free multiplier, then everything, in index order
        for (std::size_t i = 0; i < n; ++i)
            if (i != i2 && is_free(alpha_[i]) && i != best && take_step(i, i2)) return 1;
        for (std::size_t i = 0; i < n; ++i)
            if (i != i2 && !is_free(alpha_[i]) && take_step(i, i2)) return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        const double y1 = y_[i1], y2 = y_[i2];
        const double a1_old = alpha_[i1], a2_old = alpha_[i2];
        const double e1 = errors_[i1], e2 = errors_[i2];
        const double s = y1 * y2;
        const double c = hyper_.C;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c, c + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - c);
            hi = std::min(c, a1_old + a2_old);
        }
        if (lo >= hi) return false;

        // fetch i2's row first so both spans stay live (cache holds >= 2 rows)
        const auto k2 = cache_.row(i2);
        const auto k1 = cache_.row(i1);
        const double k11 = k1[i1], k12 = k1[i2], k22 = k2[i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // flat or concave along the constraint line: the dual maximum
            // sits at one of the clip ends
            const double raw1 = e1 + y1 - bias_;
            const double raw2 = e2 + y2 - bias_;
            const double v1 = raw1 - a1_old * y1 * k11 - a2_old * y2 * k12;
            const double v2 = raw2 - a1_old * y1 * k12 - a2_old * y2 * k22;
            const double gamma_sum = a1_old + s * a2_old;
            auto dual_at = [&](double a2) {
                const double a1 = gamma_sum - s * a2;
                return a1 + a2 - 0.5 * (k11 * a1 * a1 + k22 * a2 * a2) - s * k12 * a1 * a2 -
                       y1 * a1 * v1 - y2 * a2 * v2;
            };
            const double w_lo = dual_at(lo);
            const double w_hi = dual_at(hi);
            constexpr double kEps = 1e-12;
            if (w_lo > w_hi + kEps)
                a2_new = lo;
            else if (w_hi > w_lo + kEps)
                a2_new = hi;
            else
                return false;
        }
        constexpr double kStepEps = 1e-12;
        if (std::abs(a2_new - a2_old) < kStepEps * (a2_new + a2_old + kStepEps)) return false;

        double a1_new = a1_old + s * (a2_old - a2_new);
        if (a1_new < 0.0) a1_new = 0.0;
        if (a1_new > c) a1_new = c;

        const double d1 = y1 * (a1_new - a1_old);
        const double d2 = y2 * (a2_new - a2_old);
        // choose b so the freshly free multiplier sits exactly on its margin
        const double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
        double b_new;
        if (is_free(a1_new))
            b_new = b1;
        else if (is_free(a2_new))
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        const double db = b_new - bias_;
        for (std::size_t i = 0; i < x_.rows(); ++i) errors_[i] += d1 * k1[i] + d2 * k2[i] + db;

        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        bias_ = b_new;
        return true;
    }

    BinarySvmModel extract(bool converged) {
        const std::size_t n = x_.rows();
        // final bias: average over free support vectors; with f = raw - b
        // and E = f - y, each free vector contributes (bias_ - E_i)
        double b_final;
        std::size_t free_count = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_free(alpha_[i])) {
                acc += bias_ - errors_[i];
                ++free_count;
            }
        }
        if (free_count > 0) {
            b_final = acc / static_cast<double>(free_count);
        } else {
            // midpoint of the feasible bias interval from the bound samples
            double b_lo = -1e300, b_hi = 1e300;
            for (std::size_t i = 0; i < n; ++i) {
                const double raw = errors_[i] + static_cast<double>(y_[i]) - bias_;
                const double boundary = static_cast<double>(y_[i]) - raw;
                const bool wants_lower =
                    (alpha_[i] <= 0.0 && y_[i] > 0) || (alpha_[i] >= hyper_.C && y_[i] < 0);
                if (wants_lower)
                    b_lo = std::max(b_lo, boundary);
                else
                    b_hi = std::min(b_hi, boundary);
            }
            b_final = 0.5 * (b_lo + b_hi);
            if (!std::isfinite(b_final)) b_final = bias_;
        }

        BinarySvmModel m;
        m.bias = b_final;
        m.converged = converged;
        std::vector<std::size_t> sv;
        for (std::size_t i = 0; i < n; ++i)
            if (alpha_[i] > 0.0) sv.push_back(i);
        m.support_vectors = Matrix(sv.size(), x_.cols());
        m.dual_coefs.reserve(sv.size());
        for (std::size_t k = 0; k < sv.size(); ++k) {
            for (std::size_t f = 0; f < x_.cols(); ++f) m.support_vectors(k, f) = x_(sv[k], f);
            m.dual_coefs.push_back(alpha_[sv[k]] * static_cast<double>(y_[sv[k]]));
        }
        return m;
    }

    const Matrix& x_;
    std::span<const int> y_;
    SvmHyper hyper_;
    double gamma_;
    KernelCache cache_;
    std::vector<double> alpha_;
    std::vector<double> errors_;  // E_i = f(x_i) - y_i under the running bias
    double bias_ = 0.0;
};

}  // namespace detail

/// Train one binary machine on labels in {-1, +1}.
inline BinarySvmModel smo_train_binary(const Matrix& x, std::span<const int> y, const SvmHyper& hyper,
                                       double gamma) {
    hyper.validate();
    if (x.rows() != y.size()) throw DataError("smo_train_binary: row/label count mismatch");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else throw DataError("smo_train_binary: labels must be +1 or -1");
    }
    if (!pos || !neg) throw DataError("smo_train_binary: both classes must be present");
    detail::SmoSolver solver(x, y, hyper, gamma);
    return solver.solve();
}

}  // namespace beancls
