#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beancls/dataset.hpp"
#include "beancls/matrix.hpp"
#include "beancls/prng.hpp"
#include "beancls/textio.hpp"

namespace beancls {

struct GbtHyper {
    int n_estimators = 100;
    double learning_rate = 0.1;
    double colsample_bytree = 1.0;
    int max_depth = 10;
    double reg_lambda = 1.0;
    double min_child_weight = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_estimators < 1) throw DataError("gbt: n_estimators must be >= 1");
        if (!(learning_rate > 0.0) || learning_rate > 1.0)
            throw DataError("gbt: learning_rate must be in (0, 1]");
        if (!(colsample_bytree > 0.0) || colsample_bytree > 1.0)
            throw DataError("gbt: colsample_bytree must be in (0, 1]");
        if (max_depth < 1) throw DataError("gbt: max_depth must be >= 1");
        if (reg_lambda < 0.0) throw DataError("gbt: reg_lambda must be >= 0");
        if (min_child_weight < 0.0) throw DataError("gbt: min_child_weight must be >= 0");
    }
};

/// Binary regression tree with axis-aligned midpoint splits. Internal
/// nodes have feature >= 0; rows with value < threshold go left.
struct RegressionTree {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double weight = 0.0;
    };
    std::vector<Node> nodes;
    std::vector<int> columns_used;

    double predict_row(std::span<const double> x) const {
        int cur = 0;
        while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
            const Node& nd = nodes[static_cast<std::size_t>(cur)];
            cur = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(cur)].weight;
    }
};

/// Softmax cross-entropy derivatives:
/// grad = p - onehot(label), hess = p * (1 - p), both n_rows x n_classes.
inline std::pair<Matrix, Matrix> softmax_grad_hess(const Matrix& raw_scores,
                                                   std::span<const int> labels) {
    if (raw_scores.rows() != labels.size())
        throw DataError("softmax_grad_hess: score rows != label count");
    const std::size_t n = raw_scores.rows(), k = raw_scores.cols();
    Matrix grad(n, k), hess(n, k);
    std::vector<double> p(k);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = raw_scores(i, 0);
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, raw_scores(i, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            p[c] = std::exp(raw_scores(i, c) - mx);
            denom += p[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            const double pc = p[c] / denom;
            grad(i, c) = pc - (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0);
            hess(i, c) = pc * (1.0 - pc);
        }
    }
    return {std::move(grad), std::move(hess)};
}

namespace detail {

/// Per-training-set state shared by every tree: row ids sorted by feature
/// value (ties by row id) so splits never re-sort.
struct TreeDesign {
    const Matrix& x;
    std::vector<std::vector<int>> sorted_rows;

    explicit TreeDesign(const Matrix& features) : x(features) {
        const std::size_t n = x.rows(), p = x.cols();
        sorted_rows.resize(p);
        for (std::size_t f = 0; f < p; ++f) {
            auto& order = sorted_rows[f];
            order.resize(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return x(static_cast<std::size_t>(a), f) < x(static_cast<std::size_t>(b), f);
            });
        }
    }
};

inline std::vector<int> sample_columns(std::size_t n_features, double colsample, std::uint64_t tree_seed) {
    std::vector<int> cols(n_features);
    std::iota(cols.begin(), cols.end(), 0);
    if (colsample >= 1.0) return cols;  // no subsampling, seed-independent
    const std::size_t m =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(colsample * static_cast<double>(n_features))));
    Xorshift64Star rng(tree_seed);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n_features - i));
        std::swap(cols[i], cols[j]);
    }
    cols.resize(m);
    std::sort(cols.begin(), cols.end());
    return cols;
}

/// Exact greedy builder, level by level. For each level one pass per
/// candidate feature walks the pre-sorted order once, maintaining prefix
/// gradient/hessian sums per node; thresholds are midpoints between
/// consecutive distinct values inside the node. `leaf_of_row`, when
/// given, receives the leaf node id of every training row.
inline RegressionTree build_tree_impl(const TreeDesign& design, std::span<const double> grad,
                                      std::span<const double> hess, const GbtHyper& h,
                                      std::uint64_t tree_seed, std::vector<int>* leaf_of_row) {
    const std::size_t n = design.x.rows();
    const double lambda = h.reg_lambda;

    RegressionTree tree;
    tree.columns_used = sample_columns(design.x.cols(), h.colsample_bytree, tree_seed);
    tree.nodes.push_back({});

    std::vector<int> node_of_row(n, 0);
    std::vector<int> depth_of_node{0};
    std::vector<int> level{0};

    struct SplitChoice {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };
    struct Running {
        double g_left = 0.0;
        double h_left = 0.0;
        double last_value = 0.0;
        bool seen = false;
    };

    while (!level.empty()) {
        const std::size_t width = level.size();
        std::vector<int> slot_of_node(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < width; ++s) slot_of_node[static_cast<std::size_t>(level[s])] = static_cast<int>(s);

        std::vector<double> g_total(width, 0.0), h_total(width, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const int slot = slot_of_node[static_cast<std::size_t>(node_of_row[r])];
            if (slot < 0) continue;
            g_total[static_cast<std::size_t>(slot)] += grad[r];
            h_total[static_cast<std::size_t>(slot)] += hess[r];
        }

        std::vector<SplitChoice> best(width);
        std::vector<Running> run(width);
        for (int f : tree.columns_used) {
            const bool any_splittable = [&] {
                for (std::size_t s = 0; s < width; ++s)
                    if (depth_of_node[static_cast<std::size_t>(level[s])] < h.max_depth) return true;
                return false;
            }();
            if (!any_splittable) break;
            for (auto& rs : run) rs = Running{};
            for (const int r : design.sorted_rows[static_cast<std::size_t>(f)]) {
                const int node = node_of_row[static_cast<std::size_t>(r)];
                const int slot = slot_of_node[static_cast<std::size_t>(node)];
                if (slot < 0 || depth_of_node[static_cast<std::size_t>(node)] >= h.max_depth) continue;
                Running& rs = run[static_cast<std::size_t>(slot)];
                const double v = design.x(static_cast<std::size_t>(r), static_cast<std::size_t>(f));
                if (rs.seen && v > rs.last_value) {
                    const double h_right = h_total[static_cast<std::size_t>(slot)] - rs.h_left;
                    if (rs.h_left >= h.min_child_weight && h_right >= h.min_child_weight) {
                        const double g_right = g_total[static_cast<std::size_t>(slot)] - rs.g_left;
                        const double g_all = g_total[static_cast<std::size_t>(slot)];
                        const double h_all = h_total[static_cast<std::size_t>(slot)];
                        const double gain = 0.5 * (rs.g_left * rs.g_left / (rs.h_left + lambda) +
                                                   g_right * g_right / (h_right + lambda) -
                                                   g_all * g_all / (h_all + lambda));
                        SplitChoice& bc = best[static_cast<std::size_t>(slot)];
                        if (gain > bc.gain) {  // strict: earliest feature, lowest threshold on ties
                            bc.gain = gain;
                            bc.feature = f;
                            bc.threshold = 0.5 * (rs.last_value + v);
                        }
                    }
                }
                rs.g_left += grad[static_cast<std::size_t>(r)];
                rs.h_left += hess[static_cast<std::size_t>(r)];
                rs.last_value = v;
                rs.seen = true;
            }
        }

        std::vector<int> next_level;
        for (std::size_t s = 0; s < width; ++s) {
            const int node = level[s];
            auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            const SplitChoice& bc = best[s];
            if (bc.feature >= 0 && bc.gain > 0.0) {
                nd.feature = bc.feature;
                nd.threshold = bc.threshold;
                nd.left = static_cast<int>(tree.nodes.size());
                nd.right = nd.left + 1;
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                depth_of_node.push_back(depth_of_node[static_cast<std::size_t>(node)] + 1);
                depth_of_node.push_back(depth_of_node[static_cast<std::size_t>(node)] + 1);
                next_level.push_back(nd.left);
                next_level.push_back(nd.right);
            } else {
                nd.weight = -g_total[s] / (h_total[s] + lambda);
            }
        }

        if (!next_level.empty()) {
            for (std::size_t r = 0; r < n; ++r) {
                const int node = node_of_row[r];
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                if (slot_of_node[static_cast<std::size_t>(node)] >= 0 && nd.feature >= 0)
                    node_of_row[r] = design.x(r, static_cast<std::size_t>(nd.feature)) < nd.threshold
                                         ? nd.left
                                         : nd.right;
            }
        }
        level = std::move(next_level);
    }

    if (leaf_of_row) *leaf_of_row = std::move(node_of_row);
    return tree;
}

}  // namespace detail

/// Fit a single second-order regression tree to (grad, hess).
inline RegressionTree build_tree(const Matrix& x, std::span<const double> grad,
                                 std::span<const double> hess, const GbtHyper& h,
                                 std::uint64_t tree_seed) {
    h.validate();
    if (grad.size() != x.rows() || hess.size() != x.rows())
        throw DataError("build_tree: grad/hess length must match rows");
    detail::TreeDesign design(x);
    return detail::build_tree_impl(design, grad, hess, h, tree_seed, nullptr);
}

/// Boosted ensemble: n_estimators rounds x n_classes trees, round-major.
struct GbtModel {
    GbtHyper hyper;
    int n_classes = 0;
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    std::vector<double> train_log_loss;  // one entry per round
    std::vector<std::string> class_names;
};

inline double multiclass_log_loss(const Matrix& scores, std::span<const int> labels) {
    const std::size_t n = scores.rows(), k = scores.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = scores(i, 0);
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, scores(i, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < k; ++c) denom += std::exp(scores(i, c) - mx);
        total += std::log(denom) - (scores(i, static_cast<std::size_t>(labels[i])) - mx);
    }
    return total / static_cast<double>(n);
}

inline GbtModel gbt_train(const Dataset& d, const GbtHyper& h) {
    h.validate();
    if (d.n_classes() < 2) throw DataError("gbt_train: need at least 2 classes");
    const std::size_t n = d.n_rows();
    const std::size_t k = d.n_classes();

    GbtModel model;
    model.hyper = h;
    model.n_classes = static_cast<int>(k);
    model.class_names = d.class_names;
    model.trees.reserve(static_cast<std::size_t>(h.n_estimators) * k);

    detail::TreeDesign design(d.features);
    Matrix scores(n, k, model.base_score);
    std::vector<double> grad_col(n), hess_col(n);
    std::vector<int> leaf_of_row;

    for (int round = 0; round < h.n_estimators; ++round) {
        const auto [grad, hess] = softmax_grad_hess(scores, d.labels);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t r = 0; r < n; ++r) {
                grad_col[r] = grad(r, c);
                hess_col[r] = hess(r, c);
            }
            const std::uint64_t tree_seed =
                h.seed ^ static_cast<std::uint64_t>(round * static_cast<int>(k) + static_cast<int>(c));
            RegressionTree tree =
                detail::build_tree_impl(design, grad_col, hess_col, h, tree_seed, &leaf_of_row);
            for (std::size_t r = 0; r < n; ++r)
                scores(r, c) += h.learning_rate *
                                tree.nodes[static_cast<std::size_t>(leaf_of_row[r])].weight;
            model.trees.push_back(std::move(tree));
        }
        model.train_log_loss.push_back(multiclass_log_loss(scores, d.labels));
    }
    return model;
}

/// Raw scores -> softmax probabilities -> argmax (ties to the lowest id).
inline std::pair<std::vector<int>, Matrix> gbt_predict(const GbtModel& m, const Matrix& x) {
    const std::size_t k = static_cast<std::size_t>(m.n_classes);
    const std::size_t n = x.rows();
    Matrix scores(n, k, m.base_score);
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
        const std::size_t c = t % k;
        const RegressionTree& tree = m.trees[t];
        for (std::size_t r = 0; r < n; ++r)
            scores(r, c) += m.hyper.learning_rate * tree.predict_row(x.row(r));
    }
    Matrix probs(n, k);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = scores(i, 0);
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, scores(i, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < k; ++c) denom += std::exp(scores(i, c) - mx);
        std::size_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
            probs(i, c) = std::exp(scores(i, c) - mx) / denom;
            if (probs(i, c) > probs(i, arg)) arg = c;
        }
        labels[i] = static_cast<int>(arg);
    }
    return {std::move(labels), std::move(probs)};
}

// --- serialization ---

inline void gbt_save(const GbtModel& m, std::ostream& os) {
    os << "beancls-gbt 1\n";
    os << "n_estimators " << m.hyper.n_estimators << "\n";
    os << "learning_rate " << fmt_double(m.hyper.learning_rate) << "\n";
    os << "colsample_bytree " << fmt_double(m.hyper.colsample_bytree) << "\n";
    os << "max_depth " << m.hyper.max_depth << "\n";
    os << "reg_lambda " << fmt_double(m.hyper.reg_lambda) << "\n";
    os << "min_child_weight " << fmt_double(m.hyper.min_child_weight) << "\n";
    os << "seed " << m.hyper.seed << "\n";
    os << "base_score " << fmt_double(m.base_score) << "\n";
    os << "classes " << m.class_names.size() << "\n";
    for (const auto& name : m.class_names) os << name << "\n";
    os << "trees " << m.trees.size() << "\n";
    for (const auto& tree : m.trees) {
        os << "tree " << tree.nodes.size() << " columns";
        for (int c : tree.columns_used) os << " " << c;
        os << "\n";
        for (const auto& nd : tree.nodes)
            os << nd.feature << " " << fmt_double(nd.threshold) << " " << nd.left << " " << nd.right << " "
               << fmt_double(nd.weight) << "\n";
    }
    os << "end\n";
}

inline GbtModel gbt_load(std::istream& is) {
    auto next_line = [&](const char* what) {
        std::string line;
        if (!std::getline(is, line)) throw FormatError(std::string("gbt model: truncated before ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next_line("header") != "beancls-gbt 1") throw FormatError("gbt model: bad header");
    auto kv = [&](const char* key) {
        const std::string line = next_line(key);
        const auto sp = line.find(' ');
        if (sp == std::string::npos || line.substr(0, sp) != key)
            throw FormatError("gbt model: expected '" + std::string(key) + "', got '" + line + "'");
        return line.substr(sp + 1);
    };
    GbtModel m;
    m.hyper.n_estimators = static_cast<int>(parse_double(kv("n_estimators"), "n_estimators"));
    m.hyper.learning_rate = parse_double(kv("learning_rate"), "learning_rate");
    m.hyper.colsample_bytree = parse_double(kv("colsample_bytree"), "colsample_bytree");
    m.hyper.max_depth = static_cast<int>(parse_double(kv("max_depth"), "max_depth"));
    m.hyper.reg_lambda = parse_double(kv("reg_lambda"), "reg_lambda");
    m.hyper.min_child_weight = parse_double(kv("min_child_weight"), "min_child_weight");
    {
        long long seed = 0;
        if (!try_parse_long(kv("seed"), seed)) throw FormatError("gbt model: bad seed");
        m.hyper.seed = static_cast<std::uint64_t>(seed);
    }
    m.base_score = parse_double(kv("base_score"), "base_score");
    const std::size_t n_classes = static_cast<std::size_t>(parse_double(kv("classes"), "classes"));
    m.n_classes = static_cast<int>(n_classes);
    for (std::size_t i = 0; i < n_classes; ++i) m.class_names.push_back(next_line("class name"));
    const std::size_t n_trees = static_cast<std::size_t>(parse_double(kv("trees"), "trees"));
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto parts = split(next_line("tree"), ' ');
        if (parts.size() < 3 || parts[0] != "tree" || parts[2] != "columns")
            throw FormatError("gbt model: bad tree line");
        RegressionTree tree;
        const std::size_t n_nodes = static_cast<std::size_t>(parse_double(parts[1], "node count"));
        for (std::size_t i = 3; i < parts.size(); ++i)
            tree.columns_used.push_back(static_cast<int>(parse_double(parts[i], "column id")));
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const auto cells = split(next_line("node"), ' ');
            if (cells.size() != 5) throw FormatError("gbt model: bad node line");
            RegressionTree::Node nd;
            nd.feature = static_cast<int>(parse_double(cells[0], "feature"));
            nd.threshold = parse_double(cells[1], "threshold");
            nd.left = static_cast<int>(parse_double(cells[2], "left"));
            nd.right = static_cast<int>(parse_double(cells[3], "right"));
            nd.weight = parse_double(cells[4], "weight");
            tree.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(tree));
    }
    if (next_line("end") != "end") throw FormatError("gbt model: missing end marker");
    return m;
}

}  // namespace beancls
