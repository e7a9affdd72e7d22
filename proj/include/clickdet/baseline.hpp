#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clickdet/error.hpp"
#include "clickdet/num.hpp"
#include "clickdet/serialize.hpp"
#include "clickdet/text.hpp"

namespace clickdet::baseline {

// ---------------------------------------------------------------------------
// TF-IDF
// ---------------------------------------------------------------------------

// Sparse feature vector, entries sorted by feature index.
using SparseVec = std::vector<std::pair<int, double>>;

struct SparseMatrix {
    std::vector<SparseVec> rows;
    int n_features = 0;

    double at(std::size_t row, int feature) const {
        const auto& r = rows[row];
        auto it = std::lower_bound(r.begin(), r.end(), feature,
                                   [](const auto& e, int f) { return e.first < f; });
        return (it != r.end() && it->first == feature) ? it->second : 0.0;
    }
};

struct TfidfModel {
    std::unordered_map<std::string, int> vocabulary;  // term -> dense column index
    std::vector<double> idf;
    std::int64_t doc_count = 0;
};

// Lowercased letter-run terms; shared convention with the EDA splitter.
inline std::vector<std::string> tfidf_terms(const std::string& document) {
    std::vector<std::string> out;
    for (const auto& token : text::split_whitespace(document)) {
        for (auto& run : text::letter_runs(token)) {
            out.push_back(text::lower_ascii(run));
        }
    }
    return out;
}

// Smoothed idf = ln((1 + N) / (1 + df)) + 1, so ubiquitous terms keep a
// positive weight. Column indices follow lexicographic term order.
inline TfidfModel tfidf_fit(const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw_data("tfidf_fit: empty corpus");
    std::map<std::string, std::int64_t> df;
    for (const auto& doc : corpus) {
        std::map<std::string, bool> seen;
        for (const auto& term : tfidf_terms(doc)) seen.emplace(term, true);
        for (const auto& [term, _] : seen) ++df[term];
    }
    TfidfModel model;
    model.doc_count = static_cast<std::int64_t>(corpus.size());
    model.idf.reserve(df.size());
    int index = 0;
    for (const auto& [term, count] : df) {
        model.vocabulary.emplace(term, index++);
        model.idf.push_back(std::log((1.0 + static_cast<double>(model.doc_count)) /
                                     (1.0 + static_cast<double>(count))) + 1.0);
    }
    return model;
}

// term_count * idf per known term, L2-normalized when nonzero. Unseen terms
// are ignored.
inline SparseVec tfidf_transform(const TfidfModel& model, const std::string& document) {
    if (model.doc_count <= 0) throw_data("tfidf_transform: model is not fitted");
    std::map<int, double> counts;
    for (const auto& term : tfidf_terms(document)) {
        auto it = model.vocabulary.find(term);
        if (it != model.vocabulary.end()) counts[it->second] += 1.0;
    }
    SparseVec vec;
    vec.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [idx, c] : counts) {
        const double v = c * model.idf[static_cast<std::size_t>(idx)];
        vec.emplace_back(idx, v);
        norm_sq += v * v;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [idx, v] : vec) v *= inv;
    }
    return vec;
}

inline SparseMatrix tfidf_transform_all(const TfidfModel& model, const std::vector<std::string>& corpus) {
    SparseMatrix X;
    X.n_features = static_cast<int>(model.idf.size());
    X.rows.reserve(corpus.size());
    for (const auto& doc : corpus) X.rows.push_back(tfidf_transform(model, doc));
    return X;
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees (logistic loss, second-order leaf weights)
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf = 0.0;

    bool is_leaf() const { return feature < 0; }
};

using Tree = std::vector<TreeNode>;

struct GbtConfig {
    int rounds = 200;
    int max_depth = 4;
    double shrinkage = 0.1;
    double min_gain = 0.0;
};

// prediction = sigmoid(base_score + shrinkage * sum of leaf values)
struct GbtModel {
    std::vector<Tree> trees;
    double shrinkage = 0.1;
    double base_score = 0.0;  // logit
    int n_features = 0;
    int max_depth = 0;
};

struct GbtTrainResult {
    GbtModel model;
    std::vector<double> round_losses;  // mean logistic loss after each accepted round
};

namespace detail {

// -g/h blows up as hessians vanish; leaves are clamped to keep margins finite.
constexpr double kMaxLeafWeight = 20.0;
constexpr double kMinHessian = 1e-16;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct GradPair {
    double g = 0.0;
    double h = 0.0;
};

inline double leaf_weight(double g_sum, double h_sum) {
    if (h_sum <= kMinHessian) return 0.0;
    const double w = -g_sum / h_sum;
    return std::clamp(w, -kMaxLeafWeight, kMaxLeafWeight);
}

inline double gain_term(double g, double h) {
    return h <= kMinHessian ? 0.0 : g * g / h;
}

// Exact greedy best split over the node's rows. Candidate thresholds are
// midpoints between consecutive distinct observed values, with the implicit
// zeros of the sparse rows forming their own value group. Ties keep the
// first candidate in (feature, threshold) scan order, which is what makes
// the choice deterministic and oracle-comparable.
inline SplitChoice best_split(const SparseMatrix& X, const std::vector<GradPair>& gh,
                              const std::vector<int>& rows, double g_total, double h_total,
                              double min_gain) {
    SplitChoice best;
    const double parent = gain_term(g_total, h_total);

    // (feature, value, row) triples for the node's nonzero entries
    struct Entry {
        int feature;
        double value;
        int row;
    };
    std::vector<Entry> entries;
    for (int r : rows) {
        for (const auto& [f, v] : X.rows[static_cast<std::size_t>(r)]) {
            entries.push_back({f, v, r});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.feature != b.feature) return a.feature < b.feature;
        if (a.value != b.value) return a.value < b.value;
        return a.row < b.row;
    });

    const auto n_rows = static_cast<std::int64_t>(rows.size());
    std::size_t i = 0;
    while (i < entries.size()) {
        const int f = entries[i].feature;
        std::size_t j = i;
        double g_nz = 0.0, h_nz = 0.0;
        std::int64_t c_nz = 0;
        while (j < entries.size() && entries[j].feature == f) {
            g_nz += gh[static_cast<std::size_t>(entries[j].row)].g;
            h_nz += gh[static_cast<std::size_t>(entries[j].row)].h;
            ++c_nz;
            ++j;
        }
        const std::int64_t c_zero = n_rows - c_nz;
        const double g_zero = g_total - g_nz;
        const double h_zero = h_total - h_nz;

        // grouped (value, g, h, count) sequence in ascending value order,
        // with the zero group spliced in at its sorted position
        struct Group {
            double value;
            double g;
            double h;
            std::int64_t count;
        };
        std::vector<Group> groups;
        bool zero_emitted = c_zero == 0;
        for (std::size_t k = i; k < j;) {
            const double v = entries[k].value;
            if (!zero_emitted && v >= 0.0) {
                if (v == 0.0) {
                    // explicit zeros fold into the zero group
                    double g_acc = g_zero, h_acc = h_zero;
                    std::int64_t c_acc = c_zero;
                    while (k < j && entries[k].value == 0.0) {
                        g_acc += gh[static_cast<std::size_t>(entries[k].row)].g;
                        h_acc += gh[static_cast<std::size_t>(entries[k].row)].h;
                        ++c_acc;
                        ++k;
                    }
                    groups.push_back({0.0, g_acc, h_acc, c_acc});
                    zero_emitted = true;
                    continue;
                }
                groups.push_back({0.0, g_zero, h_zero, c_zero});
                zero_emitted = true;
                continue;
            }
            double g_acc = 0.0, h_acc = 0.0;
            std::int64_t c_acc = 0;
            while (k < j && entries[k].value == v) {
                g_acc += gh[static_cast<std::size_t>(entries[k].row)].g;
                h_acc += gh[static_cast<std::size_t>(entries[k].row)].h;
                ++c_acc;
                ++k;
            }
            groups.push_back({v, g_acc, h_acc, c_acc});
        }
        if (!zero_emitted) groups.push_back({0.0, g_zero, h_zero, c_zero});

        double g_left = 0.0, h_left = 0.0;
        for (std::size_t k = 0; k + 1 < groups.size(); ++k) {
            g_left += groups[k].g;
            h_left += groups[k].h;
            const double v_lo = groups[k].value;
            const double v_hi = groups[k + 1].value;
            const double mid = v_lo + (v_hi - v_lo) / 2.0;
            if (!(mid > v_lo) || !(mid <= v_hi)) continue;  // adjacent doubles
            const double g_right = g_total - g_left;
            const double h_right = h_total - h_left;
            const double gain = gain_term(g_left, h_left) + gain_term(g_right, h_right) - parent;
            if (gain > min_gain && (!best.found || gain > best.gain)) {
                best.found = true;
                best.feature = f;
                best.threshold = mid;
                best.gain = gain;
            }
        }
        i = j;
    }
    return best;
}

inline int build_node(Tree& tree, const SparseMatrix& X, const std::vector<GradPair>& gh,
                      const std::vector<int>& rows, int depth, const GbtConfig& config) {
    double g_total = 0.0, h_total = 0.0;
    for (int r : rows) {
        g_total += gh[static_cast<std::size_t>(r)].g;
        h_total += gh[static_cast<std::size_t>(r)].h;
    }

    SplitChoice split;
    if (depth < config.max_depth && rows.size() >= 2) {
        split = best_split(X, gh, rows, g_total, h_total, config.min_gain);
    }
    const int index = static_cast<int>(tree.size());
    tree.emplace_back();
    if (!split.found) {
        tree[static_cast<std::size_t>(index)].leaf = leaf_weight(g_total, h_total);
        return index;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
        const double v = X.at(static_cast<std::size_t>(r), split.feature);
        (v < split.threshold ? left_rows : right_rows).push_back(r);
    }
    tree[static_cast<std::size_t>(index)].feature = split.feature;
    tree[static_cast<std::size_t>(index)].threshold = split.threshold;
    const int left = build_node(tree, X, gh, left_rows, depth + 1, config);
    const int right = build_node(tree, X, gh, right_rows, depth + 1, config);
    tree[static_cast<std::size_t>(index)].left = left;
    tree[static_cast<std::size_t>(index)].right = right;
    return index;
}

inline double tree_value(const Tree& tree, const SparseVec& row) {
    int node = 0;
    while (!tree[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = tree[static_cast<std::size_t>(node)];
        auto it = std::lower_bound(row.begin(), row.end(), n.feature,
                                   [](const auto& e, int f) { return e.first < f; });
        const double v = (it != row.end() && it->first == n.feature) ? it->second : 0.0;
        node = v < n.threshold ? n.left : n.right;
    }
    return tree[static_cast<std::size_t>(node)].leaf;
}

} // namespace detail

// Gradient boosting on logistic loss. Each round fits one depth-limited
// regression tree to the current gradients/hessians; a round whose root
// cannot find a positive-gain split ends training (so degenerate inputs
// yield a base_score-only model). Deterministic for a fixed input order.
inline GbtTrainResult gbt_train(const SparseMatrix& X, const std::vector<int>& y,
                                const GbtConfig& config = {}) {
    if (X.rows.size() != y.size()) throw_data("gbt_train: X/y size mismatch");
    if (y.empty()) throw_data("gbt_train: empty training set");
    bool has_pos = false, has_neg = false;
    for (int v : y) (v ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw_data("gbt_train: both classes must be present");
    if (config.rounds < 0) throw_data("gbt_train: rounds must be >= 0");
    if (config.max_depth < 1) throw_data("gbt_train: max_depth must be >= 1");

    GbtTrainResult result;
    result.model.shrinkage = config.shrinkage;
    result.model.base_score = 0.0;
    result.model.n_features = X.n_features;
    result.model.max_depth = config.max_depth;

    const std::size_t n = y.size();
    std::vector<double> margin(n, result.model.base_score);
    std::vector<detail::GradPair> gh(n);
    std::vector<int> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<int>(i);

    for (int round = 0; round < config.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = num::stable_sigmoid(margin[i]);
            gh[i].g = p - static_cast<double>(y[i]);
            gh[i].h = std::max(p * (1.0 - p), 0.0);
        }
        Tree tree;
        detail::build_node(tree, X, gh, all_rows, 0, config);
        if (tree.size() == 1 && tree.front().is_leaf()) {
            break;  // root could not split: stop boosting
        }
        result.model.trees.push_back(tree);
        double loss_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += config.shrinkage * detail::tree_value(tree, X.rows[i]);
            loss_sum += num::logistic_loss(margin[i], y[i]);
        }
        result.round_losses.push_back(loss_sum / static_cast<double>(n));
    }
    return result;
}

inline double gbt_score(const GbtModel& model, const SparseVec& row) {
    double z = model.base_score;
    for (const auto& tree : model.trees) z += model.shrinkage * detail::tree_value(tree, row);
    return num::stable_sigmoid(z);
}

inline std::vector<double> gbt_predict(const GbtModel& model, const SparseMatrix& X) {
    std::vector<double> out;
    out.reserve(X.rows.size());
    for (const auto& row : X.rows) out.push_back(gbt_score(model, row));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization (versioned binary, round-trip exact)
// ---------------------------------------------------------------------------

namespace detail {
constexpr char kTfidfMagic[4] = {'C', 'D', 'T', 'F'};
constexpr char kGbtMagic[4] = {'C', 'D', 'G', 'B'};
constexpr std::uint32_t kModelVersion = 1;
} // namespace detail

inline void save_tfidf(const TfidfModel& model, const std::filesystem::path& path) {
    std::vector<std::string> terms(model.vocabulary.size());
    for (const auto& [term, idx] : model.vocabulary) terms[static_cast<std::size_t>(idx)] = term;
    std::string buf;
    buf.append(detail::kTfidfMagic, 4);
    serialize::put_u32(buf, detail::kModelVersion);
    serialize::put_u64(buf, static_cast<std::uint64_t>(model.doc_count));
    serialize::put_u64(buf, terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        serialize::put_string(buf, terms[i]);
        serialize::put_f64(buf, model.idf[i]);
    }
    serialize::write_file_atomic(path, buf);
}

inline TfidfModel load_tfidf(const std::filesystem::path& path) {
    const std::string data = serialize::read_file(path);
    serialize::Reader r(data.data(), data.size(), path.string());
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, detail::kTfidfMagic, 4) != 0) throw_data(path.string() + ": not a tfidf model file");
    if (r.get_u32() != detail::kModelVersion) throw_data(path.string() + ": unsupported tfidf version");
    TfidfModel model;
    model.doc_count = static_cast<std::int64_t>(r.get_u64());
    const auto n = r.get_u64();
    model.idf.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string term = r.get_string();
        model.vocabulary.emplace(std::move(term), static_cast<int>(i));
        model.idf.push_back(r.get_f64());
    }
    if (!r.at_end()) throw_data(path.string() + ": trailing bytes");
    return model;
}

inline void save_gbt(const GbtModel& model, const std::filesystem::path& path) {
    std::string buf;
    buf.append(detail::kGbtMagic, 4);
    serialize::put_u32(buf, detail::kModelVersion);
    serialize::put_f64(buf, model.base_score);
    serialize::put_f64(buf, model.shrinkage);
    serialize::put_u32(buf, static_cast<std::uint32_t>(model.n_features));
    serialize::put_u32(buf, static_cast<std::uint32_t>(model.max_depth));
    serialize::put_u32(buf, static_cast<std::uint32_t>(model.trees.size()));
    for (const auto& tree : model.trees) {
        serialize::put_u32(buf, static_cast<std::uint32_t>(tree.size()));
        for (const auto& node : tree) {
            serialize::put_u32(buf, static_cast<std::uint32_t>(node.feature));
            serialize::put_f64(buf, node.threshold);
            serialize::put_u32(buf, static_cast<std::uint32_t>(node.left));
            serialize::put_u32(buf, static_cast<std::uint32_t>(node.right));
            serialize::put_f64(buf, node.leaf);
        }
    }
    serialize::write_file_atomic(path, buf);
}

inline GbtModel load_gbt(const std::filesystem::path& path) {
    const std::string data = serialize::read_file(path);
    serialize::Reader r(data.data(), data.size(), path.string());
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, detail::kGbtMagic, 4) != 0) throw_data(path.string() + ": not a gbt model file");
    if (r.get_u32() != detail::kModelVersion) throw_data(path.string() + ": unsupported gbt version");
    GbtModel model;
    model.base_score = r.get_f64();
    model.shrinkage = r.get_f64();
    model.n_features = static_cast<int>(r.get_u32());
    model.max_depth = static_cast<int>(r.get_u32());
    const auto n_trees = r.get_u32();
    model.trees.reserve(n_trees);
    for (std::uint32_t t = 0; t < n_trees; ++t) {
        const auto n_nodes = r.get_u32();
        Tree tree;
        tree.reserve(n_nodes);
        for (std::uint32_t k = 0; k < n_nodes; ++k) {
            TreeNode node;
            node.feature = static_cast<int>(r.get_u32());
            node.threshold = r.get_f64();
            node.left = static_cast<int>(r.get_u32());
            node.right = static_cast<int>(r.get_u32());
            node.leaf = r.get_f64();
            tree.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    if (!r.at_end()) throw_data(path.string() + ": trailing bytes");
    return model;
}

} // namespace clickdet::baseline
