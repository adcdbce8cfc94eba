// Random forest over graph embeddings: Gini-impurity CART trees grown on
// bootstrap resamples with random feature subsets per node, majority voting
// across trees. All randomness derives from per-tree seeds (base seed + tree
// index), so a parallel fit is schedule-independent.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gnnad/common.hpp"
#include "gnnad/matrix.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

/// Gini impurity 1 - sum_c p_c^2 of a label multiset.
inline double gini(std::span<const int> labels) {
    if (labels.empty()) throw std::invalid_argument("gini: empty input");
    std::vector<size_t> counts;
    for (int l : labels) {
        if (l < 0) throw std::invalid_argument("gini: negative label");
        if (static_cast<size_t>(l) >= counts.size()) counts.resize(static_cast<size_t>(l) + 1, 0);
        ++counts[static_cast<size_t>(l)];
    }
    double sum_sq = 0.0;
    const double n = static_cast<double>(labels.size());
    for (size_t c : counts) {
        double p = static_cast<double>(c) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct SplitDecision {
    size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;  // parent impurity minus weighted child impurity
};

/// Greedy split search over the given candidate features. Thresholds are
/// midpoints between consecutive distinct sorted values; the weighted child
/// Gini is minimized. Returns nullopt when no split reduces impurity (or
/// none satisfies min_leaf). Ties break toward the lower feature index, then
/// the lower threshold.
inline std::optional<SplitDecision> best_split(const Matrix& x, std::span<const size_t> rows,
                                               std::span<const int> y,
                                               std::span<const size_t> candidate_features,
                                               size_t class_count, size_t min_leaf = 1) {
    if (rows.size() < 2) return std::nullopt;
    const double n = static_cast<double>(rows.size());

    std::vector<size_t> parent_counts(class_count, 0);
    for (size_t r : rows) ++parent_counts[static_cast<size_t>(y[r])];
    double parent_sq = 0.0;
    for (size_t c : parent_counts) parent_sq += static_cast<double>(c) * static_cast<double>(c);
    const double parent_gini = 1.0 - parent_sq / (n * n);

    std::vector<size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::optional<SplitDecision> best;
    std::vector<std::pair<double, int>> ordered(rows.size());
    std::vector<size_t> left_counts(class_count);
    for (size_t f : features) {
        for (size_t i = 0; i < rows.size(); ++i)
            ordered[i] = {x(rows[i], f), y[rows[i]]};
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::fill(left_counts.begin(), left_counts.end(), 0);
        double left_sq = 0.0, right_sq = parent_sq;
        for (size_t i = 0; i + 1 < ordered.size(); ++i) {
            // move point i to the left side, maintaining sums of squared counts
            const auto cls = static_cast<size_t>(ordered[i].second);
            const double right_count =
                static_cast<double>(parent_counts[cls] - left_counts[cls]);
            left_sq += 2.0 * static_cast<double>(left_counts[cls]) + 1.0;
            right_sq -= 2.0 * right_count - 1.0;
            ++left_counts[cls];

            if (ordered[i].first == ordered[i + 1].first) continue;  // not a boundary
            const size_t nl = i + 1, nr = rows.size() - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double weighted =
                (static_cast<double>(nl) - left_sq / static_cast<double>(nl)) / n +
                (static_cast<double>(nr) - right_sq / static_cast<double>(nr)) / n;
            const double gain = parent_gini - weighted;
            if (gain <= 0.0) continue;
            const double threshold = ordered[i].first + (ordered[i + 1].first - ordered[i].first) / 2.0;
            if (!best || gain > best->gain)
                best = SplitDecision{f, threshold, gain};
        }
    }
    return best;
}

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    size_t left = 0, right = 0;
    std::vector<size_t> counts;  // leaf only: class histogram

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // root at index 0

    const TreeNode& leaf_for(const double* x) const {
        size_t i = 0;
        while (!nodes[i].is_leaf())
            i = x[static_cast<size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                               : nodes[i].right;
        return nodes[i];
    }
};

struct RandomForestConfig {
    size_t tree_count = 100;
    size_t max_depth = 0;           // 0 = unlimited
    size_t min_samples_leaf = 1;
    size_t features_per_split = 0;  // 0 = ceil(sqrt(dimension))
    bool bootstrap = true;
    bool soft_voting = false;       // average leaf distributions instead of hard votes
    uint64_t seed = 0;
};

class RandomForest {
public:
    RandomForest() = default;

    static RandomForest fit(const Matrix& x, const std::vector<int>& y, RandomForestConfig cfg);

    size_t dimension() const { return dimension_; }
    size_t class_count() const { return class_count_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    const RandomForestConfig& config() const { return config_; }

    /// Soft voting is a prediction-time choice; flipping it never refits.
    void set_soft_voting(bool on) { config_.soft_voting = on; }

    /// Per-class vote tallies (hard voting: each tree's leaf majority).
    std::vector<double> vote_shares(std::span<const double> x) const {
        if (x.size() != dimension_)
            throw std::invalid_argument("forest predict: dimension " + std::to_string(x.size()) +
                                        " != trained " + std::to_string(dimension_));
        std::vector<double> shares(class_count_, 0.0);
        for (const auto& tree : trees_) {
            const auto& leaf = tree.leaf_for(x.data());
            if (config_.soft_voting) {
                double total = 0.0;
                for (size_t c : leaf.counts) total += static_cast<double>(c);
                for (size_t c = 0; c < class_count_; ++c)
                    shares[c] += static_cast<double>(leaf.counts[c]) / total;
            } else {
                shares[majority(leaf.counts)] += 1.0;
            }
        }
        for (double& s : shares) s /= static_cast<double>(trees_.size());
        return shares;
    }

    std::vector<double> predict_proba(std::span<const double> x) const { return vote_shares(x); }

    /// Plurality vote; ties break toward the lowest class id.
    int predict(std::span<const double> x) const {
        auto shares = vote_shares(x);
        size_t best = 0;
        for (size_t c = 1; c < shares.size(); ++c)
            if (shares[c] > shares[best]) best = c;
        return static_cast<int>(best);
    }

    std::vector<int> predict_rows(const Matrix& x) const {
        std::vector<int> out(x.rows());
        for (size_t i = 0; i < x.rows(); ++i) out[i] = predict({x.row(i), x.cols()});
        return out;
    }

    std::string save() const;
    static RandomForest load(std::string_view text);

private:
    static size_t majority(const std::vector<size_t>& counts) {
        size_t best = 0;
        for (size_t c = 1; c < counts.size(); ++c)
            if (counts[c] > counts[best]) best = c;
        return best;
    }

    friend DecisionTree grow_tree(const Matrix&, const std::vector<int>&, std::vector<size_t>,
                                  size_t, const RandomForestConfig&, size_t, SeededRng&);

    std::vector<DecisionTree> trees_;
    size_t dimension_ = 0;
    size_t class_count_ = 0;
    RandomForestConfig config_;
};

/// Depth-first greedy CART growth; consumes rng once per node for the
/// feature-subset draw.
inline DecisionTree grow_tree(const Matrix& x, const std::vector<int>& y,
                              std::vector<size_t> root_rows, size_t class_count,
                              const RandomForestConfig& cfg, size_t features_per_split,
                              SeededRng& rng) {
    DecisionTree tree;

    struct Todo {
        std::vector<size_t> rows;
        size_t depth;
        size_t node_index;
    };

    // explicit stack, children pushed right-then-left so growth order matches
    // a left-first recursion
    auto make_leaf = [&](const std::vector<size_t>& rows, size_t node_index) {
        tree.nodes[node_index].feature = -1;
        tree.nodes[node_index].counts.assign(class_count, 0);
        for (size_t r : rows) ++tree.nodes[node_index].counts[static_cast<size_t>(y[r])];
    };

    std::vector<Todo> stack;
    tree.nodes.emplace_back();
    stack.push_back({std::move(root_rows), 0, 0});
    while (!stack.empty()) {
        Todo todo = std::move(stack.back());
        stack.pop_back();

        bool pure = true;
        for (size_t i = 1; i < todo.rows.size(); ++i)
            if (y[todo.rows[i]] != y[todo.rows[0]]) {
                pure = false;
                break;
            }
        const bool depth_capped = cfg.max_depth > 0 && todo.depth >= cfg.max_depth;
        if (pure || depth_capped || todo.rows.size() < 2 * cfg.min_samples_leaf ||
            todo.rows.size() < 2) {
            make_leaf(todo.rows, todo.node_index);
            continue;
        }

        std::vector<size_t> candidates =
            features_per_split >= x.cols()
                ? [&] {
                      std::vector<size_t> all(x.cols());
                      for (size_t i = 0; i < all.size(); ++i) all[i] = i;
                      return all;
                  }()
                : rng.sample_without_replacement(x.cols(), features_per_split);

        auto split = best_split(x, todo.rows, y, candidates, class_count, cfg.min_samples_leaf);
        if (!split) {
            make_leaf(todo.rows, todo.node_index);
            continue;
        }

        std::vector<size_t> left_rows, right_rows;
        for (size_t r : todo.rows) {
            if (x(r, split->feature) <= split->threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        tree.nodes[todo.node_index].feature = static_cast<int>(split->feature);
        tree.nodes[todo.node_index].threshold = split->threshold;
        tree.nodes.emplace_back();
        const size_t li = tree.nodes.size() - 1;
        tree.nodes.emplace_back();
        const size_t ri = tree.nodes.size() - 1;
        tree.nodes[todo.node_index].left = li;
        tree.nodes[todo.node_index].right = ri;
        stack.push_back({std::move(right_rows), todo.depth + 1, ri});
        stack.push_back({std::move(left_rows), todo.depth + 1, li});
    }
    return tree;
}

inline RandomForest RandomForest::fit(const Matrix& x, const std::vector<int>& y,
                                      RandomForestConfig cfg) {
    if (x.rows() != y.size()) throw std::invalid_argument("forest fit: rows != labels");
    if (x.rows() == 0) throw InputError("forest fit: empty dataset");
    if (cfg.tree_count < 1) throw InputError("forest fit: tree_count must be >= 1");
    int max_label = 0;
    bool multi = false;
    for (int l : y) {
        if (l < 0) throw std::invalid_argument("forest fit: negative label");
        max_label = std::max(max_label, l);
        if (l != y[0]) multi = true;
    }
    if (!multi) throw InputError("forest fit: single-class input");

    RandomForest rf;
    rf.dimension_ = x.cols();
    rf.class_count_ = static_cast<size_t>(max_label) + 1;
    rf.config_ = cfg;
    const size_t fps = cfg.features_per_split > 0
                           ? std::min(cfg.features_per_split, x.cols())
                           : static_cast<size_t>(
                                 std::ceil(std::sqrt(static_cast<double>(x.cols()))));

    rf.trees_.resize(cfg.tree_count);
#pragma omp parallel for schedule(dynamic)
    for (long long t = 0; t < static_cast<long long>(cfg.tree_count); ++t) {
        SeededRng rng(cfg.seed + static_cast<uint64_t>(t));
        std::vector<size_t> rows(x.rows());
        if (cfg.bootstrap) {
            for (size_t i = 0; i < rows.size(); ++i)
                rows[i] = static_cast<size_t>(rng.uniform_int(x.rows()));
        } else {
            for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        }
        rf.trees_[static_cast<size_t>(t)] =
            grow_tree(x, y, std::move(rows), rf.class_count_, cfg, fps, rng);
    }
    return rf;
}

// ---------------------------------------------------------------------------
// Text serialization (preorder by construction: children follow parents in
// the node vector). Thresholds are hex-encoded doubles for exact reload.

inline std::string RandomForest::save() const {
    std::string out = "gnnad-forest v1\n";
    out += "trees " + std::to_string(trees_.size()) + " classes " + std::to_string(class_count_) +
           " dim " + std::to_string(dimension_) + "\n";
    char hex[20];
    for (const auto& tree : trees_) {
        out += "tree " + std::to_string(tree.nodes.size()) + "\n";
        for (const auto& n : tree.nodes) {
            if (n.is_leaf()) {
                out += "L";
                for (size_t c : n.counts) out += " " + std::to_string(c);
            } else {
                uint64_t bits;
                std::memcpy(&bits, &n.threshold, sizeof bits);
                std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(bits));
                out += "I " + std::to_string(n.feature) + " " + hex + " " +
                       std::to_string(n.left) + " " + std::to_string(n.right);
            }
            out += "\n";
        }
    }
    return out;
}

inline RandomForest RandomForest::load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "gnnad-forest v1")
        throw InputError("forest file: bad magic");
    size_t tree_count;
    RandomForest rf;
    {
        if (!std::getline(in, line)) throw InputError("forest file: truncated header");
        std::istringstream hs(line);
        std::string t1, t2, t3;
        if (!(hs >> t1 >> tree_count >> t2 >> rf.class_count_ >> t3 >> rf.dimension_) ||
            t1 != "trees" || t2 != "classes" || t3 != "dim")
            throw InputError("forest file: bad header");
    }
    rf.config_.tree_count = tree_count;
    for (size_t t = 0; t < tree_count; ++t) {
        if (!std::getline(in, line)) throw InputError("forest file: missing tree header");
        std::istringstream ts(line);
        std::string tag;
        size_t node_count;
        if (!(ts >> tag >> node_count) || tag != "tree")
            throw InputError("forest file: bad tree header");
        DecisionTree tree;
        tree.nodes.resize(node_count);
        for (size_t i = 0; i < node_count; ++i) {
            if (!std::getline(in, line)) throw InputError("forest file: truncated tree");
            std::istringstream ns(line);
            std::string kind;
            ns >> kind;
            if (kind == "L") {
                tree.nodes[i].feature = -1;
                tree.nodes[i].counts.assign(rf.class_count_, 0);
                for (size_t c = 0; c < rf.class_count_; ++c)
                    if (!(ns >> tree.nodes[i].counts[c]))
                        throw InputError("forest file: short leaf histogram");
            } else if (kind == "I") {
                std::string hex;
                uint64_t bits;
                if (!(ns >> tree.nodes[i].feature >> hex >> tree.nodes[i].left >>
                      tree.nodes[i].right) ||
                    !parse_hex_u64(hex, bits))
                    throw InputError("forest file: bad internal node");
                std::memcpy(&tree.nodes[i].threshold, &bits, sizeof bits);
                if (tree.nodes[i].left >= node_count || tree.nodes[i].right >= node_count ||
                    tree.nodes[i].feature < 0 ||
                    static_cast<size_t>(tree.nodes[i].feature) >= rf.dimension_)
                    throw InputError("forest file: node reference out of range");
            } else {
                throw InputError("forest file: unknown node kind '" + kind + "'");
            }
        }
        rf.trees_.push_back(std::move(tree));
    }
    return rf;
}

}  // namespace gnnad
