#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>

#include "gnnad/forest.hpp"
#include "gnnad/rng.hpp"

using namespace gnnad;

namespace {

// ---------------------------------------------------------------------------
// Exhaustive greedy CART oracle, written independently of the library: at
// every node it enumerates EVERY (feature, midpoint) pair by brute force and
// recurses. Shares only the stated tie-break rules (lower feature, then
// lower threshold) with the implementation.

struct OracleNode {
    int feature = -1;
    double threshold = 0.0;
    std::vector<int> labels;  // leaf payload
    std::unique_ptr<OracleNode> left, right;
};

double oracle_gini(const std::vector<int>& labels) {
    std::map<int, size_t> counts;
    for (int l : labels) ++counts[l];
    double s = 0.0;
    for (auto& [c, k] : counts) {
        (void)c;
        double p = static_cast<double>(k) / static_cast<double>(labels.size());
        s += p * p;
    }
    return 1.0 - s;
}

struct OracleSplit {
    size_t feature;
    double threshold;
    double weighted;
};

std::optional<OracleSplit> oracle_best_split(const Matrix& x, const std::vector<size_t>& rows,
                                             const std::vector<int>& y) {
    std::vector<int> parent_labels;
    for (size_t r : rows) parent_labels.push_back(y[r]);
    const double parent = oracle_gini(parent_labels);
    std::optional<OracleSplit> best;
    for (size_t f = 0; f < x.cols(); ++f) {
        std::vector<double> values;
        for (size_t r : rows) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = values[i] + (values[i + 1] - values[i]) / 2.0;
            std::vector<int> left, right;
            for (size_t r : rows)
                (x(r, f) <= thr ? left : right).push_back(y[r]);
            const double weighted =
                (static_cast<double>(left.size()) * oracle_gini(left) +
                 static_cast<double>(right.size()) * oracle_gini(right)) /
                static_cast<double>(rows.size());
            if (weighted >= parent) continue;  // no impurity reduction
            if (!best || weighted < best->weighted)
                best = OracleSplit{f, thr, weighted};
        }
    }
    return best;
}

std::unique_ptr<OracleNode> oracle_grow(const Matrix& x, const std::vector<size_t>& rows,
                                        const std::vector<int>& y) {
    auto node = std::make_unique<OracleNode>();
    bool pure = true;
    for (size_t r : rows)
        if (y[r] != y[rows[0]]) pure = false;
    std::optional<OracleSplit> split;
    if (!pure && rows.size() >= 2) split = oracle_best_split(x, rows, y);
    if (!split) {
        for (size_t r : rows) node->labels.push_back(y[r]);
        return node;
    }
    node->feature = static_cast<int>(split->feature);
    node->threshold = split->threshold;
    std::vector<size_t> l, r;
    for (size_t row : rows)
        (x(row, split->feature) <= split->threshold ? l : r).push_back(row);
    node->left = oracle_grow(x, l, y);
    node->right = oracle_grow(x, r, y);
    return node;
}

void expect_tree_equals_oracle(const DecisionTree& tree, size_t node_index,
                               const OracleNode& oracle) {
    const TreeNode& n = tree.nodes[node_index];
    if (oracle.feature < 0) {
        ASSERT_TRUE(n.is_leaf());
        std::map<int, size_t> want;
        for (int l : oracle.labels) ++want[l];
        for (size_t c = 0; c < n.counts.size(); ++c) {
            size_t expected = want.count(static_cast<int>(c)) ? want[static_cast<int>(c)] : 0;
            EXPECT_EQ(n.counts[c], expected);
        }
        return;
    }
    ASSERT_FALSE(n.is_leaf());
    EXPECT_EQ(n.feature, oracle.feature);
    EXPECT_DOUBLE_EQ(n.threshold, oracle.threshold);
    expect_tree_equals_oracle(tree, n.left, *oracle.left);
    expect_tree_equals_oracle(tree, n.right, *oracle.right);
}

Matrix random_points(size_t rows, size_t cols, SeededRng& rng) {
    Matrix m(rows, cols);
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(0.0, 10.0);
    return m;
}

}  // namespace

TEST(Gini, DirectFormulas) {
    EXPECT_DOUBLE_EQ(gini(std::vector<int>{0, 0, 1, 1}), 0.5);
    EXPECT_DOUBLE_EQ(gini(std::vector<int>{1, 1, 1}), 0.0);
    EXPECT_NEAR(gini(std::vector<int>{0, 1, 2}), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(gini(std::vector<int>{}), std::invalid_argument);
}

TEST(BestSplit, SeparableOneDimensional) {
    Matrix x = Matrix::from_rows({{1}, {2}, {8}, {9}});
    std::vector<int> y{0, 0, 1, 1};
    std::vector<size_t> rows{0, 1, 2, 3}, feats{0};
    auto split = best_split(x, rows, y, feats, 2);
    ASSERT_TRUE(split.has_value());
    EXPECT_EQ(split->feature, 0u);
    EXPECT_DOUBLE_EQ(split->threshold, 5.0);
    EXPECT_DOUBLE_EQ(split->gain, 0.5);  // parent 0.5, children pure
}

TEST(BestSplit, PureLabelsGiveNone) {
    Matrix x = Matrix::from_rows({{1}, {2}, {3}});
    std::vector<int> y{1, 1, 1};
    std::vector<size_t> rows{0, 1, 2}, feats{0};
    EXPECT_FALSE(best_split(x, rows, y, feats, 2).has_value());
}

TEST(BestSplit, MatchesExhaustiveOracleOnRandomData) {
    SeededRng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix x = random_points(6, 3, rng);
        std::vector<int> y;
        for (int i = 0; i < 6; ++i) y.push_back(static_cast<int>(rng.uniform_int(3)));
        std::vector<size_t> rows{0, 1, 2, 3, 4, 5}, feats{0, 1, 2};
        auto got = best_split(x, rows, y, feats, 3);
        auto want = oracle_best_split(x, rows, y);
        ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
        if (got) {
            EXPECT_EQ(got->feature, want->feature) << "trial " << trial;
            EXPECT_DOUBLE_EQ(got->threshold, want->threshold);
            EXPECT_NEAR(got->gain, oracle_gini([&] {
                            std::vector<int> pl;
                            for (size_t r : rows) pl.push_back(y[r]);
                            return pl;
                        }()) - want->weighted,
                        1e-12);
        }
    }
}

TEST(FitForest, SingleTreeEqualsCartOracle) {
    SeededRng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix x = random_points(10, 3, rng);
        std::vector<int> y;
        for (int i = 0; i < 10; ++i) y.push_back(static_cast<int>(rng.uniform_int(2)));
        bool multi = false;
        for (int l : y)
            if (l != y[0]) multi = true;
        if (!multi) y[0] = 1 - y[0];

        RandomForestConfig cfg;
        cfg.tree_count = 1;
        cfg.bootstrap = false;
        cfg.features_per_split = 3;  // all features
        cfg.seed = 7;
        auto rf = RandomForest::fit(x, y, cfg);
        std::vector<size_t> rows(10);
        for (size_t i = 0; i < 10; ++i) rows[i] = i;
        auto oracle = oracle_grow(x, rows, y);
        expect_tree_equals_oracle(rf.trees()[0], 0, *oracle);

        for (size_t i = 0; i < 10; ++i)
            EXPECT_EQ(rf.predict({x.row(i), x.cols()}), y[i]);
    }
}

TEST(FitForest, ConsistentDataReachesFullTrainingAccuracy) {
    SeededRng rng(31);
    Matrix x = random_points(60, 4, rng);  // continuous draws: no duplicates
    std::vector<int> y;
    for (size_t i = 0; i < 60; ++i) y.push_back(static_cast<int>(rng.uniform_int(3)));
    y[0] = 0;
    y[1] = 1;  // guarantee two classes
    RandomForestConfig cfg;
    cfg.tree_count = 30;
    cfg.seed = 3;
    auto rf = RandomForest::fit(x, y, cfg);
    // unlimited depth lets every tree shatter its bootstrap sample, and
    // voting over 30 trees recovers the consistent labeling
    size_t correct = 0;
    for (size_t i = 0; i < 60; ++i)
        if (rf.predict({x.row(i), x.cols()}) == y[i]) ++correct;
    EXPECT_EQ(correct, 60u);
}

TEST(FitForest, SameSeedIdenticalForests) {
    SeededRng rng(41);
    Matrix x = random_points(40, 5, rng);
    std::vector<int> y;
    for (size_t i = 0; i < 40; ++i) y.push_back(static_cast<int>(rng.uniform_int(2)));
    y[0] = 0;
    y[1] = 1;
    RandomForestConfig cfg;
    cfg.tree_count = 12;
    cfg.seed = 77;
    auto a = RandomForest::fit(x, y, cfg);
    auto b = RandomForest::fit(x, y, cfg);
    EXPECT_EQ(a.save(), b.save());
}

TEST(FitForest, SingleClassRejected) {
    Matrix x = Matrix::from_rows({{1}, {2}});
    EXPECT_THROW(RandomForest::fit(x, {1, 1}, {}), InputError);
}

TEST(Predict, MajorityAndTieRules) {
    // hand-built 3-tree forest of single leaves voting [1, 1, 0]
    std::string text = "gnnad-forest v1\ntrees 3 classes 2 dim 1\n"
                       "tree 1\nL 0 1\n"
                       "tree 1\nL 0 1\n"
                       "tree 1\nL 1 0\n";
    auto rf = RandomForest::load(text);
    std::vector<double> point{0.5};
    EXPECT_EQ(rf.predict(point), 1);

    std::string tie = "gnnad-forest v1\ntrees 2 classes 2 dim 1\n"
                      "tree 1\nL 1 0\n"
                      "tree 1\nL 0 1\n";
    auto rf_tie = RandomForest::load(tie);
    EXPECT_EQ(rf_tie.predict(point), 0);  // tie -> lowest class id
}

TEST(Predict, ProbaSharesAndExactRationals) {
    std::string text = "gnnad-forest v1\ntrees 4 classes 3 dim 1\n"
                       "tree 1\nL 1 0 0\n"
                       "tree 1\nL 0 1 0\n"
                       "tree 1\nL 0 1 0\n"
                       "tree 1\nL 0 0 1\n";
    auto rf = RandomForest::load(text);
    std::vector<double> point{0.0};
    auto proba = rf.predict_proba(point);
    EXPECT_EQ(proba, (std::vector<double>{0.25, 0.5, 0.25}));
    double total = 0.0;
    for (double p : proba) total += p;
    EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(Predict, DimensionMismatchRejected) {
    SeededRng rng(5);
    Matrix x = random_points(10, 3, rng);
    std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    auto rf = RandomForest::fit(x, y, {});
    std::vector<double> wrong{1.0, 2.0};
    EXPECT_THROW(rf.predict(wrong), std::invalid_argument);
}

TEST(Serialization, RoundTripPreservesPredictions) {
    SeededRng rng(59);
    Matrix x = random_points(50, 4, rng);
    std::vector<int> y;
    for (size_t i = 0; i < 50; ++i) y.push_back(static_cast<int>(rng.uniform_int(3)));
    y[0] = 0;
    y[1] = 1;
    RandomForestConfig cfg;
    cfg.tree_count = 9;
    cfg.seed = 2;
    auto rf = RandomForest::fit(x, y, cfg);
    auto rf2 = RandomForest::load(rf.save());
    EXPECT_EQ(rf.save(), rf2.save());
    for (size_t i = 0; i < 50; ++i)
        EXPECT_EQ(rf.predict({x.row(i), x.cols()}), rf2.predict({x.row(i), x.cols()}));
}

TEST(Serialization, RejectsMalformed) {
    EXPECT_THROW(RandomForest::load("junk"), InputError);
    EXPECT_THROW(RandomForest::load("gnnad-forest v1\ntrees 1 classes 2 dim 1\ntree 1\nX\n"),
                 InputError);
}

TEST(SoftVoting, UsesLeafDistributions) {
    std::string text = "gnnad-forest v1\ntrees 2 classes 2 dim 1\n"
                       "tree 1\nL 3 1\n"   // leaf distribution favors class 0
                       "tree 1\nL 0 4\n";  // pure class 1
    auto rf = RandomForest::load(text);
    // hard voting ties 1-1 and picks class 0; soft voting favors class 1
    std::vector<double> point{0.0};
    EXPECT_EQ(rf.predict(point), 0);
    rf.set_soft_voting(true);
    auto proba = rf.predict_proba(point);
    EXPECT_NEAR(proba[1], (0.25 + 1.0) / 2.0, 1e-12);
    EXPECT_EQ(rf.predict(point), 1);
}
