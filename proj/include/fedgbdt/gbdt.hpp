#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedgbdt/dataset.hpp"

namespace fedgbdt {

/// Training knobs shared by every forest.  num_leaves is the leaf budget for
/// the leaf-wise grower and may not exceed 2^max_depth.
struct HyperParams {
    int n_estimators = 100;
    int max_depth = 6;
    int num_leaves = 42; // derived_num_leaves(6)
    double learning_rate = 0.1;
    double lambda_l2 = 1.0;
    int min_samples_leaf = 1;

    void validate() const; // throws std::invalid_argument on nonsense
};

bool operator==(const HyperParams& a, const HyperParams& b);

/// Leaf budget derived from a depth cap: floor(2/3 * 2^depth), at least 2.
int derived_num_leaves(int max_depth);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    bool missing_left = true;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf output, already learning-rate scaled

    bool is_leaf() const { return feature < 0; }
};

/// A single regression tree stored as a flat arena; nodes[0] is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    int n_leaves() const;
    int depth() const;

    /// Route one sample to its leaf.  Accessor maps a feature index to
    /// (value, is_missing).
    template <class Accessor>
    int leaf_for(Accessor&& at) const {
        int cur = 0;
        while (!nodes[static_cast<std::size_t>(cur)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(cur)];
            const auto [v, miss] = at(nd.feature);
            const bool go_left = miss ? nd.missing_left : (v <= nd.threshold);
            cur = go_left ? nd.left : nd.right;
        }
        return cur;
    }

    template <class Accessor>
    double value_for(Accessor&& at) const {
        return nodes[static_cast<std::size_t>(leaf_for(at))].value;
    }
};

/// One-vs-rest multiclass forest: trees[c][t] is class c's tree from boosting
/// round t.  Logit of class c = base_score + sum_t trees[c][t].
struct Forest {
    int n_features = 0;
    double base_score = 0.0;
    HyperParams hyper;
    std::vector<std::string> class_names;
    std::vector<std::vector<Tree>> trees;

    int n_classes() const { return static_cast<int>(trees.size()); }
    int n_rounds() const { return trees.empty() ? 0 : static_cast<int>(trees[0].size()); }
    double learning_rate() const { return hyper.learning_rate; }
    /// Total leaf count across all trees; the model's parameter count.
    std::int64_t param_count() const;
};

/// Multiclass training loss per boosting round; train_loss[0] is the loss of
/// the constant base-score model, train_loss[t] the loss after round t.
struct FitTrace {
    std::vector<double> train_loss;
};

/// Train a multiclass GBDT with softmax cross-entropy, exact greedy splits
/// and learned missing-value routing.  Deterministic for a fixed input; the
/// seed is reserved for stochastic extensions (the exact greedy grower draws
/// nothing from it).
Forest fit(const Dataset& d, const HyperParams& hyper, std::uint64_t seed = 0,
           FitTrace* trace = nullptr);

// ---- inference ----

/// Raw logits (n x C), base_score plus tree sums.
Matrix predict_logits(const Forest& f, const Dataset& d);

/// Row-wise softmax with max subtraction; rows sum to 1.
Matrix predict_probs(const Forest& f, const Dataset& d);

/// argmax over probabilities, ties to the lower class id.
std::vector<int> predict(const Forest& f, const Dataset& d);

/// Single dense row without missing values.
int predict(const Forest& f, const Vector& x);
Vector predict_probs_row(const Forest& f, const Dataset& d, Eigen::Index row);

double accuracy(const Forest& f, const Dataset& d);

/// Numerically stable softmax of one logit vector.
Vector softmax(const Vector& logits);

/// Mean negative log-likelihood of the labels under the forest.
double log_loss(const Forest& f, const Dataset& d);

// ---- rule extraction ----

struct RuleCondition {
    int feature = 0;
    double threshold = 0.0;
    bool go_left = true;      // true: took the <= branch
    bool missing_left = true; // routing for a missing value at this node
};

/// One leaf's root-to-leaf path.  A sample matches when every condition
/// routes it the recorded way, so replaying all rules reproduces predict.
struct Rule {
    int class_id = 0;
    int tree_index = 0;
    std::vector<RuleCondition> conditions;
    double value = 0.0;
};

std::vector<Rule> extract_rules(const Forest& f);

bool rule_matches(const Rule& r, const Dataset& d, Eigen::Index row);

/// Sum of matching rule values + base_score per class, i.e. predict_logits
/// recomputed through the rule set.
Matrix rule_logits(const Forest& f, const std::vector<Rule>& rules, const Dataset& d);

std::string format_rule(const Rule& r, const std::vector<std::string>& class_names);

// ---- grid search ----

struct HyperGrid {
    std::vector<int> n_estimators{100};
    std::vector<int> max_depth{6};
    std::vector<double> learning_rate{0.1};
    std::vector<double> lambda_l2{1.0};
};

struct GridPoint {
    HyperParams params;
    double valid_accuracy = 0.0;
};

struct GridSearchResult {
    HyperParams best;
    std::vector<GridPoint> table; // evaluation order
};

/// Exhaustive search over the grid, scored by validation accuracy; ties go to
/// the lexicographically smallest (n_estimators, max_depth, learning_rate,
/// lambda_l2).  num_leaves is derived from max_depth at every point.
GridSearchResult grid_search(const Dataset& train, const Dataset& valid, const HyperGrid& grid,
                             std::uint64_t seed = 0);

} // namespace fedgbdt
