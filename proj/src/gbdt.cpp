#include "fedgbdt/gbdt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "fedgbdt/errors.hpp"

namespace fedgbdt {

int derived_num_leaves(int max_depth) {
    if (max_depth < 1 || max_depth > 30)
        throw std::invalid_argument("max_depth out of range [1, 30]");
    const std::int64_t cap = std::int64_t{1} << (max_depth + 1);
    return static_cast<int>(std::max<std::int64_t>(2, cap / 3));
}

void HyperParams::validate() const {
    if (n_estimators < 0) throw std::invalid_argument("n_estimators must be >= 0");
    if (max_depth < 1 || max_depth > 30) throw std::invalid_argument("max_depth out of range [1, 30]");
    const std::int64_t cap = std::int64_t{1} << max_depth;
    if (num_leaves < 2 || num_leaves > cap)
        throw std::invalid_argument("num_leaves must be in [2, 2^max_depth]");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(lambda_l2 >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

bool operator==(const HyperParams& a, const HyperParams& b) {
    return a.n_estimators == b.n_estimators && a.max_depth == b.max_depth &&
           a.num_leaves == b.num_leaves && a.learning_rate == b.learning_rate &&
           a.lambda_l2 == b.lambda_l2 && a.min_samples_leaf == b.min_samples_leaf;
}

int Tree::n_leaves() const {
    int k = 0;
    for (const TreeNode& nd : nodes) k += nd.is_leaf() ? 1 : 0;
    return k;
}

int Tree::depth() const {
    // iterative DFS carrying depth; arena is small
    int best = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, dep] = stack.back();
        stack.pop_back();
        const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
        if (nd.is_leaf()) {
            best = std::max(best, dep);
        } else {
            stack.emplace_back(nd.left, dep + 1);
            stack.emplace_back(nd.right, dep + 1);
        }
    }
    return best;
}

std::int64_t Forest::param_count() const {
    std::int64_t total = 0;
    for (const auto& per_class : trees)
        for (const Tree& t : per_class) total += t.n_leaves();
    return total;
}

namespace {

double leaf_weight(double G, double H, double lambda, double lr) {
    const double denom = H + lambda;
    if (denom <= 0.0) return 0.0;
    return -G / denom * lr;
}

double gain_term(double G, double H, double lambda) {
    const double denom = H + lambda;
    if (denom <= 0.0) return 0.0;
    return G * G / denom;
}

struct SplitInfo {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool missing_left = true;
};

struct GrowingLeaf {
    std::vector<int> samples;
    double G = 0.0;
    double H = 0.0;
    int depth = 0;
    bool has_split = false;
    SplitInfo split;
};

/// Exact greedy search over sorted unique values of every feature.  Missing
/// samples are tried on both sides and the better direction is kept.  Ties:
/// lowest feature, lowest threshold, missing to the left.
bool find_best_split(const Dataset& d, const GrowingLeaf& leaf, const Vector& g, const Vector& h,
                     const HyperParams& hp, SplitInfo& out) {
    const Eigen::Index m = d.n_features();
    bool found = false;
    SplitInfo best;
    best.gain = 0.0;

    std::vector<std::pair<double, int>> obs;
    obs.reserve(leaf.samples.size());
    const double parent_term = gain_term(leaf.G, leaf.H, hp.lambda_l2);

    for (Eigen::Index j = 0; j < m; ++j) {
        obs.clear();
        double miss_G = 0.0, miss_H = 0.0;
        std::int64_t miss_cnt = 0;
        for (int i : leaf.samples) {
            if (d.missing(i, j)) {
                miss_G += g(i);
                miss_H += h(i);
                ++miss_cnt;
            } else {
                obs.emplace_back(d.features(i, j), i);
            }
        }
        if (obs.size() < 2) continue;
        std::sort(obs.begin(), obs.end());
        if (obs.front().first == obs.back().first) continue;

        double obs_G = 0.0, obs_H = 0.0;
        for (const auto& [v, i] : obs) {
            (void)v;
            obs_G += g(i);
            obs_H += h(i);
        }

        double GL = 0.0, HL = 0.0;
        std::int64_t cntL = 0;
        for (std::size_t k = 0; k + 1 < obs.size(); ++k) {
            GL += g(obs[k].second);
            HL += h(obs[k].second);
            ++cntL;
            const double a = obs[k].first;
            const double b = obs[k + 1].first;
            if (a == b) continue;
            double thr = a + (b - a) / 2.0;
            if (!(thr < b)) thr = a; // adjacent doubles: keep the partition faithful
            const double GR = obs_G - GL;
            const double HR = obs_H - HL;
            const std::int64_t cntR = static_cast<std::int64_t>(obs.size()) - cntL;

            for (int side = 0; side < 2; ++side) {
                const bool miss_left = side == 0;
                const double gl = GL + (miss_left ? miss_G : 0.0);
                const double hl = HL + (miss_left ? miss_H : 0.0);
                const double gr = GR + (miss_left ? 0.0 : miss_G);
                const double hr = HR + (miss_left ? 0.0 : miss_H);
                const std::int64_t nl = cntL + (miss_left ? miss_cnt : 0);
                const std::int64_t nr = cntR + (miss_left ? 0 : miss_cnt);
                if (nl < hp.min_samples_leaf || nr < hp.min_samples_leaf) continue;
                const double gain = 0.5 * (gain_term(gl, hl, hp.lambda_l2) +
                                           gain_term(gr, hr, hp.lambda_l2) - parent_term);
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(j);
                    best.threshold = thr;
                    best.missing_left = miss_left;
                    found = true;
                }
            }
        }
    }
    if (found) out = best;
    return found;
}

struct HeapEntry {
    double gain;
    int node_id; // creation order; lower wins ties
};

struct HeapCompare {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.gain != b.gain) return a.gain < b.gain; // max-heap on gain
        return a.node_id > b.node_id;
    }
};

/// Grow one regression tree leaf-wise (best gain first) and return it along
/// with each training sample's leaf value.
Tree grow_tree(const Dataset& d, const Vector& g, const Vector& h, const HyperParams& hp,
               Vector& delta) {
    Tree tree;
    std::vector<GrowingLeaf> grow; // parallel to tree.nodes while growing

    GrowingLeaf root;
    root.samples.resize(static_cast<std::size_t>(d.n_samples()));
    for (int i = 0; i < static_cast<int>(root.samples.size()); ++i) root.samples[static_cast<std::size_t>(i)] = i;
    root.G = g.sum();
    root.H = h.sum();
    root.depth = 0;

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCompare> heap;

    auto add_leaf = [&](GrowingLeaf&& leaf) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (leaf.depth < hp.max_depth && find_best_split(d, leaf, g, h, hp, leaf.split))
            leaf.has_split = true;
        if (leaf.has_split) heap.push({leaf.split.gain, id});
        grow.push_back(std::move(leaf));
        return id;
    };

    add_leaf(std::move(root));
    int n_leaves = 1;

    while (n_leaves < hp.num_leaves && !heap.empty()) {
        const HeapEntry top = heap.top();
        heap.pop();
        // add_leaf reallocates both arenas, so copy what we need up front
        const SplitInfo sp = grow[static_cast<std::size_t>(top.node_id)].split;
        const int child_depth = grow[static_cast<std::size_t>(top.node_id)].depth + 1;

        GrowingLeaf left, right;
        left.depth = right.depth = child_depth;
        for (int i : grow[static_cast<std::size_t>(top.node_id)].samples) {
            const bool miss = d.missing(i, sp.feature);
            const bool go_left = miss ? sp.missing_left : (d.features(i, sp.feature) <= sp.threshold);
            GrowingLeaf& child = go_left ? left : right;
            child.samples.push_back(i);
            child.G += g(i);
            child.H += h(i);
        }
        grow[static_cast<std::size_t>(top.node_id)].samples = {};

        const int left_id = add_leaf(std::move(left));
        const int right_id = add_leaf(std::move(right));
        TreeNode& node = tree.nodes[static_cast<std::size_t>(top.node_id)];
        node.feature = sp.feature;
        node.threshold = sp.threshold;
        node.missing_left = sp.missing_left;
        node.left = left_id;
        node.right = right_id;
        ++n_leaves;
    }

    delta.resize(d.n_samples());
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        TreeNode& nd = tree.nodes[id];
        if (!nd.is_leaf()) continue;
        nd.value = leaf_weight(grow[id].G, grow[id].H, hp.lambda_l2, hp.learning_rate);
        for (int i : grow[id].samples) delta(i) = nd.value;
    }
    return tree;
}

double dataset_log_loss(const Matrix& logits, const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits(i, c) - mx);
        const double lse = std::log(sum) + mx;
        total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(logits.rows());
}

void softmax_rows_inplace(Matrix& logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            logits(i, c) = std::exp(logits(i, c) - mx);
            sum += logits(i, c);
        }
        logits.row(i) /= sum;
    }
}

} // namespace

Vector softmax(const Vector& logits) {
    Vector out = logits;
    const double mx = out.maxCoeff();
    out = (out.array() - mx).exp();
    out /= out.sum();
    return out;
}

Forest fit(const Dataset& d, const HyperParams& hyper, std::uint64_t seed, FitTrace* trace) {
    (void)seed; // exact greedy training is deterministic; kept for interface stability
    hyper.validate();
    if (d.n_samples() < 2) throw EmptyDataset("training needs at least 2 samples");
    if (d.class_names.empty()) throw EmptyDataset("training needs at least 1 class");

    const Eigen::Index n = d.n_samples();
    const int C = d.n_classes();

    Forest f;
    f.n_features = static_cast<int>(d.n_features());
    f.base_score = 0.0;
    f.hyper = hyper;
    f.class_names = d.class_names;
    f.trees.resize(static_cast<std::size_t>(C));

    Matrix logits = Matrix::Constant(n, C, f.base_score);
    if (trace) {
        trace->train_loss.clear();
        trace->train_loss.push_back(dataset_log_loss(logits, d.labels));
    }

    Vector g(n), h(n), delta(n);
    for (int t = 0; t < hyper.n_estimators; ++t) {
        Matrix probs = logits;
        softmax_rows_inplace(probs);
        for (int c = 0; c < C; ++c) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double p = probs(i, c);
                g(i) = p - (d.labels[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0);
                h(i) = p * (1.0 - p);
            }
            Tree tree = grow_tree(d, g, h, hyper, delta);
            f.trees[static_cast<std::size_t>(c)].push_back(std::move(tree));
            logits.col(c) += delta;
        }
        if (trace) trace->train_loss.push_back(dataset_log_loss(logits, d.labels));
    }
    return f;
}

namespace {

template <class Accessor>
Vector forest_logits_one(const Forest& f, Accessor&& at) {
    Vector logits = Vector::Constant(f.n_classes(), f.base_score);
    for (int c = 0; c < f.n_classes(); ++c)
        for (const Tree& t : f.trees[static_cast<std::size_t>(c)]) logits(c) += t.value_for(at);
    return logits;
}

int argmax_low_tie(const Vector& v) {
    int best = 0;
    for (int c = 1; c < v.size(); ++c)
        if (v(c) > v(best)) best = c;
    return best;
}

} // namespace

Matrix predict_logits(const Forest& f, const Dataset& d) {
    if (d.n_features() != f.n_features) throw DimensionMismatch(f.n_features, d.n_features());
    Matrix out(d.n_samples(), f.n_classes());
    for (Eigen::Index i = 0; i < d.n_samples(); ++i) {
        auto at = [&](int j) { return std::pair<double, bool>(d.features(i, j), d.missing(i, j)); };
        out.row(i) = forest_logits_one(f, at).transpose();
    }
    return out;
}

Matrix predict_probs(const Forest& f, const Dataset& d) {
    Matrix out = predict_logits(f, d);
    softmax_rows_inplace(out);
    return out;
}

std::vector<int> predict(const Forest& f, const Dataset& d) {
    const Matrix probs = predict_probs(f, d);
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const Vector row = probs.row(i).transpose();
        out[static_cast<std::size_t>(i)] = argmax_low_tie(row);
    }
    return out;
}

int predict(const Forest& f, const Vector& x) {
    if (x.size() != f.n_features) throw DimensionMismatch(f.n_features, x.size());
    auto at = [&](int j) { return std::pair<double, bool>(x(j), false); };
    return argmax_low_tie(softmax(forest_logits_one(f, at)));
}

Vector predict_probs_row(const Forest& f, const Dataset& d, Eigen::Index row) {
    if (d.n_features() != f.n_features) throw DimensionMismatch(f.n_features, d.n_features());
    auto at = [&](int j) { return std::pair<double, bool>(d.features(row, j), d.missing(row, j)); };
    return softmax(forest_logits_one(f, at));
}

double accuracy(const Forest& f, const Dataset& d) {
    const std::vector<int> pred = predict(f, d);
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == d.labels[i]) ++hits;
    return pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
}

double log_loss(const Forest& f, const Dataset& d) {
    return dataset_log_loss(predict_logits(f, d), d.labels);
}

// ---- rules ----

namespace {

void collect_rules(const Tree& tree, int class_id, int tree_index, int node_id,
                   std::vector<RuleCondition>& path, std::vector<Rule>& out) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node_id)];
    if (nd.is_leaf()) {
        out.push_back(Rule{class_id, tree_index, path, nd.value});
        return;
    }
    path.push_back(RuleCondition{nd.feature, nd.threshold, true, nd.missing_left});
    collect_rules(tree, class_id, tree_index, nd.left, path, out);
    path.back().go_left = false;
    collect_rules(tree, class_id, tree_index, nd.right, path, out);
    path.pop_back();
}

} // namespace

std::vector<Rule> extract_rules(const Forest& f) {
    std::vector<Rule> out;
    std::vector<RuleCondition> path;
    for (int c = 0; c < f.n_classes(); ++c)
        for (std::size_t t = 0; t < f.trees[static_cast<std::size_t>(c)].size(); ++t)
            collect_rules(f.trees[static_cast<std::size_t>(c)][t], c, static_cast<int>(t), 0, path, out);
    return out;
}

bool rule_matches(const Rule& r, const Dataset& d, Eigen::Index row) {
    for (const RuleCondition& cond : r.conditions) {
        const bool miss = d.missing(row, cond.feature);
        const bool went_left =
            miss ? cond.missing_left : (d.features(row, cond.feature) <= cond.threshold);
        if (went_left != cond.go_left) return false;
    }
    return true;
}

Matrix rule_logits(const Forest& f, const std::vector<Rule>& rules, const Dataset& d) {
    Matrix out = Matrix::Constant(d.n_samples(), f.n_classes(), f.base_score);
    for (Eigen::Index i = 0; i < d.n_samples(); ++i)
        for (const Rule& r : rules)
            if (rule_matches(r, d, i)) out(i, r.class_id) += r.value;
    return out;
}

std::string format_rule(const Rule& r, const std::vector<std::string>& class_names) {
    auto num = [](double v) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, ptr);
    };
    std::string s = "class=" + class_names[static_cast<std::size_t>(r.class_id)] +
                    " tree=" + std::to_string(r.tree_index) + ": ";
    if (r.conditions.empty()) s += "always";
    for (std::size_t k = 0; k < r.conditions.size(); ++k) {
        const RuleCondition& c = r.conditions[k];
        if (k > 0) s += " AND ";
        s += "f" + std::to_string(c.feature) + (c.go_left ? " <= " : " > ") + num(c.threshold);
        if (c.missing_left == c.go_left) s += " (or missing)";
    }
    s += " => " + num(r.value);
    return s;
}

// ---- grid search ----

GridSearchResult grid_search(const Dataset& train, const Dataset& valid, const HyperGrid& grid,
                             std::uint64_t seed) {
    if (grid.n_estimators.empty() || grid.max_depth.empty() || grid.learning_rate.empty() ||
        grid.lambda_l2.empty())
        throw EmptyGrid();
    if (train.class_names != valid.class_names)
        throw std::invalid_argument("train/valid class dictionaries differ");

    auto ne = grid.n_estimators;
    auto md = grid.max_depth;
    auto lr = grid.learning_rate;
    auto l2 = grid.lambda_l2;
    std::sort(ne.begin(), ne.end());
    std::sort(md.begin(), md.end());
    std::sort(lr.begin(), lr.end());
    std::sort(l2.begin(), l2.end());

    GridSearchResult result;
    bool have_best = false;
    double best_acc = -1.0;
    for (int t : ne)
        for (int depth : md)
            for (double rate : lr)
                for (double lambda : l2) {
                    HyperParams hp;
                    hp.n_estimators = t;
                    hp.max_depth = depth;
                    hp.num_leaves = derived_num_leaves(depth);
                    hp.learning_rate = rate;
                    hp.lambda_l2 = lambda;
                    const Forest f = fit(train, hp, seed);
                    const double acc = accuracy(f, valid);
                    result.table.push_back(GridPoint{hp, acc});
                    if (!have_best || acc > best_acc) {
                        have_best = true;
                        best_acc = acc;
                        result.best = hp;
                    }
                }
    return result;
}

} // namespace fedgbdt
