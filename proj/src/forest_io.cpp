#include "fedgbdt/forest_io.hpp"

#include <fstream>

#include "fedgbdt/errors.hpp"

namespace fedgbdt {

namespace {
constexpr const char* kFormat = "gbdt-forest";
constexpr int kVersion = 1;
} // namespace

ordered_json hyper_to_json(const HyperParams& hp) {
    ordered_json j;
    j["n_estimators"] = hp.n_estimators;
    j["max_depth"] = hp.max_depth;
    j["num_leaves"] = hp.num_leaves;
    j["learning_rate"] = hp.learning_rate;
    j["lambda_l2"] = hp.lambda_l2;
    j["min_samples_leaf"] = hp.min_samples_leaf;
    return j;
}

HyperParams hyper_from_json(const ordered_json& j) {
    HyperParams hp;
    hp.n_estimators = j.at("n_estimators").get<int>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.num_leaves = j.at("num_leaves").get<int>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.lambda_l2 = j.at("lambda_l2").get<double>();
    hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    return hp;
}

namespace {

ordered_json tree_to_json(const Tree& t) {
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& nd : t.nodes) {
        ordered_json n;
        if (nd.is_leaf()) {
            n["value"] = nd.value;
        } else {
            n["feature"] = nd.feature;
            n["threshold"] = nd.threshold;
            n["missing_left"] = nd.missing_left;
            n["left"] = nd.left;
            n["right"] = nd.right;
        }
        nodes.push_back(std::move(n));
    }
    return nodes;
}

Tree tree_from_json(const ordered_json& nodes) {
    Tree t;
    t.nodes.reserve(nodes.size());
    for (const auto& n : nodes) {
        TreeNode nd;
        if (n.contains("value")) {
            nd.value = n.at("value").get<double>();
        } else {
            nd.feature = n.at("feature").get<int>();
            nd.threshold = n.at("threshold").get<double>();
            nd.missing_left = n.at("missing_left").get<bool>();
            nd.left = n.at("left").get<int>();
            nd.right = n.at("right").get<int>();
        }
        t.nodes.push_back(nd);
    }
    return t;
}

} // namespace

ordered_json forest_to_json(const Forest& f) {
    ordered_json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["n_features"] = f.n_features;
    j["base_score"] = f.base_score;
    j["hyper"] = hyper_to_json(f.hyper);
    j["class_names"] = f.class_names;
    ordered_json classes = ordered_json::array();
    for (const auto& per_class : f.trees) {
        ordered_json trees = ordered_json::array();
        for (const Tree& t : per_class) trees.push_back(tree_to_json(t));
        classes.push_back(std::move(trees));
    }
    j["trees"] = std::move(classes);
    return j;
}

Forest forest_from_json(const ordered_json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kFormat)
        throw Error("not a forest document");
    if (j.at("version").get<int>() != kVersion)
        throw Error("unsupported forest document version");
    Forest f;
    f.n_features = j.at("n_features").get<int>();
    f.base_score = j.at("base_score").get<double>();
    f.hyper = hyper_from_json(j.at("hyper"));
    f.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& per_class : j.at("trees")) {
        std::vector<Tree> trees;
        trees.reserve(per_class.size());
        for (const auto& t : per_class) trees.push_back(tree_from_json(t));
        f.trees.push_back(std::move(trees));
    }
    return f;
}

std::string forest_to_string(const Forest& f) { return forest_to_json(f).dump(2) + "\n"; }

Forest forest_from_string(const std::string& text) {
    return forest_from_json(ordered_json::parse(text));
}

void save_forest(const Forest& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << forest_to_string(f);
}

Forest load_forest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return forest_from_string(text);
}

} // namespace fedgbdt
