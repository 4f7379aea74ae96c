#include "fedgbdt/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "fedgbdt/errors.hpp"
#include "fedgbdt/forest_io.hpp"
#include "fedgbdt/rng.hpp"

namespace fedgbdt {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

double read_epsilon(const nlohmann::ordered_json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        bad_field("epsilon", "must be a positive number or \"inf\"");
    }
    const double eps = v.get<double>();
    if (!(eps > 0.0)) bad_field("epsilon", "must be positive");
    return eps;
}

HyperParams read_hyper(const nlohmann::ordered_json& j) {
    HyperParams hp;
    if (j.contains("n_estimators")) hp.n_estimators = j.at("n_estimators").get<int>();
    if (j.contains("max_depth")) hp.max_depth = j.at("max_depth").get<int>();
    if (j.contains("num_leaves"))
        hp.num_leaves = j.at("num_leaves").get<int>();
    else
        hp.num_leaves = derived_num_leaves(hp.max_depth);
    if (j.contains("learning_rate")) hp.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("lambda_l2")) hp.lambda_l2 = j.at("lambda_l2").get<double>();
    if (j.contains("min_samples_leaf")) hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    try {
        hp.validate();
    } catch (const std::exception& e) {
        bad_field("hyper", e.what());
    }
    return hp;
}

HyperGrid read_grid(const nlohmann::ordered_json& j) {
    HyperGrid g;
    if (j.contains("n_estimators")) g.n_estimators = j.at("n_estimators").get<std::vector<int>>();
    if (j.contains("max_depth")) g.max_depth = j.at("max_depth").get<std::vector<int>>();
    if (j.contains("learning_rate"))
        g.learning_rate = j.at("learning_rate").get<std::vector<double>>();
    if (j.contains("lambda_l2")) g.lambda_l2 = j.at("lambda_l2").get<std::vector<double>>();
    if (g.n_estimators.empty() || g.max_depth.empty() || g.learning_rate.empty() ||
        g.lambda_l2.empty())
        bad_field("grid", "every dimension needs at least one value");
    return g;
}

} // namespace

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
    RunConfig cfg;

    if (!j.contains("dataset")) bad_field("dataset", "required");
    const auto& ds = j.at("dataset");
    if (ds.contains("synthetic")) {
        SyntheticSpec spec;
        const auto& s = ds.at("synthetic");
        if (s.contains("n_samples")) spec.n_samples = s.at("n_samples").get<int>();
        if (s.contains("n_features")) spec.n_features = s.at("n_features").get<int>();
        if (s.contains("n_classes")) spec.n_classes = s.at("n_classes").get<int>();
        if (s.contains("cluster_std")) spec.cluster_std = s.at("cluster_std").get<double>();
        if (s.contains("center_scale")) spec.center_scale = s.at("center_scale").get<double>();
        cfg.data.synthetic = spec;
    } else if (ds.contains("path")) {
        cfg.data.path = ds.at("path").get<std::string>();
    } else {
        bad_field("dataset", "needs either 'path' or 'synthetic'");
    }
    if (ds.contains("label_column")) cfg.data.label_column = ds.at("label_column").get<std::string>();
    if (ds.contains("benign_class")) cfg.data.benign_name = ds.at("benign_class").get<std::string>();

    if (j.contains("n_clients")) cfg.n_clients = j.at("n_clients").get<int>();
    if (cfg.n_clients < 1) bad_field("n_clients", "must be >= 1");

    if (j.contains("partition")) {
        const std::string mode = j.at("partition").get<std::string>();
        if (mode == "homogeneous")
            cfg.partition = PartitionMode::Homogeneous;
        else if (mode == "heterogeneous")
            cfg.partition = PartitionMode::Heterogeneous;
        else
            bad_field("partition", "must be 'homogeneous' or 'heterogeneous'");
    }

    if (j.contains("mask_p")) cfg.mask_p = j.at("mask_p").get<double>();
    if (!(cfg.mask_p >= 0.0 && cfg.mask_p <= 1.0)) bad_field("mask_p", "must be in [0, 1]");
    if (j.contains("label_q")) cfg.label_q = j.at("label_q").get<double>();
    if (!(cfg.label_q >= 0.0 && cfg.label_q < 1.0)) bad_field("label_q", "must be in [0, 1)");
    if (j.contains("epsilon")) cfg.epsilon = read_epsilon(j.at("epsilon"));

    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        if (b.is_number()) {
            cfg.budget_is_ratio = false;
            cfg.budget_absolute = b.get<std::int64_t>();
            if (cfg.budget_absolute < 1) bad_field("budget", "absolute budget must be >= 1");
        } else if (b.contains("ratio")) {
            cfg.budget_is_ratio = true;
            cfg.budget_ratio = b.at("ratio").get<double>();
            if (!(cfg.budget_ratio > 0.0 && cfg.budget_ratio <= 1.0))
                bad_field("budget.ratio", "must be in (0, 1]");
        } else if (b.contains("absolute")) {
            cfg.budget_is_ratio = false;
            cfg.budget_absolute = b.at("absolute").get<std::int64_t>();
            if (cfg.budget_absolute < 1) bad_field("budget.absolute", "must be >= 1");
        } else {
            bad_field("budget", "needs 'ratio', 'absolute', or a plain number");
        }
    }

    if (j.contains("hyper")) cfg.hyper = read_hyper(j.at("hyper"));
    if (j.contains("grid")) cfg.grid = read_grid(j.at("grid"));

    if (j.contains("test_fraction")) cfg.test_fraction = j.at("test_fraction").get<double>();
    if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0))
        bad_field("test_fraction", "must be in [0, 1)");
    if (j.contains("preprocess")) cfg.do_preprocess = j.at("preprocess").get<bool>();
    if (j.contains("force_include_encoders"))
        cfg.force_include_encoders = j.at("force_include_encoders").get<std::vector<int>>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return run_config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json ds;
    if (cfg.data.synthetic) {
        nlohmann::ordered_json s;
        s["n_samples"] = cfg.data.synthetic->n_samples;
        s["n_features"] = cfg.data.synthetic->n_features;
        s["n_classes"] = cfg.data.synthetic->n_classes;
        s["cluster_std"] = cfg.data.synthetic->cluster_std;
        s["center_scale"] = cfg.data.synthetic->center_scale;
        ds["synthetic"] = s;
    } else {
        ds["path"] = cfg.data.path;
    }
    ds["label_column"] = cfg.data.label_column;
    ds["benign_class"] = cfg.data.benign_name;
    j["dataset"] = ds;
    j["n_clients"] = cfg.n_clients;
    j["partition"] =
        cfg.partition == PartitionMode::Homogeneous ? "homogeneous" : "heterogeneous";
    j["mask_p"] = cfg.mask_p;
    j["label_q"] = cfg.label_q;
    if (std::isinf(cfg.epsilon))
        j["epsilon"] = "inf";
    else
        j["epsilon"] = cfg.epsilon;
    nlohmann::ordered_json b;
    if (cfg.budget_is_ratio)
        b["ratio"] = cfg.budget_ratio;
    else
        b["absolute"] = cfg.budget_absolute;
    j["budget"] = b;
    j["hyper"] = hyper_to_json(cfg.hyper);
    if (cfg.grid) {
        nlohmann::ordered_json g;
        g["n_estimators"] = cfg.grid->n_estimators;
        g["max_depth"] = cfg.grid->max_depth;
        g["learning_rate"] = cfg.grid->learning_rate;
        g["lambda_l2"] = cfg.grid->lambda_l2;
        j["grid"] = g;
    }
    j["test_fraction"] = cfg.test_fraction;
    j["preprocess"] = cfg.do_preprocess;
    j["force_include_encoders"] = cfg.force_include_encoders;
    j["master_seed"] = cfg.master_seed;
    j["out_dir"] = cfg.out_dir;
    return j;
}

Dataset acquire_dataset(const RunConfig& cfg) {
    if (cfg.data.synthetic)
        return make_synthetic(*cfg.data.synthetic, derive_seed(cfg.master_seed, "synthetic_data", 0));
    return load_csv(cfg.data.path, cfg.data.label_column);
}

PipelineConfig to_pipeline_config(const RunConfig& cfg, std::int64_t n_train) {
    PipelineConfig pc;
    pc.budget = cfg.budget_is_ratio
                    ? std::max<std::int64_t>(
                          1, static_cast<std::int64_t>(std::floor(cfg.budget_ratio *
                                                                  static_cast<double>(n_train))))
                    : cfg.budget_absolute;
    pc.mask_p = cfg.mask_p;
    pc.label_q = cfg.label_q;
    pc.epsilon = cfg.epsilon;
    pc.encoder_hyper = cfg.hyper;
    pc.server_hyper = cfg.hyper;
    pc.server_grid = cfg.grid;
    pc.force_include_encoders = cfg.force_include_encoders;
    pc.master_seed = cfg.master_seed;
    return pc;
}

} // namespace fedgbdt
