#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fedgbdt/dataset.hpp"
#include "fedgbdt/federation.hpp"
#include "fedgbdt/synthetic.hpp"

namespace fedgbdt {

/// Where the run's data comes from: a CSV on disk or the bundled synthetic
/// generator (seeded off the master seed, so every seed draws fresh data).
struct DataSource {
    std::string path;                       // empty when synthetic
    std::string label_column = "label";
    std::string benign_name = "benign";
    std::optional<SyntheticSpec> synthetic;
};

/// One experiment, fully specified.  Loaded from a JSON document; every
/// field has a default and the resolved form is echoed next to the outputs.
struct RunConfig {
    DataSource data;
    int n_clients = 8;
    PartitionMode partition = PartitionMode::Heterogeneous;
    double mask_p = 0.1;
    double label_q = 0.2;
    double epsilon = 50.0;
    bool budget_is_ratio = true;  // ratio of the training split vs absolute cap
    double budget_ratio = 1.0;
    std::int64_t budget_absolute = 0;
    HyperParams hyper;                 // encoders, server and central model
    std::optional<HyperGrid> grid;     // central tuning; server re-tuning in simulate
    double test_fraction = 0.3;
    bool do_preprocess = false;        // log + z-score columns before use
    std::vector<int> force_include_encoders;
    std::uint64_t master_seed = 0;
    std::string out_dir = "out";
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

/// Fully-resolved echo (all defaults filled in).
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

/// Load the CSV or draw the synthetic dataset for this config.
Dataset acquire_dataset(const RunConfig& cfg);

/// Resolve budget and copy the shared knobs; n_train is the training-split
/// size the ratio form applies to.
PipelineConfig to_pipeline_config(const RunConfig& cfg, std::int64_t n_train);

} // namespace fedgbdt
