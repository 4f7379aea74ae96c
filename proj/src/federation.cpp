#include "fedgbdt/federation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fedgbdt/errors.hpp"
#include "fedgbdt/forest_io.hpp"
#include "fedgbdt/privacy.hpp"
#include "fedgbdt/rng.hpp"

namespace fedgbdt {

namespace fs = std::filesystem;

Eigen::Index PipelineModel::encoding_width() const {
    Eigen::Index w = 0;
    for (const EncoderRecord& e : encoders)
        w += static_cast<Eigen::Index>(e.covered_classes.size()) - 1;
    return w;
}

namespace {

/// Client data with labels remapped to the encoder's local dense ids
/// (covered classes in ascending global order).
Dataset to_local_classes(const Dataset& d, const std::set<int>& covered) {
    Dataset out;
    out.features = d.features;
    out.missing = d.missing;
    std::vector<int> global_ids(covered.begin(), covered.end());
    std::map<int, int> to_local;
    for (std::size_t k = 0; k < global_ids.size(); ++k) {
        to_local[global_ids[k]] = static_cast<int>(k);
        out.class_names.push_back(d.class_names[static_cast<std::size_t>(global_ids[k])]);
    }
    out.labels.reserve(d.labels.size());
    for (int y : d.labels) out.labels.push_back(to_local.at(y));
    return out;
}

std::set<int> classes_present(const std::vector<int>& labels) {
    return std::set<int>(labels.begin(), labels.end());
}

} // namespace

EncodingMatrix encode_with(const std::vector<EncoderRecord>& encoders, const Dataset& d) {
    EncodingMatrix enc;
    enc.labels = d.labels;

    Eigen::Index width = 0;
    for (const EncoderRecord& e : encoders) {
        if (e.forest.n_features != d.n_features())
            throw FeatureDimMismatch(e.client_id, e.forest.n_features, d.n_features());
        width += static_cast<Eigen::Index>(e.covered_classes.size()) - 1;
    }
    enc.values.resize(d.n_samples(), width);

    Eigen::Index col = 0;
    for (const EncoderRecord& e : encoders) {
        const Eigen::Index h = static_cast<Eigen::Index>(e.covered_classes.size());
        const Matrix probs = predict_probs(e.forest, d); // n x h, local class order
        enc.values.block(0, col, d.n_samples(), h - 1) = probs.leftCols(h - 1);
        for (Eigen::Index k = 0; k < h - 1; ++k)
            enc.column_map.emplace_back(e.client_id, static_cast<int>(k));
        col += h - 1;
    }
    return enc;
}

namespace {

/// Stack uploads row-wise in the given client order and fit the server
/// forest on the result.  Shared by training and unlearning so both paths
/// produce identical bytes for identical inputs.
void finish_training(TrainingArtifacts& a, const PipelineConfig& cfg) {
    std::vector<const EncodingMatrix*> parts;
    for (int id : a.selected_clients) {
        auto it = a.uploads.find(id);
        if (it != a.uploads.end()) parts.push_back(&it->second);
    }
    if (parts.empty()) throw EmptyEncoding();

    Eigen::Index rows = 0;
    const Eigen::Index width = parts.front()->width();
    for (const EncodingMatrix* p : parts) rows += p->n_rows();

    Matrix values(rows, width);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(rows));
    Eigen::Index at = 0;
    for (const EncodingMatrix* p : parts) {
        values.block(at, 0, p->n_rows(), width) = p->values;
        labels.insert(labels.end(), p->labels.begin(), p->labels.end());
        at += p->n_rows();
    }

    // the server forest only ever sees encodings, never raw features
    const std::set<int> seen = classes_present(labels);
    a.model.server_classes.assign(seen.begin(), seen.end());

    Dataset server_ds;
    server_ds.features = std::move(values);
    server_ds.missing = BoolArray::Constant(rows, width, false);
    std::map<int, int> to_local;
    for (std::size_t k = 0; k < a.model.server_classes.size(); ++k) {
        to_local[a.model.server_classes[k]] = static_cast<int>(k);
        server_ds.class_names.push_back(
            a.model.class_names[static_cast<std::size_t>(a.model.server_classes[k])]);
    }
    server_ds.labels.reserve(labels.size());
    for (int y : labels) server_ds.labels.push_back(to_local.at(y));

    HyperParams server_hyper = cfg.server_hyper;
    if (cfg.server_grid) {
        const auto [grid_train, grid_valid] =
            split_train_test(server_ds, 0.25, derive_seed(cfg.master_seed, "server_grid", 0));
        server_hyper = grid_search(grid_train, grid_valid, *cfg.server_grid,
                                   derive_seed(cfg.master_seed, "server_fit", 0))
                           .best;
    }
    a.model.server_forest =
        fit(server_ds, server_hyper, derive_seed(cfg.master_seed, "server_fit", 0));
    a.server_training = std::move(server_ds);

    // ledger: every selected client ships its encoder up; every uploading
    // client pulls the selected encoder set down
    std::vector<std::int64_t> uploaded_params;
    for (const EncoderRecord& e : a.encoder_pool) uploaded_params.push_back(e.param_count);
    std::vector<std::int64_t> selected_params;
    std::vector<int> selected_classes;
    for (const EncoderRecord& e : a.model.encoders) {
        selected_params.push_back(e.param_count);
        selected_classes.push_back(static_cast<int>(e.covered_classes.size()));
    }
    a.ledger = communication_ledger(static_cast<int>(parts.size()), uploaded_params,
                                    selected_params, selected_classes, rows, cfg.budget);
}

} // namespace

TrainingArtifacts run_training(const std::vector<ClientPartition>& partitions,
                               const PipelineConfig& config, const std::set<int>& exclude_upload) {
    if (partitions.empty()) throw std::invalid_argument("run_training needs at least one partition");
    config.encoder_hyper.validate();
    config.server_hyper.validate();

    TrainingArtifacts a;
    a.model.class_names = partitions.front().data.class_names;
    a.model.config = config;
    for (const ClientPartition& p : partitions)
        if (p.data.class_names != a.model.class_names)
            throw std::invalid_argument("partitions disagree on the class dictionary");

    // 1. per-client masking, fixed per (data, master seed)
    for (const ClientPartition& p : partitions) {
        MaskingParams mp;
        mp.p = config.mask_p;
        mp.q = config.label_q;
        mp.seed = derive_seed(config.master_seed, "client_mask",
                              static_cast<std::uint64_t>(p.client_id));
        a.masked_data.emplace(p.client_id, mask_labels(mask_features(p.data, mp), mp));
    }

    // 1b. budgeted client selection on masked label histograms
    std::vector<ClientSummary> summaries;
    for (const ClientPartition& p : partitions)
        summaries.push_back(
            ClientSummary::from_counts(p.client_id, a.masked_data.at(p.client_id).class_counts()));
    a.selected_clients = select_clients(summaries, config.budget);

    // 1c. selected clients fit local encoders on their masked shards
    for (int id : a.selected_clients) {
        const Dataset& shard = a.masked_data.at(id);
        const std::set<int> covered = classes_present(shard.labels);
        const Dataset local = to_local_classes(shard, covered);
        Forest forest = fit(local, config.encoder_hyper,
                            derive_seed(config.master_seed, "encoder_fit",
                                        static_cast<std::uint64_t>(id)));
        a.encoder_pool.push_back(EncoderRecord::from_forest(id, std::move(forest), covered));
    }

    // 2. minimal-cover encoder selection
    std::set<int> cover_target;
    for (const EncoderRecord& e : a.encoder_pool)
        cover_target.insert(e.covered_classes.begin(), e.covered_classes.end());
    a.model.cover_target = cover_target;
    a.model.encoders = select_encoders(a.encoder_pool, cover_target, config.force_include_encoders);

    // 3. every selected client encodes its own shard and uploads with noise
    for (int id : a.selected_clients) {
        if (exclude_upload.count(id)) continue;
        EncodingMatrix enc = encode_with(a.model.encoders, a.masked_data.at(id));
        if (std::isfinite(config.epsilon)) {
            DpParams dp;
            dp.epsilon = config.epsilon;
            enc = add_laplace(enc, dp,
                              derive_seed(config.master_seed, "laplace",
                                          static_cast<std::uint64_t>(id)));
        }
        a.uploads.emplace(id, std::move(enc));
    }

    // 4. server-side aggregation and fit
    finish_training(a, config);
    return a;
}

// ---- inference ----

namespace {

InferResult classify_encoding(const PipelineModel& model, const EncodingMatrix& enc,
                              Eigen::Index row) {
    Dataset one;
    one.features = enc.values.row(row);
    one.missing = BoolArray::Constant(1, enc.width(), false);
    one.labels = {0};
    for (int g : model.server_classes)
        one.class_names.push_back(model.class_names[static_cast<std::size_t>(g)]);

    InferResult out;
    out.probs = predict_probs_row(model.server_forest, one, 0);
    int best = 0;
    for (int c = 1; c < out.probs.size(); ++c)
        if (out.probs(c) > out.probs(best)) best = c;
    out.class_id = model.server_classes[static_cast<std::size_t>(best)];
    return out;
}

} // namespace

InferResult infer(const PipelineModel& model, const Dataset& d, Eigen::Index row) {
    if (model.encoders.empty()) throw EmptyEncoding();
    if (d.n_features() != model.encoders.front().forest.n_features)
        throw DimensionMismatch(model.encoders.front().forest.n_features, d.n_features());
    Dataset one;
    one.features = d.features.row(row);
    one.missing = d.missing.row(row);
    one.labels = {0};
    one.class_names = model.class_names;
    const EncodingMatrix enc = encode_with(model.encoders, one);
    return classify_encoding(model, enc, 0);
}

InferResult infer(const PipelineModel& model, const Vector& x) {
    if (model.encoders.empty()) throw EmptyEncoding();
    if (x.size() != model.encoders.front().forest.n_features)
        throw DimensionMismatch(model.encoders.front().forest.n_features, x.size());
    Dataset one;
    one.features = x.transpose();
    one.missing = BoolArray::Constant(1, x.size(), false);
    one.labels = {0};
    one.class_names = model.class_names;
    const EncodingMatrix enc = encode_with(model.encoders, one);
    return classify_encoding(model, enc, 0);
}

std::vector<int> infer_batch(const PipelineModel& model, const Dataset& d) {
    const EncodingMatrix enc = encode_with(model.encoders, d);
    Dataset server_in;
    server_in.features = enc.values;
    server_in.missing = BoolArray::Constant(enc.n_rows(), enc.width(), false);
    server_in.labels.assign(static_cast<std::size_t>(enc.n_rows()), 0);
    for (int g : model.server_classes)
        server_in.class_names.push_back(model.class_names[static_cast<std::size_t>(g)]);
    const std::vector<int> local = predict(model.server_forest, server_in);
    std::vector<int> out;
    out.reserve(local.size());
    for (int c : local) out.push_back(model.server_classes[static_cast<std::size_t>(c)]);
    return out;
}

// ---- unlearning ----

TrainingArtifacts unlearn_client(const TrainingArtifacts& artifacts, int client_id) {
    if (!artifacts.masked_data.count(client_id)) throw UnknownClient(client_id);
    if (!artifacts.uploads.count(client_id)) return artifacts; // never uploaded anything

    TrainingArtifacts out = artifacts;
    out.uploads.erase(client_id);
    out.masked_data.erase(client_id);

    const bool was_encoder =
        std::any_of(artifacts.model.encoders.begin(), artifacts.model.encoders.end(),
                    [&](const EncoderRecord& e) { return e.client_id == client_id; });
    const PipelineConfig& cfg = artifacts.model.config;

    if (was_encoder) {
        out.encoder_pool.clear();
        for (const EncoderRecord& e : artifacts.encoder_pool)
            if (e.client_id != client_id) out.encoder_pool.push_back(e);

        std::set<int> reachable;
        for (const EncoderRecord& e : out.encoder_pool)
            reachable.insert(e.covered_classes.begin(), e.covered_classes.end());
        std::set<int> missing;
        for (int c : artifacts.model.cover_target)
            if (!reachable.count(c)) missing.insert(c);
        if (!missing.empty()) throw CoverageLostAfterUnlearn(missing);

        std::vector<int> must;
        for (int id : cfg.force_include_encoders)
            if (id != client_id) must.push_back(id);
        out.model.encoders = select_encoders(out.encoder_pool, artifacts.model.cover_target, must);

        // the replacement encoder set re-encodes every retained upload
        for (auto& [cid, upload] : out.uploads) {
            EncodingMatrix enc = encode_with(out.model.encoders, out.masked_data.at(cid));
            if (std::isfinite(cfg.epsilon)) {
                DpParams dp;
                dp.epsilon = cfg.epsilon;
                enc = add_laplace(enc, dp,
                                  derive_seed(cfg.master_seed, "laplace",
                                              static_cast<std::uint64_t>(cid)));
            }
            upload = std::move(enc);
        }
    }

    finish_training(out, cfg);
    return out;
}

// ---- ledger ----

CostLedger communication_ledger(int k_uploading_clients,
                                const std::vector<std::int64_t>& uploaded_encoder_params,
                                const std::vector<std::int64_t>& selected_encoder_params,
                                const std::vector<int>& selected_encoder_classes,
                                std::int64_t n_rows_uploaded, std::int64_t budget,
                                std::int64_t fedavg_rounds) {
    CostLedger ledger;
    for (std::int64_t p : uploaded_encoder_params) ledger.encoder_upload_params += p;

    std::int64_t width = 0; // W = sum of (h_i - 1)
    std::int64_t class_sum = 0;
    for (int h : selected_encoder_classes) {
        width += h - 1;
        class_sum += h;
    }
    ledger.encoding_upload_params = n_rows_uploaded * (width + 1); // +1 for the label

    std::int64_t selected_sum = 0;
    for (std::int64_t p : selected_encoder_params) selected_sum += p;
    ledger.encoder_download_params = static_cast<std::int64_t>(k_uploading_clients) * selected_sum;

    ledger.upload_params = ledger.encoder_upload_params + ledger.encoding_upload_params;
    ledger.download_params = ledger.encoder_download_params;
    ledger.upload_bytes = ledger.upload_params * 8;
    ledger.download_bytes = ledger.download_params * 8;
    ledger.clients_uploading = k_uploading_clients;
    ledger.encoders_selected = static_cast<int>(selected_encoder_params.size());
    ledger.mean_encoder_classes =
        selected_encoder_classes.empty()
            ? 0.0
            : static_cast<double>(class_sum) / static_cast<double>(selected_encoder_classes.size());
    ledger.rows_uploaded = n_rows_uploaded;
    ledger.budget = budget;
    ledger.fedavg_rounds = fedavg_rounds;
    return ledger;
}

nlohmann::ordered_json ledger_to_json(const CostLedger& ledger) {
    nlohmann::ordered_json j;
    j["upload_params"] = ledger.upload_params;
    j["download_params"] = ledger.download_params;
    j["upload_bytes"] = ledger.upload_bytes;
    j["download_bytes"] = ledger.download_bytes;
    j["encoder_upload_params"] = ledger.encoder_upload_params;
    j["encoding_upload_params"] = ledger.encoding_upload_params;
    j["encoder_download_params"] = ledger.encoder_download_params;
    j["clients_uploading"] = ledger.clients_uploading;
    j["encoders_selected"] = ledger.encoders_selected;
    j["mean_encoder_classes"] = ledger.mean_encoder_classes;
    j["rows_uploaded"] = ledger.rows_uploaded;
    j["budget"] = ledger.budget;
    j["fedavg_rounds"] = ledger.fedavg_rounds;
    return j;
}

std::string ledger_to_table(const CostLedger& ledger) {
    std::string s;
    s += "upload_params          " + std::to_string(ledger.upload_params) + "\n";
    s += "  encoder_upload       " + std::to_string(ledger.encoder_upload_params) + "\n";
    s += "  encoding_upload      " + std::to_string(ledger.encoding_upload_params) + "\n";
    s += "download_params        " + std::to_string(ledger.download_params) + "\n";
    s += "upload_bytes           " + std::to_string(ledger.upload_bytes) + "\n";
    s += "download_bytes         " + std::to_string(ledger.download_bytes) + "\n";
    s += "clients_uploading      " + std::to_string(ledger.clients_uploading) + "\n";
    s += "encoders_selected      " + std::to_string(ledger.encoders_selected) + "\n";
    s += "mean_encoder_classes   " + std::to_string(ledger.mean_encoder_classes) + "\n";
    s += "rows_uploaded          " + std::to_string(ledger.rows_uploaded) + "\n";
    s += "budget                 " + std::to_string(ledger.budget) + "\n";
    s += "fedavg_rounds          " + std::to_string(ledger.fedavg_rounds) + "\n";
    return s;
}

// ---- config + model serialization ----

nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["budget"] = cfg.budget;
    j["mask_p"] = cfg.mask_p;
    j["label_q"] = cfg.label_q;
    if (std::isinf(cfg.epsilon))
        j["epsilon"] = "inf";
    else
        j["epsilon"] = cfg.epsilon;
    j["encoder_hyper"] = hyper_to_json(cfg.encoder_hyper);
    j["server_hyper"] = hyper_to_json(cfg.server_hyper);
    if (cfg.server_grid) {
        nlohmann::ordered_json g;
        g["n_estimators"] = cfg.server_grid->n_estimators;
        g["max_depth"] = cfg.server_grid->max_depth;
        g["learning_rate"] = cfg.server_grid->learning_rate;
        g["lambda_l2"] = cfg.server_grid->lambda_l2;
        j["server_grid"] = g;
    }
    j["force_include_encoders"] = cfg.force_include_encoders;
    j["master_seed"] = cfg.master_seed;
    return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::ordered_json& j) {
    PipelineConfig cfg;
    cfg.budget = j.at("budget").get<std::int64_t>();
    cfg.mask_p = j.at("mask_p").get<double>();
    cfg.label_q = j.at("label_q").get<double>();
    if (j.at("epsilon").is_string())
        cfg.epsilon = std::numeric_limits<double>::infinity();
    else
        cfg.epsilon = j.at("epsilon").get<double>();
    cfg.encoder_hyper = hyper_from_json(j.at("encoder_hyper"));
    cfg.server_hyper = hyper_from_json(j.at("server_hyper"));
    if (j.contains("server_grid")) {
        HyperGrid g;
        g.n_estimators = j.at("server_grid").at("n_estimators").get<std::vector<int>>();
        g.max_depth = j.at("server_grid").at("max_depth").get<std::vector<int>>();
        g.learning_rate = j.at("server_grid").at("learning_rate").get<std::vector<double>>();
        g.lambda_l2 = j.at("server_grid").at("lambda_l2").get<std::vector<double>>();
        cfg.server_grid = g;
    }
    cfg.force_include_encoders = j.at("force_include_encoders").get<std::vector<int>>();
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    return cfg;
}

namespace {

std::vector<std::pair<std::string, std::string>> model_files(const PipelineModel& model) {
    std::vector<std::pair<std::string, std::string>> files;

    nlohmann::ordered_json manifest;
    manifest["format"] = "fed-gbdt-model";
    manifest["version"] = 1;
    manifest["class_names"] = model.class_names;
    manifest["server_classes"] = model.server_classes;
    manifest["cover_target"] = std::vector<int>(model.cover_target.begin(), model.cover_target.end());
    std::vector<int> order;
    nlohmann::ordered_json column_map = nlohmann::ordered_json::array();
    for (const EncoderRecord& e : model.encoders) {
        order.push_back(e.client_id);
        for (std::size_t k = 0; k + 1 < e.covered_classes.size(); ++k)
            column_map.push_back({e.client_id, static_cast<int>(k)});
    }
    manifest["encoder_order"] = order;
    manifest["column_map"] = column_map;
    files.emplace_back("manifest.json", manifest.dump(2) + "\n");

    files.emplace_back("config.json", pipeline_config_to_json(model.config).dump(2) + "\n");

    for (const EncoderRecord& e : model.encoders) {
        nlohmann::ordered_json j;
        j["client_id"] = e.client_id;
        j["covered_classes"] =
            std::vector<int>(e.covered_classes.begin(), e.covered_classes.end());
        j["param_count"] = e.param_count;
        j["forest"] = forest_to_json(e.forest);
        files.emplace_back("encoder_" + std::to_string(e.client_id) + ".json", j.dump(2) + "\n");
    }

    files.emplace_back("server_forest.json", forest_to_string(model.server_forest));
    return files;
}

} // namespace

void save_model(const PipelineModel& model, const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& [name, content] : model_files(model)) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw Error("cannot write '" + name + "' in '" + dir + "'");
        out << content;
    }
}

PipelineModel load_model(const std::string& dir) {
    auto read_file = [&](const std::string& name) {
        std::ifstream in(fs::path(dir) / name);
        if (!in) throw Error("cannot open '" + name + "' in '" + dir + "'");
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };

    const auto manifest = nlohmann::ordered_json::parse(read_file("manifest.json"));
    if (manifest.at("format").get<std::string>() != "fed-gbdt-model")
        throw Error("'" + dir + "' is not a model directory");

    PipelineModel model;
    model.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    model.server_classes = manifest.at("server_classes").get<std::vector<int>>();
    for (int c : manifest.at("cover_target").get<std::vector<int>>()) model.cover_target.insert(c);
    model.config = pipeline_config_from_json(nlohmann::ordered_json::parse(read_file("config.json")));

    for (int id : manifest.at("encoder_order").get<std::vector<int>>()) {
        const auto j = nlohmann::ordered_json::parse(read_file("encoder_" + std::to_string(id) + ".json"));
        EncoderRecord e;
        e.client_id = j.at("client_id").get<int>();
        for (int c : j.at("covered_classes").get<std::vector<int>>()) e.covered_classes.insert(c);
        e.param_count = j.at("param_count").get<std::int64_t>();
        e.forest = forest_from_json(j.at("forest"));
        model.encoders.push_back(std::move(e));
    }
    model.server_forest = forest_from_string(read_file("server_forest.json"));
    return model;
}

std::string model_to_string(const PipelineModel& model) {
    std::string s;
    for (const auto& [name, content] : model_files(model)) {
        s += "== " + name + " ==\n";
        s += content;
    }
    return s;
}

} // namespace fedgbdt
