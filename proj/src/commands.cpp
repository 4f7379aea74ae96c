#include "fedgbdt/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fedgbdt/errors.hpp"
#include "fedgbdt/forest_io.hpp"
#include "fedgbdt/metrics.hpp"
#include "fedgbdt/rng.hpp"

namespace fedgbdt {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

int resolve_benign(const std::vector<std::string>& class_names, const std::string& name) {
    for (std::size_t k = 0; k < class_names.size(); ++k)
        if (class_names[k] == name) return static_cast<int>(k);
    throw ConfigError("benign class '" + name + "' is not in the dataset's class dictionary");
}

} // namespace

PreparedRun prepare_run(const RunConfig& cfg) {
    PreparedRun run;
    const Dataset full = acquire_dataset(cfg);
    run.benign_id = resolve_benign(full.class_names, cfg.data.benign_name);
    auto [train, test] = split_train_test(full, cfg.test_fraction, cfg.master_seed);
    run.train = std::move(train);
    run.test = std::move(test);
    if (cfg.do_preprocess) {
        const ColumnStats stats = preprocess(run.train);
        apply_preprocess(run.test, stats);
    }
    run.partitions =
        partition_clients(run.train, cfg.n_clients, cfg.partition,
                          derive_seed(cfg.master_seed, "partition", 0), run.benign_id);
    run.pipeline = to_pipeline_config(cfg, run.train.n_samples());
    return run;
}

namespace {

nlohmann::ordered_json report_json(const MetricsReport& metrics, const Dataset& reference,
                                   int benign_id) {
    nlohmann::ordered_json j = metrics_to_json(metrics);
    j["benign_class"] = reference.class_names[static_cast<std::size_t>(benign_id)];
    j["class_names"] = reference.class_names;
    return j;
}

} // namespace

int cmd_simulate(const RunConfig& cfg) {
    const PreparedRun run = prepare_run(cfg);
    const TrainingArtifacts artifacts = run_training(run.partitions, run.pipeline);

    const std::vector<int> preds = infer_batch(artifacts.model, run.test);
    const MetricsReport metrics =
        evaluate(preds, run.test.labels, run.benign_id, run.test.n_classes());

    const fs::path out(cfg.out_dir);
    const std::string config_echo = run_config_to_json(cfg).dump(2) + "\n";
    write_text(out / "run_config.json", config_echo);
    save_model(artifacts.model, (out / "model").string());
    write_text(out / "model" / "run_config.json", config_echo);
    write_text(out / "report.json", report_json(metrics, run.test, run.benign_id).dump(2) + "\n");
    write_text(out / "report.txt", metrics_to_table(metrics, run.test.class_names));
    write_text(out / "ledger.json", ledger_to_json(artifacts.ledger).dump(2) + "\n");
    write_text(out / "ledger.txt", ledger_to_table(artifacts.ledger));

    std::cout << "federated accuracy " << metrics.accuracy << " on " << metrics.n_eval
              << " held-out samples\n";
    std::cout << "selected clients " << artifacts.selected_clients.size() << ", encoders "
              << artifacts.model.encoders.size() << ", encoding width "
              << artifacts.model.encoding_width() << "\n";
    std::cout << "artifacts in " << out.string() << "\n";
    return kExitOk;
}

int cmd_central(const RunConfig& cfg) {
    const PreparedRun run = prepare_run(cfg);

    HyperParams hyper = cfg.hyper;
    std::optional<GridSearchResult> gs;
    if (cfg.grid) {
        const auto [gtrain, gvalid] =
            split_train_test(run.train, 0.25, derive_seed(cfg.master_seed, "central_grid", 0));
        gs = grid_search(gtrain, gvalid, *cfg.grid, derive_seed(cfg.master_seed, "central_fit", 0));
        hyper = gs->best;
    }
    const Forest forest =
        fit(run.train, hyper, derive_seed(cfg.master_seed, "central_fit", 0));
    const std::vector<int> preds = predict(forest, run.test);
    const MetricsReport metrics =
        evaluate(preds, run.test.labels, run.benign_id, run.test.n_classes());

    const fs::path out = fs::path(cfg.out_dir) / "central";
    write_text(out / "run_config.json", run_config_to_json(cfg).dump(2) + "\n");
    save_forest(forest, (out / "central_forest.json").string());
    write_text(out / "report.json", report_json(metrics, run.test, run.benign_id).dump(2) + "\n");
    write_text(out / "report.txt", metrics_to_table(metrics, run.test.class_names));
    if (gs) {
        nlohmann::ordered_json table = nlohmann::ordered_json::array();
        for (const GridPoint& p : gs->table) {
            nlohmann::ordered_json row;
            row["hyper"] = hyper_to_json(p.params);
            row["valid_accuracy"] = p.valid_accuracy;
            table.push_back(row);
        }
        write_text(out / "grid_table.json", table.dump(2) + "\n");
    }

    std::cout << "centralized accuracy " << metrics.accuracy << " on " << metrics.n_eval
              << " held-out samples\n";
    // surface the federated gap whenever a sibling simulate report exists
    const fs::path sibling = fs::path(cfg.out_dir) / "report.json";
    if (fs::exists(sibling)) {
        std::ifstream in(sibling);
        const auto fed = nlohmann::ordered_json::parse(in);
        const double gap = metrics.accuracy - fed.at("accuracy").get<double>();
        std::cout << "accuracy gap (centralized - federated): " << gap << "\n";
    }
    std::cout << "artifacts in " << out.string() << "\n";
    return kExitOk;
}

int cmd_unlearn(const std::string& model_dir, int client_id, const std::string& out_dir) {
    const RunConfig cfg = load_run_config((fs::path(model_dir) / "run_config.json").string());
    const PipelineModel saved = load_model(model_dir);
    const PreparedRun run = prepare_run(cfg);

    const std::string saved_pc = pipeline_config_to_json(saved.config).dump(2);
    const std::string derived_pc = pipeline_config_to_json(run.pipeline).dump(2);
    if (saved_pc != derived_pc)
        throw ConfigError("model directory's config snapshot does not match its run config");

    // the saved model must be reproducible before unlearning means anything
    const TrainingArtifacts artifacts = run_training(run.partitions, run.pipeline);
    if (model_to_string(artifacts.model) != model_to_string(saved))
        throw Error("saved model is not bit-reproducible from its config; refusing to unlearn");

    const bool was_encoder =
        std::any_of(saved.encoders.begin(), saved.encoders.end(),
                    [&](const EncoderRecord& e) { return e.client_id == client_id; });

    const TrainingArtifacts updated = unlearn_client(artifacts, client_id);
    const TrainingArtifacts fresh = run_training(run.partitions, run.pipeline, {client_id});
    const bool identical =
        model_to_string(updated.model) == model_to_string(fresh.model) &&
        ledger_to_json(updated.ledger) == ledger_to_json(fresh.ledger);
    if (!was_encoder && !identical)
        throw Error("unlearning equivalence violated for a non-encoder client");

    const std::vector<int> preds = infer_batch(updated.model, run.test);
    const MetricsReport metrics =
        evaluate(preds, run.test.labels, run.benign_id, run.test.n_classes());

    const fs::path out =
        out_dir.empty() ? fs::path(model_dir) / ("unlearn_client_" + std::to_string(client_id))
                        : fs::path(out_dir);
    save_model(updated.model, (out / "model").string());
    write_text(out / "model" / "run_config.json", run_config_to_json(cfg).dump(2) + "\n");

    nlohmann::ordered_json attest;
    attest["client_id"] = client_id;
    attest["was_encoder"] = was_encoder;
    attest["fresh_run_identical"] = identical;
    attest["equivalence_guaranteed"] = !was_encoder;
    write_text(out / "attestation.json", attest.dump(2) + "\n");
    write_text(out / "report.json", report_json(metrics, run.test, run.benign_id).dump(2) + "\n");
    write_text(out / "report.txt", metrics_to_table(metrics, run.test.class_names));

    std::cout << "unlearned client " << client_id << (was_encoder ? " (encoder)" : "")
              << "; fresh-run identical: " << (identical ? "yes" : "no") << "\n";
    std::cout << "updated model accuracy " << metrics.accuracy << "\n";
    std::cout << "artifacts in " << out.string() << "\n";
    return kExitOk;
}

int cmd_rules(const std::string& model_dir, const std::string& out_dir) {
    const PipelineModel model = load_model(model_dir);

    std::string text;
    text += "== server forest rules ==\n";
    for (const Rule& r : extract_rules(model.server_forest))
        text += format_rule(r, model.server_forest.class_names) + "\n";
    for (const EncoderRecord& e : model.encoders) {
        text += "== encoder " + std::to_string(e.client_id) + " rules ==\n";
        for (const Rule& r : extract_rules(e.forest))
            text += format_rule(r, e.forest.class_names) + "\n";
    }

    std::cout << text;
    if (!out_dir.empty()) {
        write_text(fs::path(out_dir) / "rules.txt", text);
        std::cout << "written to " << (fs::path(out_dir) / "rules.txt").string() << "\n";
    }
    return kExitOk;
}

int cmd_ledger(const RunConfig& cfg) {
    const PreparedRun run = prepare_run(cfg);
    const TrainingArtifacts artifacts = run_training(run.partitions, run.pipeline);

    const fs::path out = fs::path(cfg.out_dir) / "ledger";
    write_text(out / "run_config.json", run_config_to_json(cfg).dump(2) + "\n");
    write_text(out / "ledger.json", ledger_to_json(artifacts.ledger).dump(2) + "\n");
    write_text(out / "ledger.txt", ledger_to_table(artifacts.ledger));

    std::cout << ledger_to_table(artifacts.ledger);
    std::cout << "artifacts in " << out.string() << "\n";
    return kExitOk;
}

} // namespace fedgbdt
