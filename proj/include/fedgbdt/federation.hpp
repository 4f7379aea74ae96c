#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedgbdt/dataset.hpp"
#include "fedgbdt/encoding.hpp"
#include "fedgbdt/selection.hpp"

namespace fedgbdt {

/// Everything one training round needs: privacy knobs, budget, model
/// hyperparameters and the master seed all per-client randomness derives
/// from.  epsilon = infinity disables encoding noise.
struct PipelineConfig {
    std::int64_t budget = 0;
    double mask_p = 0.1;
    double label_q = 0.2;
    double epsilon = 50.0;
    HyperParams encoder_hyper;
    HyperParams server_hyper;
    std::optional<HyperGrid> server_grid; // when set, server hyper re-tuned on encodings
    std::vector<int> force_include_encoders;
    std::uint64_t master_seed = 0;
};

/// The deployable result: selected encoders feeding a server-side forest.
/// Inference always routes through the encoders; raw features never reach
/// the server forest.
struct PipelineModel {
    std::vector<EncoderRecord> encoders; // selection order
    Forest server_forest;
    std::vector<std::string> class_names; // global dictionary
    std::vector<int> server_classes;      // global id per server forest output
    std::set<int> cover_target;           // classes encoder selection had to cover
    PipelineConfig config;

    Eigen::Index encoding_width() const;
};

/// Exact communication cost of one training round, in parameters and bytes
/// (8 bytes per parameter).
struct CostLedger {
    std::int64_t upload_params = 0;
    std::int64_t download_params = 0;
    std::int64_t upload_bytes = 0;
    std::int64_t download_bytes = 0;
    std::int64_t encoder_upload_params = 0;  // clients shipping trained encoders
    std::int64_t encoding_upload_params = 0; // rows x (W + 1 for the label)
    std::int64_t encoder_download_params = 0;
    int clients_uploading = 0;   // k
    int encoders_selected = 0;   // M
    double mean_encoder_classes = 0.0; // c_M
    std::int64_t rows_uploaded = 0;
    std::int64_t budget = 0;           // B_t, echoed for reporting
    std::int64_t fedavg_rounds = 0;    // R, reporting only; this pipeline never runs rounds
};

/// Fully inspectable output of run_training; model plus every intermediate
/// the tests and the unlearning path need.
struct TrainingArtifacts {
    PipelineModel model;
    CostLedger ledger;
    std::vector<int> selected_clients;        // pick order
    std::vector<EncoderRecord> encoder_pool;  // every trained encoder
    std::map<int, EncodingMatrix> uploads;    // client id -> noisy encoding
    std::map<int, Dataset> masked_data;       // client id -> masked shard (all clients)
    Dataset server_training;                  // what the server forest was fit on
};

/// Trimmed-softmax encoding: per encoder, softmax over its covered classes
/// (ascending global id), drop the last column, concatenate in encoder
/// order.  Labels pass through.
EncodingMatrix encode_with(const std::vector<EncoderRecord>& encoders, const Dataset& d);

/// One full training round: mask, select clients on masked histograms, fit
/// encoders, select encoders, encode + noise, fit the server forest.
/// Deterministic in (partitions, config).  exclude_upload suppresses chosen
/// clients' encoding upload (their encoders still train), which is exactly
/// the counterfactual unlearning must match.
TrainingArtifacts run_training(const std::vector<ClientPartition>& partitions,
                               const PipelineConfig& config,
                               const std::set<int>& exclude_upload = {});

struct InferResult {
    int class_id = 0; // global id
    Vector probs;     // over model.server_classes
};

/// Encode one sample through the selected encoders (no noise) and classify.
InferResult infer(const PipelineModel& model, const Vector& x);
InferResult infer(const PipelineModel& model, const Dataset& d, Eigen::Index row);

/// Batch path: encode once, predict all rows; returns global class ids.
std::vector<int> infer_batch(const PipelineModel& model, const Dataset& d);

/// Remove one client's contribution.  Non-encoder clients: drop their rows
/// and retrain the server forest.  Encoder clients: re-select encoders from
/// the remaining pool (error if coverage breaks), re-encode every retained
/// client, retrain.  Matches the fresh excluded-upload run bit-exactly for
/// non-encoder clients under the same master seed.
TrainingArtifacts unlearn_client(const TrainingArtifacts& artifacts, int client_id);

/// Closed-form communication cost.  upload = encoder params + rows x (W+1);
/// download = k x selected encoder params.
CostLedger communication_ledger(int k_uploading_clients,
                                const std::vector<std::int64_t>& uploaded_encoder_params,
                                const std::vector<std::int64_t>& selected_encoder_params,
                                const std::vector<int>& selected_encoder_classes,
                                std::int64_t n_rows_uploaded, std::int64_t budget = 0,
                                std::int64_t fedavg_rounds = 0);

// ---- serialization ----

nlohmann::ordered_json ledger_to_json(const CostLedger& ledger);
std::string ledger_to_table(const CostLedger& ledger);

nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::ordered_json& j);

/// Model directory: manifest + config snapshot + server forest + one file
/// per encoder.  Byte-stable for fixed inputs.
void save_model(const PipelineModel& model, const std::string& dir);
PipelineModel load_model(const std::string& dir);

/// Canonical one-string form of the whole model, used for equivalence checks
/// (identical to concatenating the saved files).
std::string model_to_string(const PipelineModel& model);

} // namespace fedgbdt
