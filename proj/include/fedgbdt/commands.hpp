#pragma once

#include <string>

#include "fedgbdt/config.hpp"

namespace fedgbdt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitPipelineError = 3;

/// Everything a command derives from a RunConfig before training starts.
struct PreparedRun {
    Dataset train;
    Dataset test;
    std::vector<ClientPartition> partitions;
    PipelineConfig pipeline;
    int benign_id = 0;
};

/// Acquire the dataset, resolve the benign class, split, optionally
/// preprocess, partition into clients and resolve the budget.  Every command
/// and the test harness go through this one path.
PreparedRun prepare_run(const RunConfig& cfg);

/// Run the federated pipeline end to end; writes model/, report, ledger and
/// the resolved config under out_dir.
int cmd_simulate(const RunConfig& cfg);

/// Train the pooled-data comparator and report held-out metrics.
int cmd_central(const RunConfig& cfg);

/// Remove one client from a saved model, write the updated model and an
/// equivalence attestation against a fresh excluded-upload run.
int cmd_unlearn(const std::string& model_dir, int client_id, const std::string& out_dir);

/// Dump the saved model's decision rules (server forest and encoders).
int cmd_rules(const std::string& model_dir, const std::string& out_dir);

/// Print and save the communication-cost table for the configured scenario.
int cmd_ledger(const RunConfig& cfg);

} // namespace fedgbdt
