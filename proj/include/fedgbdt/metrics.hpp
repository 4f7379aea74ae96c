#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace fedgbdt {

/// Evaluation summary over one prediction vector.  confusion(r, c) counts
/// samples of true class r predicted as c.
struct MetricsReport {
    double accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion; // C x C, rows = truth
    double miss_rate = 0.0;  // attacks among benign predictions / benign predictions
    double f1_attack = 0.0;  // F1 of the benign-vs-attack collapse, attack positive
    std::vector<std::int64_t> support; // per true class
    std::int64_t n_eval = 0;
};

/// Score predictions against truth.  n_classes fixes the confusion matrix
/// size (classes absent from both vectors still get rows); benign_class
/// drives the miss rate and the binary collapse.
MetricsReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                       int benign_class, int n_classes);

nlohmann::ordered_json metrics_to_json(const MetricsReport& r);

/// Plain-text table for terminal output.
std::string metrics_to_table(const MetricsReport& r, const std::vector<std::string>& class_names);

} // namespace fedgbdt
