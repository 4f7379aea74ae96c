#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "fedgbdt/gbdt.hpp"

namespace fedgbdt {

/// What the server knows about one client before selection: its (masked)
/// label histogram.
struct ClientSummary {
    int client_id = 0;
    std::vector<std::int64_t> class_counts; // length C
    std::int64_t total = 0;

    static ClientSummary from_counts(int client_id, std::vector<std::int64_t> counts);
};

/// A trained client encoder as the server sees it.
struct EncoderRecord {
    int client_id = 0;
    Forest forest;
    std::set<int> covered_classes;   // global class ids present in training labels
    std::int64_t param_count = 0;    // total leaves across all trees

    static EncoderRecord from_forest(int client_id, Forest forest, std::set<int> covered);
};

/// Population variance of a class-count vector (divisor C).
double counts_variance(const std::vector<std::int64_t>& counts);

/// Budgeted greedy client selection: start from the feasible client with the
/// most balanced histogram, then repeatedly add the client that keeps the
/// cumulative histogram most balanced without exceeding the budget.  Returns
/// client ids in pick order.
std::vector<int> select_clients(const std::vector<ClientSummary>& summaries, std::int64_t budget);

/// Greedy set cover over encoder class sets (largest uncovered gain first,
/// ties to the larger class set then the lower client id), followed by a
/// pruning pass that drops any member whose removal keeps full coverage.
/// must_include ids are forced into the result and exempt from pruning.
std::vector<EncoderRecord> select_encoders(const std::vector<EncoderRecord>& records,
                                           const std::set<int>& all_classes,
                                           const std::vector<int>& must_include = {});

} // namespace fedgbdt
