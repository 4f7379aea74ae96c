#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fedgbdt {

using Scalar = double;
template <class S>
using MatrixT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VectorT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
using Matrix = MatrixT<Scalar>;
using Vector = VectorT<Scalar>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// In-memory tabular dataset.  Missing cells are tracked by an explicit
/// boolean mask; the value behind a missing cell is canonicalised to 0.0 so
/// serialisation stays byte-stable.
struct Dataset {
    Matrix features;                      // n x m
    BoolArray missing;                    // n x m, true = absent
    std::vector<int> labels;              // n, dense ids into class_names
    std::vector<std::string> class_names; // id -> display name

    Eigen::Index n_samples() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    /// Per-class sample counts, indexed by class id.
    std::vector<std::int64_t> class_counts() const;

    /// New dataset holding the given rows (in the given order).
    Dataset select_rows(const std::vector<int>& rows) const;
};

bool operator==(const Dataset& a, const Dataset& b);

enum class PreprocessMode { Log, Standardize, LogStandardize };

/// Column statistics captured by preprocessing so the same transform can be
/// replayed on held-out data.
struct ColumnStats {
    PreprocessMode mode = PreprocessMode::LogStandardize;
    Vector col_min;   // per-column minimum over observed cells (log step)
    Vector mean;      // mean of the values the z-score step saw
    Vector stddev;    // matching population stddev
    std::vector<bool> is_binary;   // {0,1}-valued columns skip the z-score
    std::vector<int> zero_std_columns; // recorded, not fatal
};

/// One client's shard of a partitioned dataset.
struct ClientPartition {
    int client_id = 0;
    Dataset data;
    std::vector<std::int64_t> class_counts; // indexed by global class id
    std::vector<int> source_rows;           // rows of the parent dataset, ascending
};

enum class PartitionMode { Homogeneous, Heterogeneous };

/// Load a CSV with a header row.  The label column is matched by name; every
/// other column must parse as a finite double, with ""/"NaN"/"nan" meaning
/// missing.  Class ids follow first appearance unless class_names pins them.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& class_names = {});

/// Inverse of load_csv: feature columns f0..f{m-1} then the label column.
/// Values are written with shortest round-trip formatting, missing as "".
void write_csv(const Dataset& d, const std::string& path,
               const std::string& label_column = "label");

/// Split rows across n_clients.  Homogeneous keeps every client's class mix
/// close to global (per-class round-robin after a seeded shuffle, counts
/// within +/-1).  Heterogeneous gives every client a benign share plus at
/// most two attack classes (when enough clients exist to honour that cap).
std::vector<ClientPartition> partition_clients(const Dataset& d, int n_clients,
                                               PartitionMode mode, std::uint64_t seed,
                                               int benign_class = -1);

/// Log: x <- log(x - col_min + 1) per cell.  Standardize: z-score with the
/// population stddev, skipping binary {0,1} columns.  LogStandardize chains
/// both (binary columns then skip the whole chain).  Missing cells always
/// pass through; zero-spread columns skip the division and are recorded in
/// stats.zero_std_columns.
ColumnStats preprocess(Dataset& d, PreprocessMode mode = PreprocessMode::LogStandardize);

/// Replay a fitted transform on another dataset (same columns).
void apply_preprocess(Dataset& d, const ColumnStats& stats);

/// Deterministic held-out split: floor(fraction * n) rows to test, rest to
/// train, both in ascending original-row order.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

/// Resolve the benign class id: explicit id if >= 0, else the class whose
/// name equals "benign" (case-insensitive fallback).
int find_benign_class(const Dataset& d, int benign_class);

} // namespace fedgbdt
