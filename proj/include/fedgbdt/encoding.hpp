#pragma once

#include <utility>
#include <vector>

#include "fedgbdt/dataset.hpp"

namespace fedgbdt {

/// Concatenated trimmed-softmax encodings.  Column k holds probability of the
/// column_map[k].second-th covered class of the encoder owned by client
/// column_map[k].first; each encoder's last covered class is dropped.
struct EncodingMatrix {
    Matrix values;                              // n x W
    std::vector<int> labels;                    // n, global class ids
    std::vector<std::pair<int, int>> column_map; // (owner client id, encoder-local class id)

    Eigen::Index n_rows() const { return values.rows(); }
    Eigen::Index width() const { return values.cols(); }
};

} // namespace fedgbdt
