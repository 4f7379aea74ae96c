#pragma once

#include <cstdint>

#include "fedgbdt/dataset.hpp"
#include "fedgbdt/encoding.hpp"

namespace fedgbdt {

/// Client-side masking knobs: p is the per-cell feature drop probability,
/// q the fraction of labels replaced by a different random class.
struct MaskingParams {
    double p = 0.1;
    double q = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Laplace mechanism knobs for encodings; sensitivity is 2 because one row's
/// softmax block can move by at most 2 in L1.
struct DpParams {
    double epsilon = 50.0;
    double sensitivity = 2.0;
};

/// Independently drop each feature cell with probability p (cells already
/// missing stay missing).  The Bernoulli draw runs over every cell in
/// row-major order, so the mask pattern depends only on shape and seed.
Dataset mask_features(const Dataset& d, const MaskingParams& params);

/// Flip exactly floor(q*n) labels, chosen without replacement, each to a
/// uniformly drawn different class.
Dataset mask_labels(const Dataset& d, const MaskingParams& params);

/// Add independent Laplace(0, sensitivity/epsilon) noise to every encoding
/// cell; labels pass through.
EncodingMatrix add_laplace(const EncodingMatrix& enc, const DpParams& dp, std::uint64_t seed);

/// log10 of the brute-force guess count for reconstructing a model's logit
/// combinations, num_leaves^(C*T), returned in log form to avoid overflow.
double logit_search_space(int num_leaves, int n_classes, int n_estimators);

} // namespace fedgbdt
