#pragma once

#include <cstdint>

#include "fedgbdt/dataset.hpp"

namespace fedgbdt {

/// Gaussian class clusters with controllable overlap.  Class c's center
/// places coordinate j at +/- center_scale by bit j of c, so distinct
/// classes sit at distinct hypercube corners; cluster_std sets the overlap.
/// Class 0 is named "benign", the rest "attack1".."attack{C-1}".
struct SyntheticSpec {
    int n_samples = 8000;
    int n_features = 4;
    int n_classes = 4;
    double cluster_std = 1.0;
    double center_scale = 2.0;
};

Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace fedgbdt
