#include "fedgbdt/privacy.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "fedgbdt/errors.hpp"
#include "fedgbdt/rng.hpp"

namespace fedgbdt {

void MaskingParams::validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mask probability p must be in [0, 1]");
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("label noise q must be in [0, 1)");
}

Dataset mask_features(const Dataset& d, const MaskingParams& params) {
    params.validate();
    Dataset out = d;
    Rng rng(derive_seed(params.seed, "mask_features", 0));
    for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.features.cols(); ++j) {
            const bool drop = rng.bernoulli(params.p); // drawn for every cell
            if (drop && !out.missing(i, j)) {
                out.missing(i, j) = true;
                out.features(i, j) = 0.0;
            }
        }
    }
    return out;
}

Dataset mask_labels(const Dataset& d, const MaskingParams& params) {
    params.validate();
    const int n = static_cast<int>(d.n_samples());

    // flips draw from the classes this dataset actually observes, so a
    // client shard keeps its class support (and hence its encoder coverage)
    std::vector<int> present;
    {
        std::set<int> seen(d.labels.begin(), d.labels.end());
        present.assign(seen.begin(), seen.end());
    }
    if (params.q > 0.0 && present.size() < 2) throw SingleClassNoise();
    Dataset out = d;
    const int k = static_cast<int>(std::floor(params.q * n));
    if (k == 0) return out;

    Rng rng(derive_seed(params.seed, "mask_labels", 0));
    const std::vector<int> chosen = rng.sample_without_replacement(n, k);
    for (int i : chosen) {
        const int old = out.labels[static_cast<std::size_t>(i)];
        // uniform over the other observed classes
        std::size_t pos = 0;
        while (present[pos] != old) ++pos;
        std::size_t pick = static_cast<std::size_t>(rng.below(present.size() - 1));
        if (pick >= pos) ++pick;
        out.labels[static_cast<std::size_t>(i)] = present[pick];
    }
    return out;
}

EncodingMatrix add_laplace(const EncodingMatrix& enc, const DpParams& dp, std::uint64_t seed) {
    if (!(dp.epsilon > 0.0)) throw NonPositiveEpsilon(dp.epsilon);
    EncodingMatrix out = enc;
    const double scale = dp.sensitivity / dp.epsilon;
    Rng rng(derive_seed(seed, "laplace", 0));
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j)
            out.values(i, j) += rng.laplace(scale);
    return out;
}

double logit_search_space(int num_leaves, int n_classes, int n_estimators) {
    if (num_leaves < 1 || n_classes < 1 || n_estimators < 1)
        throw std::invalid_argument("search space needs num_leaves, C and T all >= 1");
    return static_cast<double>(n_classes) * static_cast<double>(n_estimators) *
           std::log10(static_cast<double>(num_leaves));
}

} // namespace fedgbdt
