#include "fedgbdt/synthetic.hpp"

#include <stdexcept>

#include "fedgbdt/rng.hpp"

namespace fedgbdt {

Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n_samples < 1 || spec.n_features < 1 || spec.n_classes < 1)
        throw std::invalid_argument("synthetic spec must be positive in every dimension");
    if (spec.n_features < 31 && spec.n_classes > (1 << spec.n_features))
        throw std::invalid_argument("need n_classes <= 2^n_features for distinct cluster corners");

    Dataset d;
    d.class_names.push_back("benign");
    for (int c = 1; c < spec.n_classes; ++c) d.class_names.push_back("attack" + std::to_string(c));

    const int n = spec.n_samples;
    const int m = spec.n_features;
    d.features.resize(n, m);
    d.missing = BoolArray::Constant(n, m, false);
    d.labels.resize(static_cast<std::size_t>(n));

    // near-equal class sizes, remainder to the low ids
    std::vector<int> sizes(static_cast<std::size_t>(spec.n_classes), n / spec.n_classes);
    for (int c = 0; c < n % spec.n_classes; ++c) sizes[static_cast<std::size_t>(c)]++;

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffler(derive_seed(seed, "synthetic_order", 0));
    shuffler.shuffle(order);

    Rng sampler(derive_seed(seed, "synthetic_values", 0));
    int at = 0;
    for (int c = 0; c < spec.n_classes; ++c) {
        for (int k = 0; k < sizes[static_cast<std::size_t>(c)]; ++k) {
            const int row = order[static_cast<std::size_t>(at++)];
            d.labels[static_cast<std::size_t>(row)] = c;
            for (int j = 0; j < m; ++j) {
                const double center = ((c >> (j % 31)) & 1) ? spec.center_scale : -spec.center_scale;
                d.features(row, j) = center + spec.cluster_std * sampler.normal();
            }
        }
    }
    return d;
}

} // namespace fedgbdt
