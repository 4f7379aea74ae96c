#include "fedgbdt/metrics.hpp"

#include <sstream>

#include "fedgbdt/errors.hpp"

namespace fedgbdt {

MetricsReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                       int benign_class, int n_classes) {
    if (predictions.size() != truth.size()) throw LengthMismatch(predictions.size(), truth.size());
    if (predictions.empty()) throw LengthMismatch(0, 0);
    if (benign_class < 0 || benign_class >= n_classes)
        throw std::invalid_argument("benign class id out of range");

    MetricsReport r;
    r.n_eval = static_cast<std::int64_t>(predictions.size());
    r.confusion.assign(static_cast<std::size_t>(n_classes),
                       std::vector<std::int64_t>(static_cast<std::size_t>(n_classes), 0));
    r.support.assign(static_cast<std::size_t>(n_classes), 0);

    std::int64_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int t = truth[i];
        if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
            throw std::invalid_argument("class id out of range");
        r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]++;
        r.support[static_cast<std::size_t>(t)]++;
        if (p == t) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_eval);

    // miss rate: of all samples *predicted* benign, how many are truly attacks
    std::int64_t benign_preds = 0;
    std::int64_t missed_attacks = 0;
    // binary collapse, attack = positive
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_benign = predictions[i] == benign_class;
        const bool true_benign = truth[i] == benign_class;
        if (pred_benign) {
            ++benign_preds;
            if (!true_benign) ++missed_attacks;
        }
        if (!pred_benign && !true_benign) ++tp;
        if (!pred_benign && true_benign) ++fp;
        if (pred_benign && !true_benign) ++fn;
    }
    r.miss_rate = benign_preds == 0
                      ? 0.0
                      : static_cast<double>(missed_attacks) / static_cast<double>(benign_preds);
    const std::int64_t denom = 2 * tp + fp + fn;
    r.f1_attack = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    return r;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["miss_rate"] = r.miss_rate;
    j["f1_attack"] = r.f1_attack;
    j["n_eval"] = r.n_eval;
    j["support"] = r.support;
    j["confusion"] = r.confusion;
    return j;
}

std::string metrics_to_table(const MetricsReport& r, const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "accuracy   " << r.accuracy << "\n";
    out << "miss_rate  " << r.miss_rate << "\n";
    out << "f1_attack  " << r.f1_attack << "\n";
    out << "n_eval     " << r.n_eval << "\n";
    out << "confusion (rows = truth):\n";
    for (std::size_t t = 0; t < r.confusion.size(); ++t) {
        out << "  ";
        if (t < class_names.size())
            out << class_names[t];
        else
            out << "class" << t;
        out << ":";
        for (std::int64_t v : r.confusion[t]) out << ' ' << v;
        out << "\n";
    }
    return out.str();
}

} // namespace fedgbdt
