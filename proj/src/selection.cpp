#include "fedgbdt/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fedgbdt/errors.hpp"

namespace fedgbdt {

ClientSummary ClientSummary::from_counts(int client_id, std::vector<std::int64_t> counts) {
    ClientSummary s;
    s.client_id = client_id;
    s.total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    s.class_counts = std::move(counts);
    return s;
}

EncoderRecord EncoderRecord::from_forest(int client_id, Forest forest, std::set<int> covered) {
    EncoderRecord r;
    r.client_id = client_id;
    r.param_count = forest.param_count();
    r.forest = std::move(forest);
    r.covered_classes = std::move(covered);
    return r;
}

double counts_variance(const std::vector<std::int64_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("counts_variance needs C >= 1");
    const double C = static_cast<double>(counts.size());
    const double mean =
        static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0})) / C;
    double acc = 0.0;
    for (std::int64_t v : counts) {
        const double delta = static_cast<double>(v) - mean;
        acc += delta * delta;
    }
    return acc / C;
}

namespace {

/// Exact comparison of count-vector variances: C*sum(x^2) - sum(x)^2 keeps
/// everything integral, so greedy ties are decided without rounding.
__int128 variance_numerator(const std::vector<std::int64_t>& counts) {
    __int128 sum = 0;
    __int128 sum_sq = 0;
    for (std::int64_t v : counts) {
        sum += v;
        sum_sq += static_cast<__int128>(v) * v;
    }
    return static_cast<__int128>(counts.size()) * sum_sq - sum * sum;
}

} // namespace

std::vector<int> select_clients(const std::vector<ClientSummary>& summaries, std::int64_t budget) {
    if (summaries.empty()) throw std::invalid_argument("select_clients needs at least one client");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    const std::size_t C =
        summaries.front().class_counts.size(); // all summaries share the class dictionary
    for (const ClientSummary& s : summaries)
        if (s.class_counts.size() != C)
            throw std::invalid_argument("client summaries disagree on class count");

    std::vector<bool> taken(summaries.size(), false);
    std::vector<std::int64_t> cumulative(C, 0);
    std::int64_t spent = 0;
    std::vector<int> picked;

    while (picked.size() < summaries.size()) {
        int best = -1;
        __int128 best_var = 0;
        for (std::size_t i = 0; i < summaries.size(); ++i) {
            if (taken[i]) continue;
            const ClientSummary& s = summaries[i];
            if (spent + s.total > budget) continue;
            std::vector<std::int64_t> merged = cumulative;
            for (std::size_t c = 0; c < C; ++c) merged[c] += s.class_counts[c];
            const __int128 var = variance_numerator(merged);
            if (best < 0 || var < best_var ||
                (var == best_var && s.client_id < summaries[static_cast<std::size_t>(best)].client_id)) {
                best = static_cast<int>(i);
                best_var = var;
            }
        }
        if (best < 0) {
            if (picked.empty()) throw NoFeasibleClient(budget);
            break;
        }
        const ClientSummary& s = summaries[static_cast<std::size_t>(best)];
        taken[static_cast<std::size_t>(best)] = true;
        for (std::size_t c = 0; c < C; ++c) cumulative[c] += s.class_counts[c];
        spent += s.total;
        picked.push_back(s.client_id);
    }
    return picked;
}

std::vector<EncoderRecord> select_encoders(const std::vector<EncoderRecord>& records,
                                           const std::set<int>& all_classes,
                                           const std::vector<int>& must_include) {
    std::set<int> uncovered = all_classes;
    for (const EncoderRecord& r : records)
        for (int c : r.covered_classes) uncovered.erase(c);
    if (!uncovered.empty()) throw UncoverableClasses(uncovered);

    std::vector<bool> taken(records.size(), false);
    std::vector<std::size_t> chosen;
    uncovered = all_classes;

    while (!uncovered.empty()) {
        int best = -1;
        std::size_t best_gain = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (taken[i]) continue;
            const EncoderRecord& r = records[i];
            std::size_t gain = 0;
            for (int c : r.covered_classes) gain += uncovered.count(c);
            if (gain == 0) continue;
            if (best < 0) {
                best = static_cast<int>(i);
                best_gain = gain;
                continue;
            }
            const EncoderRecord& b = records[static_cast<std::size_t>(best)];
            if (gain > best_gain ||
                (gain == best_gain && (r.covered_classes.size() > b.covered_classes.size() ||
                                       (r.covered_classes.size() == b.covered_classes.size() &&
                                        r.client_id < b.client_id)))) {
                best = static_cast<int>(i);
                best_gain = gain;
            }
        }
        // the union check above guarantees progress
        const EncoderRecord& r = records[static_cast<std::size_t>(best)];
        taken[static_cast<std::size_t>(best)] = true;
        chosen.push_back(static_cast<std::size_t>(best));
        for (int c : r.covered_classes) uncovered.erase(c);
    }

    // zero-day hook: force-included encoders join before pruning and are
    // never pruned themselves
    std::set<std::size_t> forced;
    for (int id : must_include) {
        bool found = false;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].client_id != id) continue;
            found = true;
            if (!taken[i]) {
                taken[i] = true;
                chosen.push_back(i);
            }
            forced.insert(i);
            break;
        }
        if (!found) throw UnknownClient(id);
    }

    // drop any member whose removal keeps the cover intact (scan in selection
    // order) so no redundant encoder survives
    std::vector<bool> kept(chosen.size(), true);
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        if (forced.count(chosen[k])) continue;
        std::set<int> covered;
        for (std::size_t j = 0; j < chosen.size(); ++j) {
            if (j == k || !kept[j]) continue;
            for (int c : records[chosen[j]].covered_classes) covered.insert(c);
        }
        bool full = true;
        for (int c : all_classes)
            if (!covered.count(c)) {
                full = false;
                break;
            }
        if (full) kept[k] = false;
    }

    std::vector<EncoderRecord> out;
    for (std::size_t k = 0; k < chosen.size(); ++k)
        if (kept[k]) out.push_back(records[chosen[k]]);
    return out;
}

} // namespace fedgbdt
