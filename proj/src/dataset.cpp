#include "fedgbdt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fedgbdt/errors.hpp"
#include "fedgbdt/rng.hpp"

namespace fedgbdt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool equal_bits(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (a.size() == 0) return true;
    return std::memcmp(a.data(), b.data(), sizeof(Scalar) * static_cast<std::size_t>(a.size())) == 0;
}

std::string format_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

std::vector<std::int64_t> Dataset::class_counts() const {
    std::vector<std::int64_t> counts(class_names.size(), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)]++;
    return counts;
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
    Dataset out;
    out.class_names = class_names;
    const Eigen::Index m = n_features();
    out.features.resize(static_cast<Eigen::Index>(rows.size()), m);
    out.missing.resize(static_cast<Eigen::Index>(rows.size()), m);
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::Index r = rows[i];
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
        out.missing.row(static_cast<Eigen::Index>(i)) = missing.row(r);
        out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
    return equal_bits(a.features, b.features) &&
           (a.missing.rows() == b.missing.rows() && a.missing.cols() == b.missing.cols() &&
            (a.missing.size() == 0 || (a.missing == b.missing).all())) &&
           a.labels == b.labels && a.class_names == b.class_names;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& class_names) {
    std::ifstream in(path);
    if (!in) throw CsvFormatError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw CsvFormatError("'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header_raw = split_line(line);
    std::vector<std::string> header;
    header.reserve(header_raw.size());
    for (const auto& h : header_raw) header.push_back(trim(h));

    int label_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) {
            label_col = static_cast<int>(j);
            break;
        }
    }
    if (label_col < 0) throw MissingLabelColumn(label_column);

    const std::size_t n_cols = header.size();
    const Eigen::Index m = static_cast<Eigen::Index>(n_cols - 1);

    Dataset d;
    d.class_names = class_names;
    const bool pinned = !class_names.empty();

    std::vector<double> values;
    std::vector<bool> missing_flags;
    long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break; // trailing newline
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != n_cols)
            throw CsvFormatError("row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(n_cols));
        long feat = 0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            const std::string tok = trim(cells[j]);
            if (static_cast<int>(j) == label_col) {
                int id = -1;
                for (std::size_t k = 0; k < d.class_names.size(); ++k) {
                    if (d.class_names[k] == tok) {
                        id = static_cast<int>(k);
                        break;
                    }
                }
                if (id < 0) {
                    if (pinned) throw UnknownClassLabel(tok);
                    id = static_cast<int>(d.class_names.size());
                    d.class_names.push_back(tok);
                }
                d.labels.push_back(id);
            } else {
                if (tok.empty() || tok == "NaN" || tok == "nan") {
                    values.push_back(0.0);
                    missing_flags.push_back(true);
                } else {
                    double v = 0.0;
                    if (!parse_double(tok, v) || !std::isfinite(v))
                        throw NonNumericFeature(row, feat, tok);
                    values.push_back(v);
                    missing_flags.push_back(false);
                }
                ++feat;
            }
        }
        ++row;
    }

    const Eigen::Index n = row;
    d.features.resize(n, m);
    d.missing.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(i * m + j);
            d.features(i, j) = values[k];
            d.missing(i, j) = missing_flags[k];
        }
    }
    return d;
}

void write_csv(const Dataset& d, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw CsvFormatError("cannot write '" + path + "'");
    const Eigen::Index m = d.n_features();
    for (Eigen::Index j = 0; j < m; ++j) out << 'f' << j << ',';
    out << label_column << '\n';
    for (Eigen::Index i = 0; i < d.n_samples(); ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (!d.missing(i, j)) out << format_value(d.features(i, j));
            out << ',';
        }
        out << d.class_names[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])] << '\n';
    }
}

namespace {

std::vector<ClientPartition> build_partitions(const Dataset& d, int n_clients,
                                              std::vector<std::vector<int>>& per_client_rows) {
    std::vector<ClientPartition> out;
    out.reserve(static_cast<std::size_t>(n_clients));
    for (int c = 0; c < n_clients; ++c) {
        auto& rows = per_client_rows[static_cast<std::size_t>(c)];
        if (rows.empty()) throw TooManyClients(n_clients);
        std::sort(rows.begin(), rows.end());
        ClientPartition p;
        p.client_id = c;
        p.data = d.select_rows(rows);
        p.class_counts = p.data.class_counts();
        p.source_rows = rows;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

int find_benign_class(const Dataset& d, int benign_class) {
    if (benign_class >= 0) {
        if (benign_class >= d.n_classes()) throw NoBenignClass();
        return benign_class;
    }
    for (std::size_t k = 0; k < d.class_names.size(); ++k)
        if (d.class_names[k] == "benign") return static_cast<int>(k);
    for (std::size_t k = 0; k < d.class_names.size(); ++k) {
        std::string low = d.class_names[k];
        std::transform(low.begin(), low.end(), low.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (low == "benign") return static_cast<int>(k);
    }
    throw NoBenignClass();
}

std::vector<ClientPartition> partition_clients(const Dataset& d, int n_clients,
                                               PartitionMode mode, std::uint64_t seed,
                                               int benign_class) {
    if (n_clients < 1) throw TooManyClients(n_clients);
    const int C = d.n_classes();
    std::vector<std::vector<int>> class_rows(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < d.labels.size(); ++i)
        class_rows[static_cast<std::size_t>(d.labels[i])].push_back(static_cast<int>(i));

    std::vector<std::vector<int>> per_client(static_cast<std::size_t>(n_clients));

    if (mode == PartitionMode::Homogeneous) {
        for (int c = 0; c < C; ++c) {
            auto rows = class_rows[static_cast<std::size_t>(c)];
            Rng rng(derive_seed(seed, "partition_class", static_cast<std::uint64_t>(c)));
            rng.shuffle(rows);
            for (std::size_t t = 0; t < rows.size(); ++t)
                per_client[t % static_cast<std::size_t>(n_clients)].push_back(rows[t]);
        }
        return build_partitions(d, n_clients, per_client);
    }

    // Heterogeneous: benign rows spread over everyone, each attack class dealt
    // to a rotating subset of clients so nobody sees more than two attack
    // classes (whenever the client count allows it).
    const int benign = find_benign_class(d, benign_class);
    if (C < 2) throw NoBenignClass();

    std::vector<int> attacks;
    for (int c = 0; c < C; ++c)
        if (c != benign) attacks.push_back(c);

    {
        auto rows = class_rows[static_cast<std::size_t>(benign)];
        Rng rng(derive_seed(seed, "partition_benign", 0));
        rng.shuffle(rows);
        for (std::size_t t = 0; t < rows.size(); ++t)
            per_client[t % static_cast<std::size_t>(n_clients)].push_back(rows[t]);
    }

    const std::size_t A = attacks.size();
    std::vector<std::vector<int>> clients_of_attack(A);
    const std::size_t L = std::max(A, static_cast<std::size_t>(n_clients));
    for (std::size_t t = 0; t < L; ++t)
        clients_of_attack[t % A].push_back(static_cast<int>(t % static_cast<std::size_t>(n_clients)));

    for (std::size_t a = 0; a < A; ++a) {
        auto rows = class_rows[static_cast<std::size_t>(attacks[a])];
        Rng rng(derive_seed(seed, "partition_class", static_cast<std::uint64_t>(attacks[a])));
        rng.shuffle(rows);
        const auto& targets = clients_of_attack[a];
        for (std::size_t t = 0; t < rows.size(); ++t)
            per_client[static_cast<std::size_t>(targets[t % targets.size()])].push_back(rows[t]);
    }
    return build_partitions(d, n_clients, per_client);
}

ColumnStats preprocess(Dataset& d, PreprocessMode mode) {
    const Eigen::Index n = d.n_samples();
    const Eigen::Index m = d.n_features();
    const bool do_log = mode != PreprocessMode::Standardize;
    const bool do_zscore = mode != PreprocessMode::Log;
    ColumnStats stats;
    stats.mode = mode;
    stats.col_min.resize(m);
    stats.mean.resize(m);
    stats.stddev.resize(m);
    stats.is_binary.assign(static_cast<std::size_t>(m), false);

    for (Eigen::Index j = 0; j < m; ++j) {
        bool binary = true;
        bool any = false;
        double mn = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d.missing(i, j)) continue;
            const double v = d.features(i, j);
            if (v != 0.0 && v != 1.0) binary = false;
            if (!any || v < mn) mn = v;
            any = true;
        }
        if (!any) binary = false; // all-missing column: nothing to transform
        stats.is_binary[static_cast<std::size_t>(j)] = binary;
        stats.col_min(j) = any ? mn : 0.0;
        stats.mean(j) = 0.0;
        stats.stddev(j) = 1.0;
        // the z-score step skips binary columns; the pure log pass does not
        if (binary && do_zscore) continue;

        if (do_log) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (d.missing(i, j)) continue;
                d.features(i, j) = std::log(d.features(i, j) - mn + 1.0);
            }
        }
        if (!do_zscore) continue;

        double sum = 0.0;
        std::int64_t cnt = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d.missing(i, j)) continue;
            sum += d.features(i, j);
            ++cnt;
        }
        const double mean = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
        double var = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d.missing(i, j)) continue;
            const double delta = d.features(i, j) - mean;
            var += delta * delta;
        }
        const double sd = cnt > 0 ? std::sqrt(var / static_cast<double>(cnt)) : 0.0;
        stats.mean(j) = mean;
        stats.stddev(j) = sd;
        if (sd == 0.0) {
            stats.zero_std_columns.push_back(static_cast<int>(j));
            for (Eigen::Index i = 0; i < n; ++i)
                if (!d.missing(i, j)) d.features(i, j) -= mean;
        } else {
            for (Eigen::Index i = 0; i < n; ++i)
                if (!d.missing(i, j)) d.features(i, j) = (d.features(i, j) - mean) / sd;
        }
    }
    return stats;
}

void apply_preprocess(Dataset& d, const ColumnStats& stats) {
    const Eigen::Index n = d.n_samples();
    const Eigen::Index m = d.n_features();
    if (m != stats.mean.size()) throw DimensionMismatch(stats.mean.size(), m);
    const bool do_log = stats.mode != PreprocessMode::Standardize;
    const bool do_zscore = stats.mode != PreprocessMode::Log;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (stats.is_binary[static_cast<std::size_t>(j)] && do_zscore) continue;
        const double sd = stats.stddev(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d.missing(i, j)) continue;
            double t = d.features(i, j);
            if (do_log) {
                // clamp below the log domain edge rather than emitting NaN on
                // held-out values under the training minimum
                t = std::log(std::max(t - stats.col_min(j) + 1.0, 1e-12));
            }
            if (do_zscore) t = sd == 0.0 ? t - stats.mean(j) : (t - stats.mean(j)) / sd;
            d.features(i, j) = t;
        }
    }
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
    const int n = static_cast<int>(d.n_samples());
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, "test_split", 0));
    rng.shuffle(idx);
    const int n_test = static_cast<int>(std::floor(test_fraction * n));
    std::vector<int> test_rows(idx.begin(), idx.begin() + n_test);
    std::vector<int> train_rows(idx.begin() + n_test, idx.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {d.select_rows(train_rows), d.select_rows(test_rows)};
}

} // namespace fedgbdt
