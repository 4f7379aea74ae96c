#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fedgbdt/dataset.hpp"
#include "fedgbdt/errors.hpp"
#include "test_util.hpp"

using namespace fedgbdt;
using namespace fedgbdt::testing;

TEST_CASE("csv labels map to dense ids in first-appearance order") {
    TempDir tmp;
    write_file(tmp.file("a.csv"), "f0,f1,label\n1,2,benign\n3,4,dos\n5,6,benign\n");
    const Dataset d = load_csv(tmp.file("a.csv"), "label");
    CHECK(d.n_classes() == 2);
    CHECK(d.class_names == std::vector<std::string>{"benign", "dos"});
    CHECK(d.labels == std::vector<int>{0, 1, 0});
    CHECK(d.features(1, 0) == 3.0);
}

TEST_CASE("empty and NaN cells become missing") {
    TempDir tmp;
    write_file(tmp.file("a.csv"), "f0,f1,f2,label\n1,2,3,x\n4,5,,x\n7,NaN,nan,y\n");
    const Dataset d = load_csv(tmp.file("a.csv"), "label");
    CHECK_FALSE(d.missing(0, 2));
    CHECK(d.missing(1, 2));
    CHECK(d.missing(2, 1));
    CHECK(d.missing(2, 2));
    // the value behind a missing cell is canonicalised
    CHECK(d.features(1, 2) == 0.0);
}

TEST_CASE("non-numeric and infinite tokens are ingestion errors") {
    TempDir tmp;
    write_file(tmp.file("inf.csv"), "f0,label\n1,x\nInfinity,y\n");
    CHECK_THROWS_AS(load_csv(tmp.file("inf.csv"), "label"), NonNumericFeature);
    write_file(tmp.file("inf2.csv"), "f0,label\nInf,x\n");
    CHECK_THROWS_AS(load_csv(tmp.file("inf2.csv"), "label"), NonNumericFeature);
    write_file(tmp.file("inf3.csv"), "f0,label\n-Inf,x\n");
    CHECK_THROWS_AS(load_csv(tmp.file("inf3.csv"), "label"), NonNumericFeature);
    write_file(tmp.file("junk.csv"), "f0,label\n12abc,x\n");
    CHECK_THROWS_AS(load_csv(tmp.file("junk.csv"), "label"), NonNumericFeature);
}

TEST_CASE("missing label column is reported by name") {
    TempDir tmp;
    write_file(tmp.file("a.csv"), "f0,f1\n1,2\n");
    CHECK_THROWS_AS(load_csv(tmp.file("a.csv"), "label"), MissingLabelColumn);
}

TEST_CASE("a pinned class dictionary rejects unknown labels and fixes ids") {
    TempDir tmp;
    write_file(tmp.file("a.csv"), "f0,label\n1,dos\n2,benign\n");
    const Dataset d = load_csv(tmp.file("a.csv"), "label", {"benign", "dos"});
    CHECK(d.labels == std::vector<int>{1, 0});
    write_file(tmp.file("b.csv"), "f0,label\n1,worm\n");
    CHECK_THROWS_AS(load_csv(tmp.file("b.csv"), "label", {"benign", "dos"}), UnknownClassLabel);
}

TEST_CASE("write then load round-trips a dataset bit-exactly") {
    Rng rng(42);
    Dataset d = random_dataset(rng, 40, 5, 3, 0.15);
    // exercise values that stress shortest round-trip formatting
    d.features(0, 0) = 0.1;
    d.features(1, 1) = -1.0 / 3.0;
    d.features(2, 2) = 1e-17;
    d.features(3, 3) = 12345678.9012345;
    d.missing(0, 0) = d.missing(1, 1) = d.missing(2, 2) = d.missing(3, 3) = false;
    TempDir tmp;
    write_csv(d, tmp.file("rt.csv"));
    const Dataset back = load_csv(tmp.file("rt.csv"), "label", d.class_names);
    CHECK(back == d);
}

TEST_CASE("homogeneous partition splits balanced classes evenly") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i < 50 ? 0 : 1);
    }
    const Dataset d = make_dataset(rows, labels);
    const auto parts = partition_clients(d, 2, PartitionMode::Homogeneous, 7);
    REQUIRE(parts.size() == 2);
    for (const auto& p : parts) {
        CHECK(p.class_counts == std::vector<std::int64_t>{25, 25});
    }
}

TEST_CASE("single-client partition is the identity") {
    Rng rng(3);
    const Dataset d = random_dataset(rng, 30, 3, 2);
    const auto parts = partition_clients(d, 1, PartitionMode::Homogeneous, 0);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].data == d);
}

TEST_CASE("partitions are disjoint and cover every sample") {
    Rng rng(11);
    const Dataset d = random_dataset(rng, 157, 4, 3);
    for (const auto mode : {PartitionMode::Homogeneous, PartitionMode::Heterogeneous}) {
        for (std::uint64_t seed : {0ull, 9ull}) {
            const auto parts = partition_clients(d, 4, mode, seed, 0);
            std::set<int> seen;
            std::int64_t total = 0;
            for (const auto& p : parts) {
                total += p.data.n_samples();
                for (int r : p.source_rows) {
                    CHECK(seen.insert(r).second); // no row assigned twice
                }
                // histograms recomputed from labels must match the stored counts
                CHECK(p.class_counts == p.data.class_counts());
            }
            CHECK(total == d.n_samples());
            CHECK(static_cast<Eigen::Index>(seen.size()) == d.n_samples());
        }
    }
}

TEST_CASE("homogeneous per-client class counts stay within one of proportional") {
    Rng rng(5);
    const Dataset d = random_dataset(rng, 103, 3, 4);
    const auto parts = partition_clients(d, 3, PartitionMode::Homogeneous, 1);
    const auto global = d.class_counts();
    for (const auto& p : parts) {
        for (int c = 0; c < d.n_classes(); ++c) {
            const double share = static_cast<double>(global[static_cast<std::size_t>(c)]) / 3.0;
            const double got = static_cast<double>(p.class_counts[static_cast<std::size_t>(c)]);
            CHECK(std::abs(got - share) <= 1.0);
        }
    }
}

TEST_CASE("heterogeneous clients get benign plus at most two attack classes") {
    Rng rng(8);
    Dataset d = random_dataset(rng, 200, 3, 5);
    d.class_names[0] = "benign";
    const auto parts = partition_clients(d, 2, PartitionMode::Heterogeneous, 0, 0);
    std::set<int> attacks_seen;
    for (const auto& p : parts) {
        CHECK(p.class_counts[0] > 0); // every client holds benign traffic
        std::set<int> attacks;
        for (int c = 1; c < d.n_classes(); ++c)
            if (p.class_counts[static_cast<std::size_t>(c)] > 0) attacks.insert(c);
        CHECK(attacks.size() <= 2);
        attacks_seen.insert(attacks.begin(), attacks.end());
    }
    CHECK(attacks_seen == std::set<int>{1, 2, 3, 4});
}

TEST_CASE("partition failure modes") {
    Rng rng(2);
    const Dataset d = random_dataset(rng, 5, 2, 2);
    CHECK_THROWS_AS(partition_clients(d, 6, PartitionMode::Homogeneous, 0), TooManyClients);
    CHECK_THROWS_AS(partition_clients(d, 2, PartitionMode::Heterogeneous, 0, -1), NoBenignClass);
}

TEST_CASE("benign class resolution by id and by name") {
    Rng rng(2);
    Dataset d = random_dataset(rng, 10, 2, 3);
    d.class_names = {"alpha", "Benign", "gamma"};
    CHECK(find_benign_class(d, 2) == 2);
    CHECK(find_benign_class(d, -1) == 1); // case-insensitive name fallback
    d.class_names = {"alpha", "beta", "gamma"};
    CHECK_THROWS_AS(find_benign_class(d, -1), NoBenignClass);
}

TEST_CASE("log mode maps a column through log(x - min + 1)") {
    Dataset d = make_dataset({{0.0}, {std::exp(1.0) - 1.0}}, {0, 0});
    preprocess(d, PreprocessMode::Log);
    CHECK(d.features(0, 0) == doctest::Approx(0.0));
    CHECK(d.features(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize mode z-scores with the population stddev") {
    Dataset d = make_dataset({{2.0}, {4.0}}, {0, 0});
    preprocess(d, PreprocessMode::Standardize);
    CHECK(d.features(0, 0) == doctest::Approx(-1.0));
    CHECK(d.features(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize leaves binary columns untouched") {
    Dataset d = make_dataset({{0.0, 10.0}, {1.0, 20.0}, {0.0, 30.0}, {1.0, 40.0}}, {0, 0, 0, 0});
    const ColumnStats stats = preprocess(d, PreprocessMode::Standardize);
    CHECK(stats.is_binary[0]);
    CHECK(d.features(0, 0) == 0.0);
    CHECK(d.features(1, 0) == 1.0);
    CHECK(d.features(0, 1) != 10.0); // the non-binary column did move
}

TEST_CASE("zero-spread columns are centered and recorded, not fatal") {
    Dataset d = make_dataset({{5.0, 1.0}, {5.0, 2.0}}, {0, 0});
    const ColumnStats stats = preprocess(d, PreprocessMode::Standardize);
    CHECK(stats.zero_std_columns == std::vector<int>{0});
    CHECK(d.features(0, 0) == 0.0);
    CHECK(d.features(1, 0) == 0.0);
}

TEST_CASE("missing cells pass through preprocessing unchanged") {
    Dataset d = make_dataset({{1.0, kMissing}, {3.0, 7.0}}, {0, 0});
    preprocess(d);
    CHECK(d.missing(0, 1));
    CHECK(d.features(0, 1) == 0.0);
}

TEST_CASE("replaying fitted stats on the training set reproduces the fit output") {
    for (const auto mode :
         {PreprocessMode::Log, PreprocessMode::Standardize, PreprocessMode::LogStandardize}) {
        Rng rng(21);
        Dataset original = random_dataset(rng, 60, 4, 2, 0.1);
        original.features.col(2).setConstant(0.5); // a zero-spread column
        Dataset fitted = original;
        const ColumnStats stats = preprocess(fitted, mode);
        Dataset replayed = original;
        apply_preprocess(replayed, stats);
        CHECK(replayed == fitted);
    }
}

TEST_CASE("train-test split is deterministic, disjoint and floor-sized") {
    Rng rng(9);
    const Dataset d = random_dataset(rng, 101, 3, 3);
    const auto [train, test] = split_train_test(d, 0.3, 4);
    CHECK(test.n_samples() == 30); // floor(0.3 * 101)
    CHECK(train.n_samples() == 71);
    const auto [train2, test2] = split_train_test(d, 0.3, 4);
    CHECK(train2 == train);
    CHECK(test2 == test);
    const auto [train3, test3] = split_train_test(d, 0.3, 5);
    CHECK_FALSE(test3 == test); // a different seed reshuffles
}
