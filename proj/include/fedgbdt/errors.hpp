#pragma once

#include <set>
#include <stdexcept>
#include <string>

namespace fedgbdt {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- tabular ----

class MissingLabelColumn : public Error {
public:
    explicit MissingLabelColumn(const std::string& column)
        : Error("label column '" + column + "' not found in header"), column(column) {}
    std::string column;
};

class NonNumericFeature : public Error {
public:
    NonNumericFeature(long row, long col, const std::string& token)
        : Error("non-numeric feature token '" + token + "' at row " + std::to_string(row) +
                ", column " + std::to_string(col)),
          row(row), col(col), token(token) {}
    long row;
    long col;
    std::string token;
};

class UnknownClassLabel : public Error {
public:
    explicit UnknownClassLabel(const std::string& token)
        : Error("unknown class label '" + token + "'"), token(token) {}
    std::string token;
};

class CsvFormatError : public Error {
public:
    explicit CsvFormatError(const std::string& msg) : Error(msg) {}
};

class TooManyClients : public Error {
public:
    explicit TooManyClients(int n_clients)
        : Error("cannot split into " + std::to_string(n_clients) +
                " non-empty clients"), n_clients(n_clients) {}
    int n_clients;
};

class NoBenignClass : public Error {
public:
    NoBenignClass() : Error("heterogeneous partition requires a benign class and at least 2 classes") {}
};

// ---- gbdt ----

class EmptyDataset : public Error {
public:
    explicit EmptyDataset(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(long expected, long got)
        : Error("feature dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)),
          expected(expected), got(got) {}
    long expected;
    long got;
};

class EmptyGrid : public Error {
public:
    EmptyGrid() : Error("hyperparameter grid has no candidate points") {}
};

// ---- privacy ----

class SingleClassNoise : public Error {
public:
    SingleClassNoise() : Error("label noise with q > 0 needs at least 2 classes") {}
};

class NonPositiveEpsilon : public Error {
public:
    explicit NonPositiveEpsilon(double epsilon)
        : Error("privacy budget must be positive, got " + std::to_string(epsilon)), epsilon(epsilon) {}
    double epsilon;
};

// ---- selection ----

class NoFeasibleClient : public Error {
public:
    explicit NoFeasibleClient(long long budget)
        : Error("no client fits within training budget " + std::to_string(budget)), budget(budget) {}
    long long budget;
};

class UncoverableClasses : public Error {
public:
    explicit UncoverableClasses(std::set<int> missing)
        : Error(describe(missing)), missing(std::move(missing)) {}
    std::set<int> missing;

private:
    static std::string describe(const std::set<int>& missing) {
        std::string s = "no encoder combination covers classes {";
        bool first = true;
        for (int c : missing) {
            if (!first) s += ", ";
            s += std::to_string(c);
            first = false;
        }
        return s + "}";
    }
};

// ---- federation ----

class FeatureDimMismatch : public Error {
public:
    FeatureDimMismatch(int client_id, long expected, long got)
        : Error("encoder of client " + std::to_string(client_id) + " expects " +
                std::to_string(expected) + " features, dataset has " + std::to_string(got)),
          client_id(client_id) {}
    int client_id;
};

class EmptyEncoding : public Error {
public:
    EmptyEncoding() : Error("no encoding rows were uploaded") {}
};

class UnknownClient : public Error {
public:
    explicit UnknownClient(int client_id)
        : Error("client " + std::to_string(client_id) + " did not participate"), client_id(client_id) {}
    int client_id;
};

class CoverageLostAfterUnlearn : public Error {
public:
    explicit CoverageLostAfterUnlearn(std::set<int> missing)
        : Error(describe(missing)), missing(std::move(missing)) {}
    std::set<int> missing;

private:
    static std::string describe(const std::set<int>& missing) {
        std::string s = "unlearning breaks encoder coverage for classes {";
        bool first = true;
        for (int c : missing) {
            if (!first) s += ", ";
            s += std::to_string(c);
            first = false;
        }
        return s + "}";
    }
};

// ---- metrics ----

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("prediction/truth length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

// ---- cli ----

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace fedgbdt
