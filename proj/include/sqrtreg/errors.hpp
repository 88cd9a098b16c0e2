#pragma once

#include <stdexcept>
#include <string>

namespace sqrtreg {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

struct ZeroColumn : Error {
    int column;
    explicit ZeroColumn(int j)
        : Error("column " + std::to_string(j) + " of X is identically zero"), column(j) {}
};

struct ParseError : Error {
    long line;
    ParseError(long line_no, const std::string& msg)
        : Error("parse error at line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct EmptyDataset : Error {
    EmptyDataset() : Error("dataset is empty") {}
};

struct InvalidRegime : Error {
    explicit InvalidRegime(const std::string& msg) : Error("invalid regime: " + msg) {}
};

struct Unsupported : Error {
    explicit Unsupported(const std::string& msg) : Error("unsupported: " + msg) {}
};

struct FactorizationFailure : Error {
    explicit FactorizationFailure(const std::string& msg)
        : Error("factorization failure: " + msg) {}
};

struct IndefiniteOperator : Error {
    explicit IndefiniteOperator(const std::string& msg)
        : Error("indefinite operator: " + msg) {}
};

} // namespace sqrtreg
