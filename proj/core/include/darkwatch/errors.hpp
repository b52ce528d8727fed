#pragma once

#include <stdexcept>
#include <string>

namespace darkwatch {

// Error categories map onto the CLI exit codes: usage 1, data 2, numeric 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingColumn : DataError {
    explicit MissingColumn(const std::string& col)
        : DataError("missing required column: " + col) {}
};

struct MalformedRow : DataError {
    MalformedRow(std::size_t line, const std::string& why)
        : DataError("malformed row at line " + std::to_string(line) + ": " + why) {}
};

struct EmptyInput : DataError {
    EmptyInput() : DataError("input contains no data rows") {}
};

struct EmptyTable : DataError {
    EmptyTable() : DataError("table has no records") {}
};

struct BadRatio : UsageError {
    explicit BadRatio(double r)
        : UsageError("split ratio must be in (0,1), got " + std::to_string(r)) {}
};

struct TooFewRows : DataError {
    explicit TooFewRows(const std::string& why) : DataError(why) {}
};

struct DimensionMismatch : DataError {
    explicit DimensionMismatch(const std::string& why) : DataError(why) {}
};

struct NonBinaryLabel : DataError {
    NonBinaryLabel() : DataError("labels must be 0 or 1") {}
};

struct DivergenceDetected : NumericError {
    DivergenceDetected() : NumericError("training loss became non-finite") {}
};

}  // namespace darkwatch
