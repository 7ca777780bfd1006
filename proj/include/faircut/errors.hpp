#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faircut {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV or model file. `row()` is the 1-based data row for CSV
/// input, or 0 when the error is not tied to a row.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t row = 0)
        : Error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

/// No column in a node has at least two distinct observed values.
class NoEligibleColumns : public Error {
public:
    NoEligibleColumns() : Error("no column has at least 2 distinct values") {}
};

class ZeroVariance : public Error {
public:
    ZeroVariance() : Error("projected values have zero variance") {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ColumnMismatch : public Error {
public:
    ColumnMismatch(const std::string& what, std::string column)
        : Error(what), column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class NothingToMask : public Error {
public:
    NothingToMask() : Error("no observed cells available to mask") {}
};

class SingularDesign : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace faircut
