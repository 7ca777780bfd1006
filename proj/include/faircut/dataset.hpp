#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faircut {

enum class ColumnType : std::uint8_t { numeric, categorical };

/// Numeric, or categorical with an ordered list of distinct category names.
struct ColumnKind {
    ColumnType type = ColumnType::numeric;
    std::vector<std::string> categories;

    static ColumnKind numeric() { return {}; }
    static ColumnKind categorical(std::vector<std::string> names);

    bool is_numeric() const noexcept { return type == ColumnType::numeric; }
    bool is_categorical() const noexcept { return type == ColumnType::categorical; }
    std::size_t n_categories() const noexcept { return categories.size(); }

    /// Index of `name` in the category list, if present.
    std::optional<std::int32_t> code_of(std::string_view name) const;

    bool operator==(const ColumnKind&) const = default;
};

struct ColumnInfo {
    std::string name;
    ColumnKind kind;

    bool operator==(const ColumnInfo&) const = default;
};

/// Column-typed table with an explicit missingness mask.
///
/// Storage is column-major. A cell starts out missing and becomes observed
/// once a value is assigned to it. Category codes index into the column's
/// category list.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<ColumnInfo> columns, std::size_t n_rows);

    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return columns_.size(); }
    std::size_t n_numeric() const noexcept { return numeric_.size(); }
    std::size_t n_categorical() const noexcept { return codes_.size(); }

    const std::vector<ColumnInfo>& columns() const noexcept { return columns_; }
    const ColumnInfo& column(std::size_t col) const { return columns_.at(col); }
    std::optional<std::size_t> find_column(std::string_view name) const;

    bool is_missing(std::size_t row, std::size_t col) const { return missing_[col][row] != 0; }
    double numeric(std::size_t row, std::size_t col) const { return numeric_[slot_[col]][row]; }
    std::int32_t code(std::size_t row, std::size_t col) const { return codes_[slot_[col]][row]; }

    void set_numeric(std::size_t row, std::size_t col, double value);
    void set_code(std::size_t row, std::size_t col, std::int32_t code);
    void set_missing(std::size_t row, std::size_t col);

    /// Raw column storage. Entries under a missing cell are unspecified.
    std::span<const double> numeric_column(std::size_t col) const;
    std::span<const std::int32_t> code_column(std::size_t col) const;
    std::span<const std::uint8_t> missing_column(std::size_t col) const { return missing_[col]; }

    std::size_t count_missing() const;

    /// Throws InvalidArgument if any invariant is broken.
    void validate() const;

    /// Copy of the listed rows, in the given order.
    Dataset select_rows(std::span<const std::size_t> rows) const;

    /// Equality up to `tol` on numeric values; masks and codes compared exactly.
    bool approx_equal(const Dataset& other, double tol) const;

private:
    std::vector<ColumnInfo> columns_;
    std::size_t n_rows_ = 0;
    std::vector<std::size_t> slot_;  // index into numeric_ or codes_
    std::vector<std::vector<double>> numeric_;
    std::vector<std::vector<std::int32_t>> codes_;
    std::vector<std::vector<std::uint8_t>> missing_;
};

struct NumericStats {
    double mean = 0.0;
    double std = 0.0;  // population form
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;

    bool operator==(const NumericStats&) const = default;
};

struct CategoricalStats {
    std::int32_t mode = 0;
    std::vector<double> proportions;

    bool operator==(const CategoricalStats&) const = default;
};

/// Training statistics for one column, over observed entries only.
/// `numeric` is set for numeric columns, `categorical` otherwise; neither
/// carries meaningful values when `n_known == 0` (see `empty()`).
struct ColumnStats {
    std::size_t n_known = 0;
    NumericStats numeric;
    CategoricalStats categorical;

    bool empty() const noexcept { return n_known == 0; }
    bool operator==(const ColumnStats&) const = default;
};

std::vector<ColumnStats> compute_stats(const Dataset& data);

/// Median of a non-empty sample; the midpoint of the two central order
/// statistics for even sizes. Reorders `values`.
double median_inplace(std::span<double> values);

}  // namespace faircut
