#include "faircut/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "faircut/errors.hpp"

namespace faircut {

ColumnKind ColumnKind::categorical(std::vector<std::string> names) {
    ColumnKind kind;
    kind.type = ColumnType::categorical;
    kind.categories = std::move(names);
    return kind;
}

std::optional<std::int32_t> ColumnKind::code_of(std::string_view name) const {
    auto it = std::find(categories.begin(), categories.end(), name);
    if (it == categories.end())
        return std::nullopt;
    return static_cast<std::int32_t>(it - categories.begin());
}

Dataset::Dataset(std::vector<ColumnInfo> columns, std::size_t n_rows)
    : columns_(std::move(columns)), n_rows_(n_rows) {
    std::set<std::string_view> seen;
    for (const auto& col : columns_) {
        if (!seen.insert(col.name).second)
            throw SchemaError("duplicate column name '" + col.name + "'");
        if (col.kind.is_categorical()) {
            std::set<std::string_view> cats;
            for (const auto& c : col.kind.categories)
                if (!cats.insert(c).second)
                    throw SchemaError("duplicate category '" + c + "' in column '" + col.name + "'");
            slot_.push_back(codes_.size());
            codes_.emplace_back(n_rows, 0);
        } else {
            slot_.push_back(numeric_.size());
            numeric_.emplace_back(n_rows, 0.0);
        }
        missing_.emplace_back(n_rows, std::uint8_t{1});
    }
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].name == name)
            return j;
    return std::nullopt;
}

void Dataset::set_numeric(std::size_t row, std::size_t col, double value) {
    if (!columns_.at(col).kind.is_numeric())
        throw InvalidArgument("column '" + columns_[col].name + "' is not numeric");
    if (!std::isfinite(value))
        throw InvalidArgument("non-finite value in column '" + columns_[col].name + "'");
    numeric_[slot_[col]].at(row) = value;
    missing_[col][row] = 0;
}

void Dataset::set_code(std::size_t row, std::size_t col, std::int32_t code) {
    const auto& kind = columns_.at(col).kind;
    if (!kind.is_categorical())
        throw InvalidArgument("column '" + columns_[col].name + "' is not categorical");
    if (code < 0 || static_cast<std::size_t>(code) >= kind.n_categories())
        throw InvalidArgument("category code out of range in column '" + columns_[col].name + "'");
    codes_[slot_[col]].at(row) = code;
    missing_[col][row] = 0;
}

void Dataset::set_missing(std::size_t row, std::size_t col) {
    missing_.at(col).at(row) = 1;
}

std::span<const double> Dataset::numeric_column(std::size_t col) const {
    if (!columns_.at(col).kind.is_numeric())
        throw InvalidArgument("column '" + columns_[col].name + "' is not numeric");
    return numeric_[slot_[col]];
}

std::span<const std::int32_t> Dataset::code_column(std::size_t col) const {
    if (!columns_.at(col).kind.is_categorical())
        throw InvalidArgument("column '" + columns_[col].name + "' is not categorical");
    return codes_[slot_[col]];
}

std::size_t Dataset::count_missing() const {
    std::size_t total = 0;
    for (const auto& m : missing_)
        total += static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    return total;
}

void Dataset::validate() const {
    for (std::size_t j = 0; j < n_cols(); ++j) {
        const auto& info = columns_[j];
        if (missing_[j].size() != n_rows_)
            throw InvalidArgument("mask size mismatch in column '" + info.name + "'");
        for (std::size_t i = 0; i < n_rows_; ++i) {
            if (is_missing(i, j))
                continue;
            if (info.kind.is_numeric()) {
                if (!std::isfinite(numeric(i, j)))
                    throw InvalidArgument("non-finite value in column '" + info.name + "'");
            } else {
                auto c = code(i, j);
                if (c < 0 || static_cast<std::size_t>(c) >= info.kind.n_categories())
                    throw InvalidArgument("invalid category code in column '" + info.name + "'");
            }
        }
    }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Dataset out(columns_, rows.size());
    for (std::size_t j = 0; j < n_cols(); ++j) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            std::size_t i = rows[k];
            out.missing_[j][k] = missing_[j].at(i);
            if (columns_[j].kind.is_numeric())
                out.numeric_[out.slot_[j]][k] = numeric_[slot_[j]][i];
            else
                out.codes_[out.slot_[j]][k] = codes_[slot_[j]][i];
        }
    }
    return out;
}

bool Dataset::approx_equal(const Dataset& other, double tol) const {
    if (columns_ != other.columns_ || n_rows_ != other.n_rows_)
        return false;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        for (std::size_t i = 0; i < n_rows_; ++i) {
            if (is_missing(i, j) != other.is_missing(i, j))
                return false;
            if (is_missing(i, j))
                continue;
            if (columns_[j].kind.is_numeric()) {
                if (std::abs(numeric(i, j) - other.numeric(i, j)) > tol)
                    return false;
            } else if (code(i, j) != other.code(i, j)) {
                return false;
            }
        }
    }
    return true;
}

double median_inplace(std::span<double> values) {
    if (values.empty())
        throw InvalidArgument("median of an empty sample");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double upper = values[mid];
    if (n % 2 == 1)
        return upper;
    double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

std::vector<ColumnStats> compute_stats(const Dataset& data) {
    std::vector<ColumnStats> out(data.n_cols());
    std::vector<double> buffer;
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        auto& st = out[j];
        auto missing = data.missing_column(j);
        const auto& kind = data.column(j).kind;
        if (kind.is_numeric()) {
            auto values = data.numeric_column(j);
            buffer.clear();
            for (std::size_t i = 0; i < data.n_rows(); ++i)
                if (!missing[i])
                    buffer.push_back(values[i]);
            st.n_known = buffer.size();
            if (buffer.empty())
                continue;
            double sum = 0.0;
            for (double v : buffer)
                sum += v;
            double mean = sum / static_cast<double>(buffer.size());
            double ss = 0.0;
            for (double v : buffer)
                ss += (v - mean) * (v - mean);
            st.numeric.mean = mean;
            st.numeric.std = std::sqrt(ss / static_cast<double>(buffer.size()));
            auto [lo, hi] = std::minmax_element(buffer.begin(), buffer.end());
            st.numeric.min = *lo;
            st.numeric.max = *hi;
            st.numeric.median = median_inplace(buffer);
        } else {
            auto codes = data.code_column(j);
            std::vector<std::size_t> counts(kind.n_categories(), 0);
            for (std::size_t i = 0; i < data.n_rows(); ++i)
                if (!missing[i])
                    ++counts[static_cast<std::size_t>(codes[i])];
            for (auto c : counts)
                st.n_known += c;
            st.categorical.proportions.assign(kind.n_categories(), 0.0);
            if (st.n_known == 0)
                continue;
            for (std::size_t c = 0; c < counts.size(); ++c)
                st.categorical.proportions[c] =
                    static_cast<double>(counts[c]) / static_cast<double>(st.n_known);
            st.categorical.mode = static_cast<std::int32_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
    }
    return out;
}

}  // namespace faircut
