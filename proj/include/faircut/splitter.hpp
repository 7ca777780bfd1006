#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "faircut/dataset.hpp"
#include "faircut/random.hpp"

namespace faircut {

inline constexpr std::int32_t kMissingCode = -1;

/// Training data re-encoded for the split kernels: numeric columns hold NaN
/// for missing cells, categorical columns hold `kMissingCode`.
class ColumnMatrix {
public:
    ColumnMatrix() = default;
    explicit ColumnMatrix(const Dataset& data);
    ColumnMatrix(std::size_t n_rows, std::vector<ColumnType> types, std::vector<std::size_t> n_categories,
                 std::vector<std::vector<double>> values, std::vector<std::vector<std::int32_t>> codes);

    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return types_.size(); }
    ColumnType type(std::size_t col) const { return types_[col]; }
    std::size_t n_categories(std::size_t col) const { return n_categories_[col]; }

    double numeric(std::size_t row, std::size_t col) const { return values_[col][row]; }
    std::int32_t code(std::size_t row, std::size_t col) const { return codes_[col][row]; }

private:
    std::size_t n_rows_ = 0;
    std::vector<ColumnType> types_;
    std::vector<std::size_t> n_categories_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<std::int32_t>> codes_;
};

/// One row of a `ColumnMatrix`, readable by `project`.
struct MatrixRow {
    const ColumnMatrix* matrix;
    std::size_t row;

    double numeric(std::size_t col) const { return matrix->numeric(row, col); }
    std::int32_t code(std::size_t col) const { return matrix->code(row, col); }
};

/// Per-column summary of the observed values that reached a node.
struct NodeColumnSummary {
    ColumnType type = ColumnType::numeric;
    std::size_t n_known = 0;
    bool eligible = false;  // at least two distinct observed values
    double mean = 0.0;
    double std = 0.0;
    double median = 0.0;  // numeric, eligible columns only
    std::vector<double> proportions;  // categorical only
};

struct NodeSummary {
    std::size_t n_rows = 0;
    std::vector<NodeColumnSummary> columns;
    std::vector<std::uint32_t> eligible;  // column ids, ascending

    bool any_eligible() const noexcept { return !eligible.empty(); }
};

NodeSummary summarize_node(const ColumnMatrix& data, std::span<const std::size_t> rows);

struct HyperplaneTerm {
    std::uint32_t column = 0;
    ColumnType type = ColumnType::numeric;
    double coefficient = 0.0;  // numeric: standard normal draw / node std
    double center = 0.0;       // numeric: node mean
    double fill = 0.0;         // numeric: node median; categorical: expected coefficient
    std::vector<double> category_coefficients;

    bool operator==(const HyperplaneTerm&) const = default;
};

/// Random linear combination of a subset of columns, with the temporary
/// fills used for missing entries.
struct Hyperplane {
    std::vector<HyperplaneTerm> terms;

    bool operator==(const Hyperplane&) const = default;
};

/// Draws `min(m, #eligible)` distinct eligible columns uniformly and a
/// coefficient for each. Throws NoEligibleColumns if the node has none.
Hyperplane draw_hyperplane(const NodeSummary& node, std::size_t m, RandomStream& rng);

/// Projection of one row onto a list of terms. `Row` provides
/// `numeric(col)` (NaN when missing) and `code(col)` (negative or out of
/// range when missing or unseen).
template <typename Row>
double project_terms(std::span<const HyperplaneTerm> terms, const Row& row) {
    double y = 0.0;
    for (const auto& term : terms) {
        if (term.type == ColumnType::numeric) {
            double x = row.numeric(term.column);
            if (std::isnan(x))
                x = term.fill;
            y += term.coefficient * (x - term.center);
        } else {
            const std::int32_t c = row.code(term.column);
            if (c >= 0 && static_cast<std::size_t>(c) < term.category_coefficients.size())
                y += term.category_coefficients[static_cast<std::size_t>(c)];
            else
                y += term.fill;
        }
    }
    return y;
}

template <typename Row>
double project(const Hyperplane& plane, const Row& row) {
    return project_terms(std::span<const HyperplaneTerm>(plane.terms), row);
}

/// Pooled gain (sd - (n_l*sd_l + n_r*sd_r)/n) / sd of splitting `sorted_y`
/// after its first `split_index` elements, with population deviations.
/// Throws ZeroVariance when `sorted_y` is constant.
double pooled_gain(std::span<const double> sorted_y, std::size_t split_index);

struct SplitResult {
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

/// Scratch buffers reused across split searches.
struct SplitWorkspace {
    std::vector<double> sorted;
    std::vector<double> right_sd;
    std::vector<double> gains;
};

/// Gains closer than this to the maximum count as ties.
inline constexpr double kGainTieTolerance = 1e-12;

/// Maximizes pooled gain over every boundary between distinct adjacent sorted
/// values. The threshold is the midpoint of the two values around the chosen
/// boundary, so `y <= threshold` selects the left side. Among tied gains the
/// smallest left side wins. Throws ZeroVariance when `y` is constant.
SplitResult best_split(std::span<const double> y, SplitWorkspace& workspace);
SplitResult best_split(std::span<const double> y);

/// partition[i] is true when y[i] goes left.
std::vector<bool> partition_of(std::span<const double> y, double threshold);

}  // namespace faircut
