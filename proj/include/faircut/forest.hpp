#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faircut/dataset.hpp"
#include "faircut/tree.hpp"

namespace faircut {

enum class Preset { large, mid, small };

std::optional<Preset> parse_preset(std::string_view name);
std::string_view preset_name(Preset preset);

struct ForestParams {
    std::size_t n_dims = 3;
    std::size_t n_trials = 20;
    double min_gain = 0.0;
    std::size_t min_obs = 3;
    /// Fixed depth limit; when unset the limit is depth_multiplier * ceil(log2 n)
    /// with n the number of rows each tree is grown on.
    std::optional<std::size_t> max_depth;
    std::size_t depth_multiplier = 3;
    std::size_t n_trees = 500;
    /// Rows drawn without replacement for each tree; all rows when unset.
    /// Values above the row count are clamped at fit time.
    std::optional<std::size_t> subsample;
    std::uint64_t seed = 1;

    static ForestParams from_preset(Preset preset);

    void validate() const;
    std::size_t rows_per_tree(std::size_t n_rows) const;
    TreeParams tree_params(std::size_t n_rows) const;

    bool operator==(const ForestParams&) const = default;
};

/// ceil(log2(n)) for n >= 1.
std::size_t ceil_log2(std::size_t n);

enum class Execution { serial, parallel };

struct RunOptions {
    Execution execution = Execution::parallel;
    int threads = 0;  // 0: OpenMP default
};

/// Imputation result for one row, in the forest's column order.
struct ImputedRow {
    std::vector<double> numeric;
    std::vector<std::int32_t> code;  // training category codes
    std::vector<std::uint8_t> imputed;
    std::size_t contributions = 0;   // terminal records aggregated per imputed column
};

class Forest {
public:
    static constexpr int kFormatVersion = 1;

    Forest() = default;
    Forest(ForestParams params, TreeParams tree_params, std::vector<ColumnInfo> columns,
           std::vector<ColumnStats> stats, std::size_t n_train_rows, std::vector<Tree> trees);

    const ForestParams& params() const noexcept { return params_; }
    const TreeParams& tree_params() const noexcept { return tree_params_; }
    const std::vector<ColumnInfo>& columns() const noexcept { return columns_; }
    const std::vector<ColumnStats>& stats() const noexcept { return stats_; }
    const std::vector<Tree>& trees() const noexcept { return trees_; }
    std::size_t n_train_rows() const noexcept { return n_train_rows_; }
    std::size_t max_observed_depth() const;

    bool operator==(const Forest&) const = default;

private:
    ForestParams params_;
    TreeParams tree_params_;
    std::vector<ColumnInfo> columns_;
    std::vector<ColumnStats> stats_;
    std::size_t n_train_rows_ = 0;
    std::vector<Tree> trees_;
};

/// Grows `params.n_trees` trees, tree i from RandomStream::derive(seed, i).
/// Results do not depend on the execution mode or thread count.
Forest fit(const Dataset& data, const ForestParams& params, const RunOptions& options = {});

/// Input data re-encoded in the forest's column order, with category codes
/// translated to the training categories. Categories never seen in training
/// get an out-of-range code and project like missing values.
struct AlignedData {
    ColumnMatrix matrix;
    std::vector<std::size_t> source_column;  // forest column -> input column
};

/// Throws ColumnMismatch when a training column is absent, has a different
/// kind, or the input has columns the forest was not trained on.
AlignedData align(const Forest& forest, const Dataset& data);

ImputedRow impute_row(const Forest& forest, const AlignedData& data, std::size_t row);
ImputedRow impute_row(const Forest& forest, const Dataset& data, std::size_t row);

/// Copy of `data` with every missing cell of a training column filled.
Dataset impute_dataset(const Forest& forest, const Dataset& data, const RunOptions& options = {});

void save(const Forest& forest, const std::filesystem::path& path);
std::string serialize(const Forest& forest);
Forest load(const std::filesystem::path& path);
Forest deserialize(const std::string& text);

}  // namespace faircut
