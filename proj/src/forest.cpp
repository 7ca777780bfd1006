#include "faircut/forest.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "faircut/errors.hpp"
#include "kernels.hpp"

namespace faircut {

std::optional<Preset> parse_preset(std::string_view name) {
    if (name == "large")
        return Preset::large;
    if (name == "mid")
        return Preset::mid;
    if (name == "small")
        return Preset::small;
    return std::nullopt;
}

std::string_view preset_name(Preset preset) {
    switch (preset) {
    case Preset::large:
        return "large";
    case Preset::mid:
        return "mid";
    case Preset::small:
        return "small";
    }
    return "large";
}

ForestParams ForestParams::from_preset(Preset preset) {
    ForestParams p;
    p.n_dims = 3;
    p.min_obs = 3;
    p.min_gain = 0.0;
    switch (preset) {
    case Preset::large:
        p.n_trials = 20;
        p.depth_multiplier = 3;
        p.n_trees = 500;
        break;
    case Preset::mid:
        p.n_trials = 10;
        p.depth_multiplier = 1;
        p.n_trees = 100;
        break;
    case Preset::small:
        p.n_trials = 10;
        p.depth_multiplier = 1;
        p.max_depth = 13;
        p.n_trees = 100;
        p.subsample = 5000;
        break;
    }
    return p;
}

void ForestParams::validate() const {
    if (n_trees < 1)
        throw InvalidArgument("number of trees must be >= 1");
    if (subsample && *subsample < 1)
        throw InvalidArgument("subsample size must be >= 1");
    if (!max_depth && depth_multiplier < 1)
        throw InvalidArgument("depth multiplier must be >= 1");
    TreeParams probe = tree_params(2);
    probe.validate();
}

std::size_t ceil_log2(std::size_t n) {
    if (n <= 1)
        return 0;
    return static_cast<std::size_t>(std::bit_width(n - 1));
}

std::size_t ForestParams::rows_per_tree(std::size_t n_rows) const {
    return subsample ? std::min(*subsample, n_rows) : n_rows;
}

TreeParams ForestParams::tree_params(std::size_t n_rows) const {
    TreeParams t;
    t.n_dims = n_dims;
    t.n_trials = n_trials;
    t.min_gain = min_gain;
    t.min_obs = min_obs;
    t.max_depth = max_depth ? *max_depth : depth_multiplier * ceil_log2(rows_per_tree(n_rows));
    return t;
}

Forest::Forest(ForestParams params, TreeParams tree_params, std::vector<ColumnInfo> columns,
               std::vector<ColumnStats> stats, std::size_t n_train_rows, std::vector<Tree> trees)
    : params_(std::move(params)), tree_params_(tree_params), columns_(std::move(columns)),
      stats_(std::move(stats)), n_train_rows_(n_train_rows), trees_(std::move(trees)) {
    if (stats_.size() != columns_.size())
        throw InvalidArgument("column statistics do not cover every column");
    if (trees_.size() != params_.n_trees)
        throw InvalidArgument("tree count does not match the parameters");
}

std::size_t Forest::max_observed_depth() const {
    std::size_t d = 0;
    for (const auto& t : trees_)
        d = std::max(d, t.max_depth());
    return d;
}

Forest fit(const Dataset& data, const ForestParams& params, const RunOptions& options) {
    params.validate();
    if (data.n_rows() < 2)
        throw InsufficientData("need at least 2 rows to fit, got " + std::to_string(data.n_rows()));
    if (data.n_cols() < 1)
        throw InsufficientData("need at least 1 column to fit");

    auto stats = compute_stats(data);
    for (std::size_t j = 0; j < data.n_cols(); ++j)
        if (stats[j].empty())
            throw InsufficientData("column '" + data.column(j).name + "' has no observed values");

    const ColumnMatrix matrix(data);
    const TreeParams tree_params = params.tree_params(data.n_rows());
    kernels::GrowJob job{&matrix, &data.columns(), &stats, tree_params,
                         params.rows_per_tree(data.n_rows()), params.seed};

    std::vector<Tree> trees = options.execution == Execution::serial
                                  ? kernels::grow_serial(job, params.n_trees)
                                  : kernels::grow_parallel(job, params.n_trees, options.threads);
    return Forest(params, tree_params, data.columns(), std::move(stats), data.n_rows(), std::move(trees));
}

AlignedData align(const Forest& forest, const Dataset& data) {
    const auto& cols = forest.columns();
    for (const auto& in : data.columns()) {
        bool known = std::any_of(cols.begin(), cols.end(), [&](const ColumnInfo& c) { return c.name == in.name; });
        if (!known)
            throw ColumnMismatch("column '" + in.name + "' was not present in training", in.name);
    }

    const std::size_t n = data.n_rows();
    const std::size_t p = cols.size();
    AlignedData out;
    out.source_column.resize(p);
    std::vector<ColumnType> types(p);
    std::vector<std::size_t> n_categories(p, 0);
    std::vector<std::vector<double>> values(p);
    std::vector<std::vector<std::int32_t>> codes(p);

    for (std::size_t j = 0; j < p; ++j) {
        const auto& train = cols[j];
        auto src = data.find_column(train.name);
        if (!src)
            throw ColumnMismatch("missing training column '" + train.name + "'", train.name);
        const auto& input = data.column(*src);
        if (input.kind.type != train.kind.type)
            throw ColumnMismatch("column '" + train.name + "' is " +
                                     (train.kind.is_numeric() ? "numeric" : "categorical") +
                                     " in the model but not in the input",
                                 train.name);
        out.source_column[j] = *src;
        types[j] = train.kind.type;
        auto missing = data.missing_column(*src);
        if (train.kind.is_numeric()) {
            auto v = data.numeric_column(*src);
            values[j].resize(n);
            for (std::size_t i = 0; i < n; ++i)
                values[j][i] = missing[i] ? std::numeric_limits<double>::quiet_NaN() : v[i];
        } else {
            const std::size_t k = train.kind.n_categories();
            n_categories[j] = k;
            // Unseen categories map past the end of the training list.
            std::vector<std::int32_t> remap(input.kind.n_categories());
            for (std::size_t c = 0; c < remap.size(); ++c) {
                auto code = train.kind.code_of(input.kind.categories[c]);
                remap[c] = code ? *code : static_cast<std::int32_t>(k);
            }
            auto v = data.code_column(*src);
            codes[j].resize(n);
            for (std::size_t i = 0; i < n; ++i)
                codes[j][i] = missing[i] ? kMissingCode : remap[static_cast<std::size_t>(v[i])];
        }
    }
    out.matrix = ColumnMatrix(n, std::move(types), std::move(n_categories), std::move(values), std::move(codes));
    return out;
}

ImputedRow impute_row(const Forest& forest, const AlignedData& data, std::size_t row) {
    if (row >= data.matrix.n_rows())
        throw InvalidArgument("row index out of range");
    kernels::RowAccumulator acc(forest);
    return kernels::impute_one(forest, data.matrix, row, acc);
}

ImputedRow impute_row(const Forest& forest, const Dataset& data, std::size_t row) {
    if (row >= data.n_rows())
        throw InvalidArgument("row index out of range");
    std::size_t one = row;
    return impute_row(forest, align(forest, data.select_rows(std::span<const std::size_t>(&one, 1))), 0);
}

Dataset impute_dataset(const Forest& forest, const Dataset& data, const RunOptions& options) {
    const AlignedData aligned = align(forest, data);
    std::vector<ImputedRow> rows(data.n_rows());
    if (options.execution == Execution::serial)
        kernels::impute_serial(forest, aligned.matrix, rows);
    else
        kernels::impute_parallel(forest, aligned.matrix, rows, options.threads);

    // Output keeps the input's columns; training categories the input never
    // mentioned are appended so imputed codes have a name.
    std::vector<ColumnInfo> columns = data.columns();
    const auto& train = forest.columns();
    std::vector<std::vector<std::int32_t>> to_output(train.size());
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (!train[j].kind.is_categorical())
            continue;
        auto& out_kind = columns[aligned.source_column[j]].kind;
        for (const auto& name : train[j].kind.categories) {
            auto code = out_kind.code_of(name);
            if (!code) {
                out_kind.categories.push_back(name);
                code = static_cast<std::int32_t>(out_kind.categories.size() - 1);
            }
            to_output[j].push_back(*code);
        }
    }

    Dataset out(columns, data.n_rows());
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            if (data.is_missing(i, j))
                continue;
            if (columns[j].kind.is_numeric())
                out.set_numeric(i, j, data.numeric(i, j));
            else
                out.set_code(i, j, data.code(i, j));
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        for (std::size_t j = 0; j < train.size(); ++j) {
            if (!r.imputed[j])
                continue;
            const std::size_t dst = aligned.source_column[j];
            if (train[j].kind.is_numeric())
                out.set_numeric(i, dst, r.numeric[j]);
            else
                out.set_code(i, dst, to_output[j][static_cast<std::size_t>(r.code[j])]);
        }
    }
    return out;
}

}  // namespace faircut
