#include "faircut/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faircut/errors.hpp"

namespace faircut {

void TreeParams::validate() const {
    if (n_dims < 1)
        throw InvalidArgument("number of hyperplane columns must be >= 1");
    if (n_trials < 1)
        throw InvalidArgument("number of trials must be >= 1");
    if (min_obs < 1)
        throw InvalidArgument("minimum observations must be >= 1");
    if (!std::isfinite(min_gain))
        throw InvalidArgument("minimum gain must be finite");
    if (max_depth > 10000)
        throw InvalidArgument("maximum depth is unreasonably large");
}

ImputationRecord node_imputation(const NodeSummary& node, std::size_t depth,
                                 const ImputationRecord* parent, std::size_t min_obs,
                                 const std::vector<ColumnStats>& fallback) {
    const std::size_t p = node.columns.size();
    const double d_eff = static_cast<double>(depth + 1);
    const double inherited_weight = d_eff / (2.0 * std::sqrt(static_cast<double>(node.n_rows)));

    ImputationRecord rec;
    rec.value.assign(p, 0.0);
    rec.weight.assign(p, 0.0);
    rec.proportions.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto& col = node.columns[j];
        const std::size_t k = col.n_known;
        const bool own = k >= min_obs && k > 0;
        rec.weight[j] = own ? d_eff / std::sqrt(static_cast<double>(k)) : inherited_weight;
        if (col.type == ColumnType::numeric) {
            if (own)
                rec.value[j] = col.mean;
            else if (parent)
                rec.value[j] = parent->value[j];
            else
                rec.value[j] = fallback.at(j).numeric.mean;
        } else {
            if (own)
                rec.proportions[j] = col.proportions;
            else if (parent)
                rec.proportions[j] = parent->proportions[j];
            else
                rec.proportions[j] = fallback.at(j).categorical.proportions;
        }
    }
    return rec;
}

Tree::Tree(const std::vector<ColumnInfo>& columns) : n_cols_(columns.size()) {
    cat_offset_.assign(n_cols_ + 1, 0);
    for (std::size_t j = 0; j < n_cols_; ++j)
        cat_offset_[j + 1] = cat_offset_[j] +
                             (columns[j].kind.is_categorical() ? columns[j].kind.n_categories() : 0);
}

void Tree::shrink_to_fit() {
    nodes_.shrink_to_fit();
    terms_.shrink_to_fit();
    values_.shrink_to_fit();
    weights_.shrink_to_fit();
    proportions_.shrink_to_fit();
}

std::size_t Tree::max_depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes_)
        d = std::max<std::size_t>(d, n.depth);
    return d;
}

std::span<const double> Tree::values(std::int32_t record) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(record) * n_cols_, n_cols_);
}

std::span<const double> Tree::weights(std::int32_t record) const {
    return std::span<const double>(weights_).subspan(static_cast<std::size_t>(record) * n_cols_, n_cols_);
}

std::span<const double> Tree::proportions(std::int32_t record, std::size_t col) const {
    const std::size_t stride = cat_offset_.back();
    return std::span<const double>(proportions_)
        .subspan(static_cast<std::size_t>(record) * stride + cat_offset_[col], category_count(col));
}

ImputationRecord Tree::record(std::int32_t record) const {
    if (record < 0 || static_cast<std::size_t>(record) >= n_records_)
        throw InvalidArgument("record index out of range");
    ImputationRecord out;
    auto v = values(record);
    auto w = weights(record);
    out.value.assign(v.begin(), v.end());
    out.weight.assign(w.begin(), w.end());
    out.proportions.resize(n_cols_);
    for (std::size_t j = 0; j < n_cols_; ++j) {
        auto pr = proportions(record, j);
        out.proportions[j].assign(pr.begin(), pr.end());
    }
    return out;
}

std::int32_t Tree::add_node(const Node& n) {
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::uint32_t Tree::add_terms(std::span<const HyperplaneTerm> terms) {
    auto begin = static_cast<std::uint32_t>(terms_.size());
    for (const auto& t : terms) {
        if (t.column >= n_cols_)
            throw InvalidArgument("hyperplane term references an unknown column");
        if (t.type == ColumnType::categorical && t.category_coefficients.size() != category_count(t.column))
            throw InvalidArgument("hyperplane term has the wrong number of category coefficients");
    }
    terms_.insert(terms_.end(), terms.begin(), terms.end());
    return begin;
}

std::int32_t Tree::add_record(const ImputationRecord& rec) {
    if (rec.value.size() != n_cols_ || rec.weight.size() != n_cols_ || rec.proportions.size() != n_cols_)
        throw InvalidArgument("imputation record does not match the column count");
    values_.insert(values_.end(), rec.value.begin(), rec.value.end());
    weights_.insert(weights_.end(), rec.weight.begin(), rec.weight.end());
    for (std::size_t j = 0; j < n_cols_; ++j) {
        if (rec.proportions[j].size() != category_count(j))
            throw InvalidArgument("imputation record has the wrong number of categories");
        proportions_.insert(proportions_.end(), rec.proportions[j].begin(), rec.proportions[j].end());
    }
    return static_cast<std::int32_t>(n_records_++);
}

namespace {

class TreeGrower {
public:
    TreeGrower(const ColumnMatrix& data, const std::vector<ColumnInfo>& columns,
               std::span<const std::size_t> rows, const TreeParams& params,
               const std::vector<ColumnStats>& global_stats, RandomStream& rng, const GrowthTrace& trace)
        : data_(data), params_(params), global_(global_stats), rng_(rng), trace_(trace),
          tree_(columns), rows_(rows.begin(), rows.end()) {
        y_trial_.resize(rows_.size());
        y_best_.resize(rows_.size());
        scratch_.resize(rows_.size());
    }

    Tree run() {
        if (rows_.empty())
            throw InsufficientData("cannot grow a tree on zero rows");
        grow(0, rows_.size(), 0, nullptr);
        tree_.shrink_to_fit();
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth, const ImputationRecord* parent) {
        if (begin >= end)
            throw Error("internal error: empty tree node");
        const std::size_t n = end - begin;
        std::span<const std::size_t> rows(rows_.data() + begin, n);
        const NodeSummary summary = summarize_node(data_, rows);
        ImputationRecord record = node_imputation(summary, depth, parent, params_.min_obs, global_);

        Tree::Node node;
        node.depth = static_cast<std::uint32_t>(depth);
        const std::int32_t id = tree_.add_node(node);

        if (n == 1 || depth >= params_.max_depth || !summary.any_eligible())
            return make_terminal(id, rows, record);

        double best_gain = -std::numeric_limits<double>::infinity();
        double best_threshold = 0.0;
        Hyperplane best_plane;
        for (std::size_t t = 0; t < params_.n_trials; ++t) {
            Hyperplane plane = draw_hyperplane(summary, params_.n_dims, rng_);
            for (std::size_t i = 0; i < n; ++i)
                y_trial_[i] = project(plane, MatrixRow{&data_, rows[i]});
            SplitResult split;
            try {
                split = best_split(std::span<const double>(y_trial_.data(), n), workspace_);
            } catch (const ZeroVariance&) {
                continue;
            }
            if (trace_.trial_gains)
                trace_.trial_gains->push_back(split.gain);
            if (split.gain > best_gain) {
                best_gain = split.gain;
                best_threshold = split.threshold;
                best_plane = std::move(plane);
                std::swap(y_trial_, y_best_);
            }
        }
        if (!(best_gain >= params_.min_gain))
            return make_terminal(id, rows, record);

        // Stable partition of the row range by the winning projection.
        std::size_t n_left = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (y_best_[i] <= best_threshold)
                scratch_[n_left++] = rows[i];
        std::size_t r = n_left;
        for (std::size_t i = 0; i < n; ++i)
            if (!(y_best_[i] <= best_threshold))
                scratch_[r++] = rows[i];
        if (n_left == 0 || n_left == n)
            throw Error("internal error: split produced an empty branch");
        std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(n),
                  rows_.begin() + static_cast<std::ptrdiff_t>(begin));

        {
            auto& nd = tree_.mutable_node(static_cast<std::size_t>(id));
            nd.term_begin = tree_.add_terms(best_plane.terms);
            nd.term_count = static_cast<std::uint32_t>(best_plane.terms.size());
            nd.threshold = best_threshold;
            nd.gain = best_gain;
        }
        const std::int32_t left = grow(begin, begin + n_left, depth + 1, &record);
        const std::int32_t right = grow(begin + n_left, end, depth + 1, &record);
        auto& nd = tree_.mutable_node(static_cast<std::size_t>(id));
        nd.left = left;
        nd.right = right;
        return id;
    }

    std::int32_t make_terminal(std::int32_t id, std::span<const std::size_t> rows, const ImputationRecord& record) {
        tree_.mutable_node(static_cast<std::size_t>(id)).record = tree_.add_record(record);
        if (trace_.terminal_of_row)
            for (auto i : rows)
                (*trace_.terminal_of_row)[i] = id;
        return id;
    }

    const ColumnMatrix& data_;
    const TreeParams& params_;
    const std::vector<ColumnStats>& global_;
    RandomStream& rng_;
    const GrowthTrace& trace_;
    Tree tree_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> scratch_;
    std::vector<double> y_trial_;
    std::vector<double> y_best_;
    SplitWorkspace workspace_;
};

}  // namespace

Tree grow_tree(const ColumnMatrix& data, const std::vector<ColumnInfo>& columns,
               std::span<const std::size_t> rows, const TreeParams& params,
               const std::vector<ColumnStats>& global_stats, RandomStream& rng,
               const GrowthTrace& trace) {
    params.validate();
    if (columns.size() != data.n_cols() || global_stats.size() != data.n_cols())
        throw InvalidArgument("column metadata does not match the data");
    if (trace.terminal_of_row && trace.terminal_of_row->size() < data.n_rows())
        trace.terminal_of_row->assign(data.n_rows(), -1);
    TreeGrower grower(data, columns, rows, params, global_stats, rng, trace);
    return grower.run();
}

}  // namespace faircut
