#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "faircut/dataset.hpp"
#include "faircut/random.hpp"
#include "faircut/splitter.hpp"

namespace faircut {

struct TreeParams {
    std::size_t max_depth = 1;   // root is depth 0
    std::size_t n_dims = 3;      // columns per hyperplane
    std::size_t n_trials = 20;   // hyperplanes tried per node
    double min_gain = 0.0;
    std::size_t min_obs = 3;     // observed values a node needs to supply its own imputation

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;

    bool operator==(const TreeParams&) const = default;
};

/// Per-column imputation values and weights attached to a node.
/// `value` is unused (zero) for categorical columns, `proportions` is empty
/// for numeric ones.
struct ImputationRecord {
    std::vector<double> value;
    std::vector<double> weight;
    std::vector<std::vector<double>> proportions;
};

/// Imputation record for a node. With k observed values of a column, the node
/// supplies its own mean (or category proportions) with weight (depth+1)/sqrt(k)
/// when k >= min_obs; otherwise it inherits the parent's value with weight
/// (depth+1)/(2 sqrt(n_rows)). At the root, `fallback` stands in for the parent.
ImputationRecord node_imputation(const NodeSummary& node, std::size_t depth,
                                 const ImputationRecord* parent, std::size_t min_obs,
                                 const std::vector<ColumnStats>& fallback);

/// A grown tree. Internal nodes hold a hyperplane and threshold; terminal
/// nodes hold an imputation record. Records of internal nodes are only needed
/// while growing and are not kept.
class Tree {
public:
    struct Node {
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t depth = 0;
        std::uint32_t term_begin = 0;
        std::uint32_t term_count = 0;
        std::int32_t record = -1;  // terminal record index
        double threshold = 0.0;
        double gain = 0.0;         // internal nodes only

        bool is_terminal() const noexcept { return left < 0; }
        bool operator==(const Node&) const = default;
    };

    Tree() = default;
    explicit Tree(const std::vector<ColumnInfo>& columns);

    std::size_t n_nodes() const noexcept { return nodes_.size(); }
    const Node& node(std::size_t id) const { return nodes_.at(id); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::span<const HyperplaneTerm> terms(const Node& n) const {
        return std::span<const HyperplaneTerm>(terms_).subspan(n.term_begin, n.term_count);
    }
    std::size_t max_depth() const;
    std::size_t n_terminals() const noexcept { return n_records_; }

    /// Terminal record accessors; `record` is `Node::record`.
    std::span<const double> values(std::int32_t record) const;
    std::span<const double> weights(std::int32_t record) const;
    std::span<const double> proportions(std::int32_t record, std::size_t col) const;
    ImputationRecord record(std::int32_t record) const;

    /// Index of the terminal node `row` lands in.
    template <typename Row>
    std::size_t route(const Row& row) const {
        std::size_t id = 0;
        while (!nodes_[id].is_terminal()) {
            const Node& n = nodes_[id];
            const double y = project_terms(terms(n), row);
            id = static_cast<std::size_t>(y <= n.threshold ? n.left : n.right);
        }
        return id;
    }

    // Construction, used by the grower and the model reader.
    std::int32_t add_node(const Node& n);
    Node& mutable_node(std::size_t id) { return nodes_.at(id); }
    std::uint32_t add_terms(std::span<const HyperplaneTerm> terms);
    std::int32_t add_record(const ImputationRecord& record);
    void shrink_to_fit();

    std::size_t n_cols() const noexcept { return n_cols_; }
    std::size_t category_offset(std::size_t col) const { return cat_offset_[col]; }
    std::size_t category_count(std::size_t col) const { return cat_offset_[col + 1] - cat_offset_[col]; }

    bool operator==(const Tree&) const = default;

private:
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> cat_offset_;  // prefix sums of category counts
    std::vector<Node> nodes_;
    std::vector<HyperplaneTerm> terms_;
    std::size_t n_records_ = 0;
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> proportions_;
};

/// Hooks for inspecting growth; every member is optional.
struct GrowthTrace {
    std::vector<double>* trial_gains = nullptr;          // every successful trial
    std::vector<std::int32_t>* terminal_of_row = nullptr; // indexed by training row
};

/// Grows one tree over `rows` of `data`. Node order is depth-first, left
/// before right, so node 0 is the root.
Tree grow_tree(const ColumnMatrix& data, const std::vector<ColumnInfo>& columns,
               std::span<const std::size_t> rows, const TreeParams& params,
               const std::vector<ColumnStats>& global_stats, RandomStream& rng,
               const GrowthTrace& trace = {});

}  // namespace faircut
