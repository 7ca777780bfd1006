#pragma once

// Tree-parallel growth and row-parallel imputation. Each kernel has a serial
// reference version; both produce identical results, which the tests check.

#include <span>
#include <vector>

#include "faircut/forest.hpp"

namespace faircut::kernels {

struct GrowJob {
    const ColumnMatrix* data;
    const std::vector<ColumnInfo>* columns;
    const std::vector<ColumnStats>* stats;
    TreeParams tree_params;
    std::size_t rows_per_tree;
    std::uint64_t seed;
};

/// Grows tree `index` of the job; the only source of randomness is
/// RandomStream::derive(seed, index).
Tree grow_one(const GrowJob& job, std::size_t index);

std::vector<Tree> grow_serial(const GrowJob& job, std::size_t n_trees);
std::vector<Tree> grow_parallel(const GrowJob& job, std::size_t n_trees, int threads);

/// Accumulator for one row; sized for a forest's columns.
struct RowAccumulator {
    std::vector<double> weighted;    // numeric: sum of value * weight
    std::vector<double> weight;      // per column
    std::vector<double> categories;  // flattened sum of weight * proportions
    std::vector<std::size_t> missing;

    explicit RowAccumulator(const Forest& forest);
};

ImputedRow impute_one(const Forest& forest, const ColumnMatrix& data, std::size_t row, RowAccumulator& acc);

void impute_serial(const Forest& forest, const ColumnMatrix& data, std::span<ImputedRow> out);
void impute_parallel(const Forest& forest, const ColumnMatrix& data, std::span<ImputedRow> out, int threads);

}  // namespace faircut::kernels
