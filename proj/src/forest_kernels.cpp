#include "kernels.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include <omp.h>

namespace faircut::kernels {

Tree grow_one(const GrowJob& job, std::size_t index) {
    RandomStream rng = RandomStream::derive(job.seed, index);
    const std::size_t n = job.data->n_rows();
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (job.rows_per_tree < n) {
        rng.choose_front(std::span<std::size_t>(rows), job.rows_per_tree);
        rows.resize(job.rows_per_tree);
        std::sort(rows.begin(), rows.end());
    }
    return grow_tree(*job.data, *job.columns, rows, job.tree_params, *job.stats, rng);
}

std::vector<Tree> grow_serial(const GrowJob& job, std::size_t n_trees) {
    std::vector<Tree> trees;
    trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t)
        trees.push_back(grow_one(job, t));
    return trees;
}

std::vector<Tree> grow_parallel(const GrowJob& job, std::size_t n_trees, int threads) {
    std::vector<Tree> trees(n_trees);
    std::exception_ptr failure;
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    const auto count = static_cast<std::ptrdiff_t>(n_trees);

#pragma omp parallel for schedule(dynamic) num_threads(nthreads) shared(trees, failure, job)
    for (std::ptrdiff_t t = 0; t < count; ++t) {
        try {
            trees[static_cast<std::size_t>(t)] = grow_one(job, static_cast<std::size_t>(t));
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return trees;
}

RowAccumulator::RowAccumulator(const Forest& forest) {
    const std::size_t p = forest.columns().size();
    weighted.assign(p, 0.0);
    weight.assign(p, 0.0);
    std::size_t total = 0;
    for (const auto& c : forest.columns())
        if (c.kind.is_categorical())
            total += c.kind.n_categories();
    categories.assign(total, 0.0);
    missing.reserve(p);
}

ImputedRow impute_one(const Forest& forest, const ColumnMatrix& data, std::size_t row, RowAccumulator& acc) {
    const std::size_t p = forest.columns().size();
    ImputedRow out;
    out.numeric.assign(p, 0.0);
    out.code.assign(p, kMissingCode);
    out.imputed.assign(p, 0);

    acc.missing.clear();
    for (std::size_t j = 0; j < p; ++j) {
        const bool miss = data.type(j) == ColumnType::numeric ? std::isnan(data.numeric(row, j))
                                                              : data.code(row, j) < 0;
        if (miss)
            acc.missing.push_back(j);
        else if (data.type(j) == ColumnType::numeric)
            out.numeric[j] = data.numeric(row, j);
        else
            out.code[j] = data.code(row, j);
    }
    if (acc.missing.empty())
        return out;

    std::fill(acc.weighted.begin(), acc.weighted.end(), 0.0);
    std::fill(acc.weight.begin(), acc.weight.end(), 0.0);
    std::fill(acc.categories.begin(), acc.categories.end(), 0.0);

    const MatrixRow view{&data, row};
    for (const Tree& tree : forest.trees()) {
        const auto& leaf = tree.node(tree.route(view));
        auto values = tree.values(leaf.record);
        auto weights = tree.weights(leaf.record);
        for (std::size_t j : acc.missing) {
            const double w = weights[j];
            acc.weight[j] += w;
            if (data.type(j) == ColumnType::numeric) {
                acc.weighted[j] += values[j] * w;
            } else {
                auto props = tree.proportions(leaf.record, j);
                double* dst = acc.categories.data() + tree.category_offset(j);
                for (std::size_t c = 0; c < props.size(); ++c)
                    dst[c] += w * props[c];
            }
        }
        ++out.contributions;
    }

    const Tree* shape = forest.trees().empty() ? nullptr : &forest.trees().front();
    for (std::size_t j : acc.missing) {
        out.imputed[j] = 1;
        if (data.type(j) == ColumnType::numeric) {
            out.numeric[j] = acc.weighted[j] / acc.weight[j];
        } else if (shape) {
            const double* sums = acc.categories.data() + shape->category_offset(j);
            const std::size_t k = shape->category_count(j);
            std::size_t best = 0;
            for (std::size_t c = 1; c < k; ++c)
                if (sums[c] > sums[best])
                    best = c;
            out.code[j] = static_cast<std::int32_t>(best);
        }
    }
    return out;
}

void impute_serial(const Forest& forest, const ColumnMatrix& data, std::span<ImputedRow> out) {
    RowAccumulator acc(forest);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = impute_one(forest, data, i, acc);
}

void impute_parallel(const Forest& forest, const ColumnMatrix& data, std::span<ImputedRow> out, int threads) {
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel num_threads(nthreads) shared(forest, data, out)
    {
        RowAccumulator acc(forest);
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t i = 0; i < count; ++i)
            out[static_cast<std::size_t>(i)] = impute_one(forest, data, static_cast<std::size_t>(i), acc);
    }
}

}  // namespace faircut::kernels
