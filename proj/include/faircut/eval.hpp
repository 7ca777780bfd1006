#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faircut/dataset.hpp"
#include "faircut/forest.hpp"

namespace faircut {

struct MaskSpec {
    enum class Mode { fraction_mcar, one_per_row };

    Mode mode = Mode::fraction_mcar;
    double fraction = 0.1;  // fraction_mcar only, in (0, 1)
    std::uint64_t seed = 1;
    std::vector<std::string> exclude;  // columns never masked

    static MaskSpec mcar(double fraction, std::uint64_t seed) { return {Mode::fraction_mcar, fraction, seed, {}}; }
    static MaskSpec one_per_row(std::uint64_t seed) { return {Mode::one_per_row, 0.0, seed, {}}; }

    std::string describe() const;
};

/// Ground truth for one masked cell. `numeric` is set for numeric columns,
/// `code` for categorical ones.
struct MaskedCell {
    std::size_t row = 0;
    std::size_t col = 0;
    double numeric = 0.0;
    std::int32_t code = 0;
};

struct MaskResult {
    Dataset masked;
    std::vector<MaskedCell> truth;
    std::size_t candidates = 0;  // observed cells eligible for masking
};

/// Masks observed cells. Fraction mode masks each eligible cell independently
/// with the given probability; one-per-row masks one uniformly chosen
/// observed eligible cell in every row that has one. Deterministic in the
/// seed. Throws NothingToMask when no cell gets masked.
MaskResult apply_mask(const Dataset& data, const MaskSpec& spec);

/// Numeric cells get the column median, categorical cells the mode. Columns
/// with no observed values stay missing; their indices go to `unfilled`.
Dataset median_impute(const Dataset& data, const std::vector<ColumnStats>& stats,
                      std::vector<std::size_t>* unfilled = nullptr);

struct ImputationScore {
    double rmse = 0.0;          // NaN when no numeric cells were masked
    double accuracy = 0.0;      // NaN when no categorical cells were masked
    std::size_t n_numeric = 0;
    std::size_t n_categorical = 0;
};

/// Categorical cells compare by category name, so `imputed` may carry a
/// different category list than the masked source.
ImputationScore score_imputation(const Dataset& imputed, const Dataset& truth_source,
                                 const std::vector<MaskedCell>& truth);

/// Fold of every row for k-fold CV: shuffled indices split into k
/// near-equal contiguous blocks.
std::vector<std::size_t> make_folds(std::size_t n_rows, std::size_t k, std::uint64_t seed);

struct CvResult {
    double mean_rmse = 0.0;
    std::vector<double> fold_rmse;
};

/// Least-squares regression of `target` on every other column (intercept
/// included, categorical columns one-hot encoded against their first level),
/// scored by held-out RMSE in each fold.
CvResult ols_cv_rmse(const Dataset& data, std::string_view target, std::size_t k, std::uint64_t seed);
CvResult ols_cv_rmse(const Dataset& data, std::string_view target, const std::vector<std::size_t>& folds,
                     std::size_t k);

struct MethodResult {
    std::string name;
    double fit_s = 0.0;
    double impute_s = 0.0;
    ImputationScore imputation;
    CvResult cv;
};

struct EvalReport {
    std::string dataset;
    MaskSpec mask;
    std::size_t n_masked = 0;
    std::vector<MethodResult> methods;
};

struct BenchmarkOptions {
    std::vector<std::string> methods;  // median, full-data, faircut-{large,mid,small}
    std::size_t folds = 10;
    std::uint64_t seed = 1;            // forest and CV seed
    RunOptions run;
    std::string dataset_name;
    /// Overrides applied on top of a faircut preset.
    std::optional<ForestParams> custom_params;
};

bool is_known_method(std::string_view name);

/// Masks every column except `target`, imputes with each method, scores the
/// imputations on the masked cells and by downstream OLS cross-validation.
/// Imputation models are fit once on the whole masked table.
EvalReport run_benchmark(const Dataset& data, std::string_view target, const MaskSpec& mask,
                         const BenchmarkOptions& options);

std::string report_json(const EvalReport& report, bool include_timings = true);
std::string report_table(const EvalReport& report);

}  // namespace faircut
