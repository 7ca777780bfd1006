#include "faircut/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "faircut/errors.hpp"
#include "faircut/random.hpp"

namespace faircut {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRidgeJitter = 1e-10;

// Stream tags keep the mask, fold and forest streams apart for one seed.
constexpr std::uint64_t kMaskStream = 0x6D61736BULL;
constexpr std::uint64_t kFoldStream = 0x666F6C64ULL;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void copy_cell(const Dataset& src, std::size_t i, std::size_t j, Dataset& dst, std::size_t di, std::size_t dj) {
    if (src.is_missing(i, j))
        dst.set_missing(di, dj);
    else if (src.column(j).kind.is_numeric())
        dst.set_numeric(di, dj, src.numeric(i, j));
    else
        dst.set_code(di, dj, src.code(i, j));
}

Dataset drop_column(const Dataset& data, std::size_t drop) {
    std::vector<ColumnInfo> cols;
    for (std::size_t j = 0; j < data.n_cols(); ++j)
        if (j != drop)
            cols.push_back(data.column(j));
    Dataset out(cols, data.n_rows());
    for (std::size_t j = 0, dj = 0; j < data.n_cols(); ++j) {
        if (j == drop)
            continue;
        for (std::size_t i = 0; i < data.n_rows(); ++i)
            copy_cell(data, i, j, out, i, dj);
        ++dj;
    }
    return out;
}

// Copies every column of `part` into the same-named column of `full`,
// widening category lists where `part` added categories.
Dataset merge_columns(const Dataset& full, const Dataset& part) {
    std::vector<ColumnInfo> cols = full.columns();
    for (const auto& pc : part.columns())
        if (auto j = full.find_column(pc.name))
            cols[*j] = pc;
    Dataset out(cols, full.n_rows());
    for (std::size_t j = 0; j < full.n_cols(); ++j) {
        auto pj = part.find_column(full.column(j).name);
        const Dataset& src = pj ? part : full;
        const std::size_t sj = pj ? *pj : j;
        for (std::size_t i = 0; i < full.n_rows(); ++i)
            copy_cell(src, i, sj, out, i, j);
    }
    return out;
}

}  // namespace

std::string MaskSpec::describe() const {
    std::ostringstream ss;
    if (mode == Mode::one_per_row)
        ss << "one-per-row";
    else
        ss << "mcar(" << fraction << ")";
    ss << ", seed " << seed;
    return ss.str();
}

MaskResult apply_mask(const Dataset& data, const MaskSpec& spec) {
    if (spec.mode == MaskSpec::Mode::fraction_mcar && !(spec.fraction > 0.0 && spec.fraction < 1.0))
        throw InvalidArgument("mask fraction must lie in (0, 1)");
    std::vector<std::uint8_t> eligible(data.n_cols(), 1);
    for (const auto& name : spec.exclude) {
        auto j = data.find_column(name);
        if (!j)
            throw SchemaError("unknown column '" + name + "' in mask exclusions");
        eligible[*j] = 0;
    }

    MaskResult out{data, {}, 0};
    RandomStream rng = RandomStream::derive(spec.seed, kMaskStream);
    std::vector<std::size_t> observed;
    observed.reserve(data.n_cols());

    auto mask = [&](std::size_t i, std::size_t j) {
        MaskedCell cell{i, j, 0.0, 0};
        if (data.column(j).kind.is_numeric())
            cell.numeric = data.numeric(i, j);
        else
            cell.code = data.code(i, j);
        out.truth.push_back(cell);
        out.masked.set_missing(i, j);
    };

    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        observed.clear();
        for (std::size_t j = 0; j < data.n_cols(); ++j)
            if (eligible[j] && !data.is_missing(i, j))
                observed.push_back(j);
        out.candidates += observed.size();
        if (spec.mode == MaskSpec::Mode::one_per_row) {
            if (!observed.empty())
                mask(i, observed[static_cast<std::size_t>(rng.uniform_index(observed.size()))]);
        } else {
            for (std::size_t j : observed)
                if (rng.uniform() < spec.fraction)
                    mask(i, j);
        }
    }
    if (out.truth.empty())
        throw NothingToMask();
    return out;
}

Dataset median_impute(const Dataset& data, const std::vector<ColumnStats>& stats, std::vector<std::size_t>* unfilled) {
    if (stats.size() != data.n_cols())
        throw InvalidArgument("statistics do not match the dataset");
    Dataset out = data;
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (stats[j].empty()) {
            if (unfilled)
                unfilled->push_back(j);
            continue;
        }
        const bool numeric = data.column(j).kind.is_numeric();
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            if (!data.is_missing(i, j))
                continue;
            if (numeric)
                out.set_numeric(i, j, stats[j].numeric.median);
            else
                out.set_code(i, j, stats[j].categorical.mode);
        }
    }
    return out;
}

ImputationScore score_imputation(const Dataset& imputed, const Dataset& truth_source,
                                 const std::vector<MaskedCell>& truth) {
    ImputationScore score;
    double sq = 0.0;
    std::size_t correct = 0;
    for (const auto& cell : truth) {
        const auto& info = truth_source.column(cell.col);
        auto j = imputed.find_column(info.name);
        if (!j)
            throw ColumnMismatch("imputed data lacks column '" + info.name + "'", info.name);
        if (imputed.is_missing(cell.row, *j))
            throw InvalidArgument("masked cell in column '" + info.name + "' was not imputed");
        if (info.kind.is_numeric()) {
            const double d = imputed.numeric(cell.row, *j) - cell.numeric;
            sq += d * d;
            ++score.n_numeric;
        } else {
            const auto& got = imputed.column(*j).kind.categories[static_cast<std::size_t>(imputed.code(cell.row, *j))];
            if (got == info.kind.categories[static_cast<std::size_t>(cell.code)])
                ++correct;
            ++score.n_categorical;
        }
    }
    score.rmse = score.n_numeric ? std::sqrt(sq / static_cast<double>(score.n_numeric)) : kNaN;
    score.accuracy = score.n_categorical ? static_cast<double>(correct) / static_cast<double>(score.n_categorical)
                                         : kNaN;
    return score;
}

std::vector<std::size_t> make_folds(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n_rows)
        throw InvalidArgument("fold count must lie in [2, n_rows]");
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream rng = RandomStream::derive(seed, kFoldStream);
    rng.choose_front(std::span<std::size_t>(order), n_rows);
    std::vector<std::size_t> fold(n_rows);
    for (std::size_t pos = 0; pos < n_rows; ++pos)
        fold[order[pos]] = pos * k / n_rows;
    return fold;
}

CvResult ols_cv_rmse(const Dataset& data, std::string_view target, std::size_t k, std::uint64_t seed) {
    return ols_cv_rmse(data, target, make_folds(data.n_rows(), k, seed), k);
}

CvResult ols_cv_rmse(const Dataset& data, std::string_view target, const std::vector<std::size_t>& folds,
                     std::size_t k) {
    auto t = data.find_column(target);
    if (!t)
        throw SchemaError("unknown target column '" + std::string(target) + "'");
    if (!data.column(*t).kind.is_numeric())
        throw InvalidArgument("target column '" + std::string(target) + "' must be numeric");
    if (folds.size() != data.n_rows())
        throw InvalidArgument("fold assignment does not cover every row");
    for (std::size_t j = 0; j < data.n_cols(); ++j)
        for (std::size_t i = 0; i < data.n_rows(); ++i)
            if (data.is_missing(i, j))
                throw InvalidArgument("regression input has missing values in column '" + data.column(j).name + "'");

    // Raw design without intercept: numeric columns as-is, categorical
    // columns as indicators for every level but the first.
    const std::size_t n = data.n_rows();
    std::vector<std::pair<std::size_t, std::int32_t>> features;  // (column, level or -1)
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (j == *t)
            continue;
        const auto& kind = data.column(j).kind;
        if (kind.is_numeric())
            features.emplace_back(j, -1);
        else
            for (std::size_t c = 1; c < kind.n_categories(); ++c)
                features.emplace_back(j, static_cast<std::int32_t>(c));
    }
    const auto q = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), q);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        y(r) = data.numeric(i, *t);
        for (Eigen::Index f = 0; f < q; ++f) {
            const auto [col, level] = features[static_cast<std::size_t>(f)];
            x(r, f) = level < 0 ? data.numeric(i, col) : (data.code(i, col) == level ? 1.0 : 0.0);
        }
    }

    CvResult out;
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < n; ++i)
            (folds[i] == fold ? test : train).push_back(static_cast<Eigen::Index>(i));
        if (test.empty() || train.empty())
            throw InvalidArgument("empty fold in cross-validation");

        Eigen::MatrixXd xt = x(train, Eigen::all);
        Eigen::VectorXd yt = y(train);
        // Standardize on the training part; the intercept is the target mean.
        Eigen::RowVectorXd mu = xt.colwise().mean();
        Eigen::RowVectorXd sd = ((xt.rowwise() - mu).array().square().colwise().mean()).sqrt();
        for (Eigen::Index f = 0; f < q; ++f)
            if (!(sd(f) > 0.0))
                sd(f) = 1.0;
        xt = (xt.rowwise() - mu).array().rowwise() / sd.array();
        const double y_mean = yt.mean();
        Eigen::VectorXd yc = yt.array() - y_mean;

        Eigen::MatrixXd gram = xt.transpose() * xt;
        gram.diagonal().array() += kRidgeJitter;
        Eigen::LDLT<Eigen::MatrixXd> solver(gram);
        Eigen::VectorXd beta = solver.solve(xt.transpose() * yc);
        if (solver.info() != Eigen::Success || !beta.allFinite())
            throw SingularDesign("least-squares system could not be solved");

        Eigen::MatrixXd xs = (x(test, Eigen::all).rowwise() - mu).array().rowwise() / sd.array();
        Eigen::VectorXd pred = (xs * beta).array() + y_mean;
        const double mse = (pred - y(test)).squaredNorm() / static_cast<double>(test.size());
        out.fold_rmse.push_back(std::sqrt(mse));
    }
    out.mean_rmse = std::accumulate(out.fold_rmse.begin(), out.fold_rmse.end(), 0.0) /
                    static_cast<double>(out.fold_rmse.size());
    return out;
}

bool is_known_method(std::string_view name) {
    return name == "median" || name == "full-data" || name == "faircut" || name == "faircut-large" ||
           name == "faircut-mid" || name == "faircut-small";
}

EvalReport run_benchmark(const Dataset& data, std::string_view target, const MaskSpec& mask,
                         const BenchmarkOptions& options) {
    auto t = data.find_column(target);
    if (!t)
        throw SchemaError("unknown target column '" + std::string(target) + "'");
    for (const auto& m : options.methods)
        if (!is_known_method(m))
            throw InvalidArgument("unknown method '" + m + "'");

    EvalReport report;
    report.dataset = options.dataset_name;
    report.mask = mask;
    MaskSpec spec = mask;
    if (std::find(spec.exclude.begin(), spec.exclude.end(), target) == spec.exclude.end())
        spec.exclude.emplace_back(target);
    report.mask = spec;

    const MaskResult masked = apply_mask(data, spec);
    report.n_masked = masked.truth.size();
    const auto folds = make_folds(data.n_rows(), options.folds, options.seed);

    for (const auto& name : options.methods) {
        MethodResult res;
        res.name = name;
        if (name == "full-data") {
            res.imputation.rmse = kNaN;
            res.imputation.accuracy = kNaN;
            res.cv = ols_cv_rmse(data, target, folds, options.folds);
            report.methods.push_back(std::move(res));
            continue;
        }

        Dataset imputed;
        if (name == "median") {
            auto start = std::chrono::steady_clock::now();
            const auto stats = compute_stats(masked.masked);
            res.fit_s = seconds_since(start);
            start = std::chrono::steady_clock::now();
            imputed = median_impute(masked.masked, stats);
            res.impute_s = seconds_since(start);
        } else {
            ForestParams params;
            if (name == "faircut")
                params = options.custom_params.value_or(ForestParams::from_preset(Preset::large));
            else
                params = ForestParams::from_preset(*parse_preset(name.substr(std::string_view("faircut-").size())));
            params.seed = options.seed;
            const Dataset features = drop_column(masked.masked, *t);
            auto start = std::chrono::steady_clock::now();
            const Forest forest = fit(features, params, options.run);
            res.fit_s = seconds_since(start);
            start = std::chrono::steady_clock::now();
            const Dataset filled = impute_dataset(forest, features, options.run);
            res.impute_s = seconds_since(start);
            imputed = merge_columns(masked.masked, filled);
        }
        res.imputation = score_imputation(imputed, data, masked.truth);
        res.cv = ols_cv_rmse(imputed, target, folds, options.folds);
        report.methods.push_back(std::move(res));
    }
    return report;
}

}  // namespace faircut
