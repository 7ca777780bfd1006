// faircut: fit, impute and evaluate fair-cut forest imputation models.
//
// Exit codes: 0 success, 1 other failure, 2 usage or validation error,
// 3 data/model column mismatch.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "faircut/csv.hpp"
#include "faircut/errors.hpp"
#include "faircut/eval.hpp"
#include "faircut/forest.hpp"

namespace {

using namespace faircut;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMismatch = 3;

struct UsageError : Error {
    using Error::Error;
};

struct ForestFlags {
    std::string preset = "large";
    std::optional<long long> ntrees, ndim, ntry, min_obs, subsample;
    std::optional<double> min_gain;
    std::string max_depth;  // empty: preset value; "auto": 3*ceil(log2 n)
    std::uint64_t seed = 1;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--preset", preset, "Hyperparameter preset: large, mid or small")->capture_default_str();
        cmd.add_option("--ntrees", ntrees, "Number of trees");
        cmd.add_option("--ndim", ndim, "Columns per hyperplane");
        cmd.add_option("--ntry", ntry, "Hyperplanes tried per node");
        cmd.add_option("--max-depth", max_depth, "Depth limit, or 'auto' for 3*ceil(log2 n)");
        cmd.add_option("--min-obs", min_obs, "Observed values a node needs for its own imputation");
        cmd.add_option("--min-gain", min_gain, "Minimum gain for a split");
        cmd.add_option("--subsample", subsample, "Rows per tree, drawn without replacement");
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
    }

    ForestParams resolve(std::optional<std::size_t> n_rows = std::nullopt) const {
        auto p = parse_preset(preset);
        if (!p)
            throw UsageError("unknown preset '" + preset + "' (expected large, mid or small)");
        ForestParams params = ForestParams::from_preset(*p);
        auto positive = [](long long v, const char* flag) {
            if (v < 1)
                throw UsageError(std::string(flag) + " must be >= 1");
            return static_cast<std::size_t>(v);
        };
        if (ntrees)
            params.n_trees = positive(*ntrees, "--ntrees");
        if (ndim)
            params.n_dims = positive(*ndim, "--ndim");
        if (ntry)
            params.n_trials = positive(*ntry, "--ntry");
        if (min_obs)
            params.min_obs = positive(*min_obs, "--min-obs");
        if (min_gain)
            params.min_gain = *min_gain;
        if (subsample) {
            params.subsample = positive(*subsample, "--subsample");
            if (n_rows && *params.subsample > *n_rows)
                throw UsageError("--subsample exceeds the number of rows (" + std::to_string(*n_rows) + ")");
        }
        if (max_depth == "auto") {
            params.max_depth.reset();
            params.depth_multiplier = 3;
        } else if (!max_depth.empty()) {
            long long d = 0;
            std::istringstream in(max_depth);
            if (!(in >> d) || !in.eof() || d < 1)
                throw UsageError("--max-depth must be a positive integer or 'auto'");
            params.max_depth = static_cast<std::size_t>(d);
        }
        params.seed = seed;
        try {
            params.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        return params;
    }
};

int resolve_threads(const std::string& flag) {
    std::string value = flag;
    if (value.empty()) {
        if (const char* env = std::getenv("FAIRCUT_THREADS"))
            value = env;
    }
    if (value.empty() || value == "auto")
        return 0;
    try {
        std::size_t used = 0;
        int n = std::stoi(value, &used);
        if (used != value.size() || n < 1)
            throw UsageError("");
        return n;
    } catch (const std::exception&) {
        throw UsageError("--threads must be a positive integer or 'auto'");
    }
}

CsvOptions csv_options(const std::string& schema_path) {
    CsvOptions opts;
    if (!schema_path.empty())
        opts.schema = read_schema_file(schema_path);
    return opts;
}

struct FitConfig {
    std::string input, model, schema, threads;
    ForestFlags forest;
};

int cmd_fit(const FitConfig& cfg) {
    // Flags are validated before any data is touched.
    cfg.forest.resolve();
    RunOptions run{Execution::parallel, resolve_threads(cfg.threads)};

    const Dataset data = read_csv(cfg.input, csv_options(cfg.schema));
    const ForestParams params = cfg.forest.resolve(data.n_rows());

    const auto start = std::chrono::steady_clock::now();
    const Forest forest = fit(data, params, run);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save(forest, cfg.model);

    std::cout << "rows:            " << data.n_rows() << "\n"
              << "columns:         " << data.n_cols() << "\n"
              << "trees:           " << forest.trees().size() << "\n"
              << "depth limit:     " << forest.tree_params().max_depth << "\n"
              << "max depth:       " << forest.max_observed_depth() << "\n"
              << "fit seconds:     " << seconds << "\n"
              << "model:           " << cfg.model << "\n";
    return kExitOk;
}

struct ImputeConfig {
    std::string input, model, output, threads;
};

int cmd_impute(const ImputeConfig& cfg) {
    RunOptions run{Execution::parallel, resolve_threads(cfg.threads)};
    const Forest forest = load(cfg.model);

    // Read the input with the training schema so kinds and codes line up.
    CsvOptions opts;
    opts.strict_schema = false;
    for (const auto& c : forest.columns()) {
        opts.schema[c.name] = c.kind.type;
        if (c.kind.is_categorical())
            opts.categories[c.name] = c.kind.categories;
    }
    const Dataset data = read_csv(cfg.input, opts);
    const Dataset imputed = impute_dataset(forest, data, run);
    write_csv(imputed, cfg.output);
    std::cout << "imputed " << (data.count_missing() - imputed.count_missing()) << " cells in "
              << data.n_rows() << " rows -> " << cfg.output << "\n";
    return kExitOk;
}

struct EvalConfig {
    std::string input, target, mask = "0.1", methods = "median,faircut", report, schema, threads;
    std::size_t folds = 10;
    ForestFlags forest;
};

int cmd_eval(const EvalConfig& cfg) {
    MaskSpec mask;
    mask.seed = cfg.forest.seed;
    if (cfg.mask == "one-per-row") {
        mask.mode = MaskSpec::Mode::one_per_row;
    } else {
        mask.mode = MaskSpec::Mode::fraction_mcar;
        try {
            std::size_t used = 0;
            mask.fraction = std::stod(cfg.mask, &used);
            if (used != cfg.mask.size())
                throw UsageError("");
        } catch (const std::exception&) {
            throw UsageError("--mask must be a fraction in (0, 1) or 'one-per-row'");
        }
        if (!(mask.fraction > 0.0 && mask.fraction < 1.0))
            throw UsageError("--mask must be a fraction in (0, 1) or 'one-per-row'");
    }
    BenchmarkOptions opts;
    std::stringstream ss(cfg.methods);
    for (std::string m; std::getline(ss, m, ',');) {
        if (!is_known_method(m))
            throw UsageError("unknown method '" + m + "'");
        opts.methods.push_back(m);
    }
    if (opts.methods.empty())
        throw UsageError("--methods is empty");
    if (cfg.folds < 2)
        throw UsageError("--folds must be >= 2");
    opts.folds = cfg.folds;
    opts.seed = cfg.forest.seed;
    opts.run = RunOptions{Execution::parallel, resolve_threads(cfg.threads)};
    opts.dataset_name = std::filesystem::path(cfg.input).filename().string();
    // --preset and the forest flags configure the "faircut" method.
    opts.custom_params = cfg.forest.resolve();

    const Dataset data = read_csv(cfg.input, csv_options(cfg.schema));
    const EvalReport report = run_benchmark(data, cfg.target, mask, opts);
    std::cout << report_table(report);
    if (!cfg.report.empty())
        write_file_atomic(cfg.report, report_json(report));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Missing-value imputation with fair-cut forests"};
    app.require_subcommand(1);

    FitConfig fit_cfg;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model on a CSV file and save it");
    fit_cmd->add_option("--input", fit_cfg.input, "Training CSV")->required();
    fit_cmd->add_option("--model", fit_cfg.model, "Output model file (JSON)")->required();
    fit_cmd->add_option("--schema", fit_cfg.schema, "Column kind overrides, one name:kind per line");
    fit_cmd->add_option("--threads", fit_cfg.threads, "Worker threads or 'auto' (env FAIRCUT_THREADS)");
    fit_cfg.forest.add_to(*fit_cmd);

    ImputeConfig imp_cfg;
    auto* imp_cmd = app.add_subcommand("impute", "Fill missing cells of a CSV file with a saved model");
    imp_cmd->add_option("--input", imp_cfg.input, "CSV with missing cells")->required();
    imp_cmd->add_option("--model", imp_cfg.model, "Model file written by 'fit'")->required();
    imp_cmd->add_option("--output", imp_cfg.output, "Imputed CSV")->required();
    imp_cmd->add_option("--threads", imp_cfg.threads, "Worker threads or 'auto' (env FAIRCUT_THREADS)");

    EvalConfig eval_cfg;
    auto* eval_cmd = app.add_subcommand("eval", "Mask cells, impute and compare methods");
    eval_cmd->add_option("--input", eval_cfg.input, "Complete CSV")->required();
    eval_cmd->add_option("--target", eval_cfg.target, "Numeric regression target")->required();
    eval_cmd->add_option("--mask", eval_cfg.mask, "Fraction of cells to mask, or 'one-per-row'")
        ->capture_default_str();
    eval_cmd->add_option("--methods", eval_cfg.methods,
                         "Comma-separated: median, full-data, faircut, faircut-large, faircut-mid, faircut-small")
        ->capture_default_str();
    eval_cmd->add_option("--folds", eval_cfg.folds, "Cross-validation folds")->capture_default_str();
    eval_cmd->add_option("--report", eval_cfg.report, "Write the report as JSON to this path");
    eval_cmd->add_option("--schema", eval_cfg.schema, "Column kind overrides, one name:kind per line");
    eval_cmd->add_option("--threads", eval_cfg.threads, "Worker threads or 'auto' (env FAIRCUT_THREADS)");
    eval_cfg.forest.add_to(*eval_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit_cmd)
            return cmd_fit(fit_cfg);
        if (*imp_cmd)
            return cmd_impute(imp_cfg);
        return cmd_eval(eval_cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ColumnMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
