// Times the serial reference kernels against the OpenMP ones on synthetic
// data and checks that both produce the same forest and imputations.

#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include "CLI11.hpp"

#include "faircut/csv.hpp"
#include "faircut/eval.hpp"
#include "faircut/forest.hpp"
#include "faircut/random.hpp"

using namespace faircut;

namespace {

Dataset make_data(std::size_t n, std::size_t p, std::uint64_t seed) {
    std::vector<ColumnInfo> cols;
    for (std::size_t j = 0; j < p; ++j)
        cols.push_back({"x" + std::to_string(j), ColumnKind::numeric()});
    Dataset d(cols, n);
    RandomStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = rng.normal();
        for (std::size_t j = 0; j < p; ++j)
            d.set_numeric(i, j, f * static_cast<double>(j + 1) + rng.normal());
    }
    return apply_mask(d, MaskSpec::mcar(0.1, seed)).masked;
}

template <typename F>
double best_of(int repeat, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
        const auto start = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs parallel kernel timings"};
    std::size_t rows = 5000, cols = 8, trees = 50;
    std::string preset = "mid";
    int threads = 0, repeat = 3;
    app.add_option("--rows", rows, "Rows of synthetic data")->capture_default_str();
    app.add_option("--cols", cols, "Numeric columns")->capture_default_str();
    app.add_option("--trees", trees, "Trees per forest")->capture_default_str();
    app.add_option("--preset", preset, "large, mid or small")->capture_default_str();
    app.add_option("--threads", threads, "OpenMP threads, 0 for the default")->capture_default_str();
    app.add_option("--repeat", repeat, "Runs per measurement; the fastest is reported")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const auto p = parse_preset(preset);
    if (!p) {
        std::fprintf(stderr, "unknown preset '%s'\n", preset.c_str());
        return 2;
    }
    ForestParams params = ForestParams::from_preset(*p);
    params.n_trees = trees;
    const Dataset data = make_data(rows, cols, 1);
    const RunOptions serial{Execution::serial, 0};
    const RunOptions parallel{Execution::parallel, threads};
    const int used = threads > 0 ? threads : omp_get_max_threads();

    Forest fs, fp;
    const double fit_serial = best_of(repeat, [&] { fs = fit(data, params, serial); });
    const double fit_parallel = best_of(repeat, [&] { fp = fit(data, params, parallel); });
    Dataset is, ip;
    const double imp_serial = best_of(repeat, [&] { is = impute_dataset(fs, data, serial); });
    const double imp_parallel = best_of(repeat, [&] { ip = impute_dataset(fs, data, parallel); });
    const bool same = fs == fp && format_csv(is) == format_csv(ip);

    std::printf("rows %zu, cols %zu, trees %zu, preset %s, threads %d\n", rows, cols, trees, preset.c_str(), used);
    std::printf("%-8s %10s %10s %8s\n", "kernel", "serial_s", "parallel_s", "speedup");
    std::printf("%-8s %10.3f %10.3f %8.2f\n", "fit", fit_serial, fit_parallel, fit_serial / fit_parallel);
    std::printf("%-8s %10.3f %10.3f %8.2f\n", "impute", imp_serial, imp_parallel, imp_serial / imp_parallel);
    std::printf("results identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
