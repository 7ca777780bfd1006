// Acceptance checks on the California housing table (20,640 x 9 with the
// target MedHouseVal). The table is looked up in $FAIRCUT_CALIFORNIA_CSV,
// then data/california_housing.csv in the source tree; tools/fetch_california.py
// writes it. Exits 77 (skipped) when it is absent.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>

#include "faircut/csv.hpp"
#include "faircut/eval.hpp"

using namespace faircut;

namespace {

constexpr int kSkip = 77;

// Published 10% MCAR figures for linear regression and the full-data baseline.
constexpr double kPaperForestLarge = 0.816;
constexpr double kPaperMedian = 0.849;
constexpr double kPaperFullData = 0.742;

std::filesystem::path locate() {
    if (const char* env = std::getenv("FAIRCUT_CALIFORNIA_CSV"))
        return env;
    return std::filesystem::path(FAIRCUT_SOURCE_DIR) / "data" / "california_housing.csv";
}

void line(bool pass, const char* name, const std::string& detail) {
    std::printf("%s  %s: %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
}

}  // namespace

int main() {
    const auto path = locate();
    if (!std::filesystem::exists(path)) {
        const std::string why = "dataset not found at " + path.string() + " (run tools/fetch_california.py)";
        std::printf("SKIP  california housing reproduction: %s\n", why.c_str());
        std::printf("SKIP  california housing timing envelope: %s\n", why.c_str());
        return kSkip;
    }

    const Dataset data = read_csv(path);
    BenchmarkOptions opts;
    opts.methods = {"median", "full-data", "faircut-large"};
    opts.folds = 10;
    opts.seed = 1;
    opts.dataset_name = path.filename().string();
    const EvalReport report = run_benchmark(data, "MedHouseVal", MaskSpec::mcar(0.1, 1), opts);
    std::fputs(report_table(report).c_str(), stdout);

    const auto& median = report.methods[0];
    const auto& full = report.methods[1];
    const auto& forest = report.methods[2];
    const double rf = forest.cv.mean_rmse, rm = median.cv.mean_rmse, r0 = full.cv.mean_rmse;
    char buf[256];
    bool ok = true;

    const bool hard = rf <= rm;
    std::snprintf(buf, sizeof(buf), "forest-large %.4f <= median %.4f", rf, rm);
    line(hard, "california: forest no worse than median", buf);
    ok = ok && hard;

    const bool soft = std::abs(rf - kPaperForestLarge) <= 0.04 && std::abs(rm - kPaperMedian) <= 0.04;
    std::snprintf(buf, sizeof(buf), "forest-large %.4f vs %.3f, median %.4f vs %.3f (tolerance 0.04)", rf,
                  kPaperForestLarge, rm, kPaperMedian);
    line(soft, "california: RMSE near published values", buf);
    ok = ok && soft;

    const bool base = std::abs(r0 - kPaperFullData) <= 0.02;
    std::snprintf(buf, sizeof(buf), "full data %.4f vs %.3f (tolerance 0.02)", r0, kPaperFullData);
    line(base, "california: full-data baseline", buf);
    ok = ok && base;

    const unsigned cores = std::thread::hardware_concurrency();
    const bool fast = forest.fit_s <= 120.0 && forest.impute_s <= 10.0;
    std::snprintf(buf, sizeof(buf), "fit %.2f s (limit 120), impute %.2f s (limit 10) on %u cores", forest.fit_s,
                  forest.impute_s, cores);
    if (cores < 8) {
        std::printf("SKIP  california: timing envelope: needs >= 8 cores; measured %s\n", buf);
    } else {
        line(fast, "california: timing envelope", buf);
        ok = ok && fast;
    }
    return ok ? 0 : 1;
}
