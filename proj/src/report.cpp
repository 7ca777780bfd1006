#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "faircut/eval.hpp"

namespace faircut {

namespace {

nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

std::string cell(double v, int precision = 4) {
    if (!std::isfinite(v))
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace

std::string report_json(const EvalReport& report, bool include_timings) {
    nlohmann::ordered_json doc;
    doc["dataset"] = report.dataset;
    doc["mask"] = {
        {"mode", report.mask.mode == MaskSpec::Mode::one_per_row ? "one-per-row" : "fraction"},
        {"fraction", report.mask.mode == MaskSpec::Mode::one_per_row ? nlohmann::json(nullptr)
                                                                     : nlohmann::json(report.mask.fraction)},
        {"seed", report.mask.seed},
        {"n_masked", report.n_masked},
    };
    auto methods = nlohmann::ordered_json::array();
    for (const auto& m : report.methods) {
        nlohmann::ordered_json row;
        row["name"] = m.name;
        if (include_timings) {
            row["fit_s"] = m.fit_s;
            row["impute_s"] = m.impute_s;
        }
        row["imp_rmse"] = number_or_null(m.imputation.rmse);
        row["cat_acc"] = number_or_null(m.imputation.accuracy);
        row["cv_rmse_mean"] = number_or_null(m.cv.mean_rmse);
        auto folds = nlohmann::ordered_json::array();
        for (double f : m.cv.fold_rmse)
            folds.push_back(number_or_null(f));
        row["cv_rmse_folds"] = folds;
        methods.push_back(row);
    }
    doc["methods"] = methods;
    return doc.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "dataset: " << (report.dataset.empty() ? "-" : report.dataset) << "\n"
        << "mask:    " << report.mask.describe() << " (" << report.n_masked << " cells)\n\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %9s %9s %9s %8s %12s\n", "method", "fit_s", "impute_s", "imp_rmse",
                  "cat_acc", "cv_rmse_mean");
    out << line;
    for (const auto& m : report.methods) {
        std::snprintf(line, sizeof(line), "%-15s %9s %9s %9s %8s %12s\n", m.name.c_str(), cell(m.fit_s, 3).c_str(),
                      cell(m.impute_s, 3).c_str(), cell(m.imputation.rmse).c_str(),
                      cell(m.imputation.accuracy).c_str(), cell(m.cv.mean_rmse).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace faircut
