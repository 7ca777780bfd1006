#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "faircut/csv.hpp"
#include "faircut/errors.hpp"
#include "faircut/eval.hpp"
#include "synthetic.hpp"

using namespace faircut;

namespace {

// Dense Gaussian elimination with partial pivoting; solves A x = b.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k)
                a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k)
            s -= a[c][k] * x[k];
        x[c] = s / a[c][c];
    }
    return x;
}

// Held-out RMSE of ordinary least squares with intercept, via the raw normal
// equations on an explicit design.
double ols_fold_rmse(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     const std::vector<std::size_t>& folds, std::size_t fold) {
    const std::size_t q = x[0].size() + 1;
    std::vector<std::vector<double>> xtx(q, std::vector<double>(q, 0.0));
    std::vector<double> xty(q, 0.0);
    auto row = [&](std::size_t i) {
        std::vector<double> r{1.0};
        r.insert(r.end(), x[i].begin(), x[i].end());
        return r;
    };
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (folds[i] == fold)
            continue;
        const auto r = row(i);
        for (std::size_t a = 0; a < q; ++a) {
            xty[a] += r[a] * y[i];
            for (std::size_t b = 0; b < q; ++b)
                xtx[a][b] += r[a] * r[b];
        }
    }
    const auto beta = solve(xtx, xty);
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (folds[i] != fold)
            continue;
        const auto r = row(i);
        double pred = 0.0;
        for (std::size_t a = 0; a < q; ++a)
            pred += r[a] * beta[a];
        sq += (pred - y[i]) * (pred - y[i]);
        ++n;
    }
    return std::sqrt(sq / static_cast<double>(n));
}

}  // namespace

TEST_CASE("one-per-row mask") {
    const auto data = synth::mixed(500, 1);
    const auto m = apply_mask(data, MaskSpec::one_per_row(3));
    CHECK(m.truth.size() == data.n_rows());
    CHECK(m.masked.count_missing() == data.n_rows());
    std::set<std::size_t> rows;
    for (const auto& c : m.truth) {
        CHECK(rows.insert(c.row).second);
        CHECK(m.masked.is_missing(c.row, c.col));
        if (data.column(c.col).kind.is_numeric())
            CHECK(c.numeric == data.numeric(c.row, c.col));
        else
            CHECK(c.code == data.code(c.row, c.col));
    }
}

TEST_CASE("mask leaves excluded and already-missing cells alone") {
    const auto data = synth::punch_holes(synth::uniform(400, 4, 1), 0.3, 2);
    MaskSpec spec = MaskSpec::mcar(0.5, 4);
    spec.exclude = {"x2"};
    const auto m = apply_mask(data, spec);
    std::size_t observed = 0;
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        for (std::size_t j = 0; j < data.n_cols(); ++j)
            observed += j != 2 && !data.is_missing(i, j);
    CHECK(m.candidates == observed);
    for (const auto& c : m.truth) {
        CHECK(c.col != 2);
        CHECK(!data.is_missing(c.row, c.col));
    }
    CHECK(m.masked.count_missing() == data.count_missing() + m.truth.size());
    CHECK(apply_mask(data, spec).truth.size() == m.truth.size());

    CHECK_THROWS_AS(apply_mask(data, MaskSpec::mcar(0.0, 1)), InvalidArgument);
    CHECK_THROWS_AS(apply_mask(data, MaskSpec::mcar(1.0, 1)), InvalidArgument);
    spec.exclude = {"nope"};
    CHECK_THROWS_AS(apply_mask(data, spec), SchemaError);
    Dataset empty(synth::numeric_columns(2), 3);
    CHECK_THROWS_AS(apply_mask(empty, MaskSpec::one_per_row(1)), NothingToMask);
}

TEST_CASE("median imputation and scoring") {
    const auto data = parse_csv("v,c\n1,a\n2,b\n10,b\n,\n");
    const auto out = median_impute(data, compute_stats(data));
    CHECK(out.numeric(3, 0) == 2.0);
    CHECK(out.code(3, 1) == 1);

    const auto truth_src = parse_csv("v,c\n1,a\n2,b\n10,b\n5,a\n");
    const std::vector<MaskedCell> truth{{3, 0, 5.0, 0}, {3, 1, 0.0, 0}};
    const auto s = score_imputation(out, truth_src, truth);
    CHECK(s.rmse == doctest::Approx(3.0));
    CHECK(s.accuracy == 0.0);
    CHECK(s.n_numeric == 1);
    CHECK(s.n_categorical == 1);

    std::vector<std::size_t> unfilled;
    Dataset blank(synth::numeric_columns(1), 2);
    median_impute(blank, compute_stats(blank), &unfilled);
    CHECK(unfilled == std::vector<std::size_t>{0});
}

TEST_CASE("folds are balanced and deterministic") {
    const auto f = make_folds(103, 10, 5);
    std::vector<std::size_t> size(10, 0);
    for (auto k : f)
        ++size[k];
    for (auto s : size) {
        CHECK(s >= 10);
        CHECK(s <= 11);
    }
    CHECK(make_folds(103, 10, 5) == f);
    CHECK(make_folds(103, 10, 6) != f);
    CHECK_THROWS_AS(make_folds(5, 10, 1), InvalidArgument);
}

TEST_CASE("cross-validated OLS matches the normal equations") {
    RandomStream rng(12);
    const std::size_t n = 240;
    Dataset d({{"a", ColumnKind::numeric()},
               {"g", ColumnKind::categorical({"u", "v", "w"})},
               {"b", ColumnKind::numeric()},
               {"y", ColumnKind::numeric()}},
              n);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.normal() * 100.0 + 50.0, b = rng.uniform();
        const auto g = static_cast<std::int32_t>(rng.uniform_index(3));
        const double t = 0.02 * a - 3.0 * b + (g == 2 ? 1.5 : 0.0) + rng.normal();
        d.set_numeric(i, 0, a);
        d.set_code(i, 1, g);
        d.set_numeric(i, 2, b);
        d.set_numeric(i, 3, t);
        x.push_back({a, g == 1 ? 1.0 : 0.0, g == 2 ? 1.0 : 0.0, b});
        y.push_back(t);
    }
    const auto folds = make_folds(n, 5, 9);
    const auto cv = ols_cv_rmse(d, "y", folds, 5);
    REQUIRE(cv.fold_rmse.size() == 5);
    double mean = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(cv.fold_rmse[k] == doctest::Approx(ols_fold_rmse(x, y, folds, k)).epsilon(1e-8));
        mean += cv.fold_rmse[k] / 5.0;
    }
    CHECK(cv.mean_rmse == doctest::Approx(mean));

    CHECK_THROWS_AS(ols_cv_rmse(d, "g", folds, 5), InvalidArgument);
    CHECK_THROWS_AS(ols_cv_rmse(d, "nope", folds, 5), SchemaError);
    Dataset holes = d;
    holes.set_missing(0, 0);
    CHECK_THROWS_AS(ols_cv_rmse(holes, "y", folds, 5), InvalidArgument);
}

TEST_CASE("benchmark runs every method on the same mask") {
    auto data = synth::mixed(300, 3);
    BenchmarkOptions opts;
    opts.methods = {"median", "full-data", "faircut"};
    opts.folds = 4;
    opts.seed = 2;
    ForestParams p = ForestParams::from_preset(Preset::mid);
    p.n_trees = 10;
    opts.custom_params = p;
    opts.dataset_name = "mixed";
    const auto report = run_benchmark(data, "x2", MaskSpec::mcar(0.1, 7), opts);
    REQUIRE(report.methods.size() == 3);
    CHECK(report.dataset == "mixed");
    CHECK(std::isnan(report.methods[1].imputation.rmse));
    CHECK(report.methods[0].imputation.n_numeric == report.methods[2].imputation.n_numeric);
    CHECK(report.methods[0].imputation.n_numeric + report.methods[0].imputation.n_categorical == report.n_masked);
    for (const auto& m : report.methods)
        CHECK(std::isfinite(m.cv.mean_rmse));

    const auto doc = nlohmann::json::parse(report_json(report));
    CHECK(doc["methods"].size() == 3);
    CHECK(doc["methods"][1]["imp_rmse"].is_null());
    CHECK(doc["mask"]["n_masked"] == report.n_masked);
    CHECK(report_json(report, false).find("fit_s") == std::string::npos);
    CHECK(report_table(report).find("full-data") != std::string::npos);

    opts.methods = {"knn"};
    CHECK_THROWS_AS(run_benchmark(data, "x2", MaskSpec::mcar(0.1, 7), opts), InvalidArgument);
}
