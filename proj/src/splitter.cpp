#include "faircut/splitter.hpp"

#include <algorithm>

#include "faircut/errors.hpp"

namespace faircut {

ColumnMatrix::ColumnMatrix(const Dataset& data) : n_rows_(data.n_rows()) {
    const std::size_t p = data.n_cols();
    types_.resize(p);
    n_categories_.resize(p, 0);
    values_.resize(p);
    codes_.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto& kind = data.column(j).kind;
        types_[j] = kind.type;
        auto missing = data.missing_column(j);
        if (kind.is_numeric()) {
            auto src = data.numeric_column(j);
            auto& dst = values_[j];
            dst.resize(n_rows_);
            for (std::size_t i = 0; i < n_rows_; ++i)
                dst[i] = missing[i] ? std::numeric_limits<double>::quiet_NaN() : src[i];
        } else {
            n_categories_[j] = kind.n_categories();
            auto src = data.code_column(j);
            auto& dst = codes_[j];
            dst.resize(n_rows_);
            for (std::size_t i = 0; i < n_rows_; ++i)
                dst[i] = missing[i] ? kMissingCode : src[i];
        }
    }
}

ColumnMatrix::ColumnMatrix(std::size_t n_rows, std::vector<ColumnType> types,
                           std::vector<std::size_t> n_categories, std::vector<std::vector<double>> values,
                           std::vector<std::vector<std::int32_t>> codes)
    : n_rows_(n_rows), types_(std::move(types)), n_categories_(std::move(n_categories)),
      values_(std::move(values)), codes_(std::move(codes)) {
    const std::size_t p = types_.size();
    if (n_categories_.size() != p || values_.size() != p || codes_.size() != p)
        throw InvalidArgument("column matrix parts disagree on the column count");
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t len = types_[j] == ColumnType::numeric ? values_[j].size() : codes_[j].size();
        if (len != n_rows_)
            throw InvalidArgument("column matrix column has the wrong length");
    }
}

NodeSummary summarize_node(const ColumnMatrix& data, std::span<const std::size_t> rows) {
    NodeSummary out;
    out.n_rows = rows.size();
    out.columns.resize(data.n_cols());
    std::vector<double> known;
    known.reserve(rows.size());
    std::vector<std::size_t> counts;

    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        auto& col = out.columns[j];
        col.type = data.type(j);
        if (data.type(j) == ColumnType::numeric) {
            known.clear();
            for (auto i : rows) {
                double x = data.numeric(i, j);
                if (!std::isnan(x))
                    known.push_back(x);
            }
            col.n_known = known.size();
            if (known.empty())
                continue;
            double sum = 0.0;
            double lo = known.front();
            double hi = known.front();
            for (double x : known) {
                sum += x;
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            col.mean = sum / static_cast<double>(known.size());
            double ss = 0.0;
            for (double x : known)
                ss += (x - col.mean) * (x - col.mean);
            col.std = std::sqrt(ss / static_cast<double>(known.size()));
            col.eligible = lo < hi && col.std > 0.0;
            if (col.eligible)
                col.median = median_inplace(known);
        } else {
            counts.assign(data.n_categories(j), 0);
            for (auto i : rows) {
                auto c = data.code(i, j);
                if (c >= 0)
                    ++counts[static_cast<std::size_t>(c)];
            }
            std::size_t distinct = 0;
            for (auto c : counts) {
                col.n_known += c;
                distinct += c > 0 ? 1 : 0;
            }
            col.eligible = distinct >= 2;
            col.proportions.assign(counts.size(), 0.0);
            if (col.n_known > 0)
                for (std::size_t c = 0; c < counts.size(); ++c)
                    col.proportions[c] = static_cast<double>(counts[c]) / static_cast<double>(col.n_known);
        }
        if (col.eligible)
            out.eligible.push_back(static_cast<std::uint32_t>(j));
    }
    return out;
}

Hyperplane draw_hyperplane(const NodeSummary& node, std::size_t m, RandomStream& rng) {
    if (!node.any_eligible())
        throw NoEligibleColumns();
    if (m == 0)
        throw InvalidArgument("hyperplane needs at least one column");

    std::vector<std::uint32_t> pool = node.eligible;
    const std::size_t k = std::min(m, pool.size());
    rng.choose_front(std::span<std::uint32_t>(pool), k);

    Hyperplane plane;
    plane.terms.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        auto& term = plane.terms[t];
        const auto& col = node.columns[pool[t]];
        term.column = pool[t];
        if (col.type == ColumnType::numeric) {
            term.type = ColumnType::numeric;
            term.coefficient = rng.normal() / col.std;
            term.center = col.mean;
            term.fill = col.median;
        } else {
            term.type = ColumnType::categorical;
            term.category_coefficients.resize(col.proportions.size());
            double expected = 0.0;
            for (std::size_t c = 0; c < col.proportions.size(); ++c) {
                term.category_coefficients[c] = rng.normal();
                expected += col.proportions[c] * term.category_coefficients[c];
            }
            term.fill = expected;
        }
    }
    return plane;
}

double pooled_gain(std::span<const double> sorted_y, std::size_t split_index) {
    const std::size_t n = sorted_y.size();
    if (n < 2 || split_index < 1 || split_index >= n)
        throw InvalidArgument("split index out of range");

    auto sd = [](std::span<const double> v) {
        double mean = 0.0;
        for (double x : v)
            mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v)
            ss += (x - mean) * (x - mean);
        return std::sqrt(ss / static_cast<double>(v.size()));
    };

    const double total = sd(sorted_y);
    if (!(total > 0.0))
        throw ZeroVariance();
    const double left = sd(sorted_y.first(split_index));
    const double right = sd(sorted_y.subspan(split_index));
    const double pooled = (static_cast<double>(split_index) * left +
                           static_cast<double>(n - split_index) * right) /
                          static_cast<double>(n);
    return (total - pooled) / total;
}

SplitResult best_split(std::span<const double> y, SplitWorkspace& ws) {
    const std::size_t n = y.size();
    if (n < 2)
        throw InvalidArgument("split search needs at least 2 values");

    auto& s = ws.sorted;
    s.assign(y.begin(), y.end());
    std::sort(s.begin(), s.end());
    if (s.front() == s.back())
        throw ZeroVariance();

    // Suffix deviations, accumulated right to left (Welford).
    ws.right_sd.resize(n + 1);
    {
        double mean = 0.0, m2 = 0.0;
        ws.right_sd[n] = 0.0;
        for (std::size_t i = n; i-- > 0;) {
            const double cnt = static_cast<double>(n - i);
            const double delta = s[i] - mean;
            mean += delta / cnt;
            m2 += delta * (s[i] - mean);
            ws.right_sd[i] = std::sqrt(std::max(m2, 0.0) / cnt);
        }
    }
    const double total_sd = ws.right_sd[0];
    if (!(total_sd > 0.0))
        throw ZeroVariance();

    // Prefix deviations left to right; gains only at distinct-value boundaries.
    ws.gains.assign(n, -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    {
        double mean = 0.0, m2 = 0.0;
        const double dn = static_cast<double>(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double cnt = static_cast<double>(i + 1);
            const double delta = s[i] - mean;
            mean += delta / cnt;
            m2 += delta * (s[i] - mean);
            if (s[i] == s[i + 1])
                continue;
            const double left_sd = std::sqrt(std::max(m2, 0.0) / cnt);
            const double pooled = (cnt * left_sd + (dn - cnt) * ws.right_sd[i + 1]) / dn;
            const double g = (total_sd - pooled) / total_sd;
            ws.gains[i + 1] = g;
            best = std::max(best, g);
        }
    }

    std::size_t split = 1;
    while (split < n && !(ws.gains[split] >= best - kGainTieTolerance))
        ++split;

    const double lo = s[split - 1];
    const double hi = s[split];
    double threshold = lo + (hi - lo) / 2.0;
    if (!(threshold < hi))
        threshold = lo;

    return SplitResult{threshold, ws.gains[split], split, n - split};
}

SplitResult best_split(std::span<const double> y) {
    SplitWorkspace ws;
    return best_split(y, ws);
}

std::vector<bool> partition_of(std::span<const double> y, double threshold) {
    std::vector<bool> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] <= threshold;
    return out;
}

}  // namespace faircut
