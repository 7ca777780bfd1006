#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"

#include "faircut/errors.hpp"
#include "faircut/random.hpp"
#include "faircut/splitter.hpp"
#include "oracles.hpp"

using namespace faircut;

namespace {

// Random vector of length 2..max_len; half the time drawn from a small grid
// so ties are common.
std::vector<double> random_vector(RandomStream& rng, std::size_t max_len) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_index(max_len - 1));
    const bool tied = rng.uniform() < 0.5;
    const auto levels = 2 + rng.uniform_index(5);
    std::vector<double> y(n);
    for (auto& v : y)
        v = tied ? static_cast<double>(rng.uniform_index(levels)) : rng.normal() * 3.0 + 1.0;
    return y;
}

struct FakeRow {
    std::vector<double> x;
    std::vector<std::int32_t> c;
    double numeric(std::size_t col) const { return x[col]; }
    std::int32_t code(std::size_t col) const { return c[col]; }
};

}  // namespace

TEST_CASE("pooled_gain matches the two-pass formula") {
    const std::vector<double> y{1, 2, 2, 5, 9, 10};
    for (std::size_t k = 1; k < y.size(); ++k) {
        std::vector<double> l(y.begin(), y.begin() + static_cast<long>(k)), r(y.begin() + static_cast<long>(k), y.end());
        const double sd = oracle::two_pass_sd(y);
        const double want = (sd - (l.size() * oracle::two_pass_sd(l) + r.size() * oracle::two_pass_sd(r)) / 6.0) / sd;
        CHECK(pooled_gain(y, k) == doctest::Approx(want).epsilon(1e-14));
    }
    const std::vector<double> flat{3, 3, 3};
    CHECK_THROWS_AS(pooled_gain(flat, 1), ZeroVariance);
    CHECK_THROWS_AS(pooled_gain(y, 0), InvalidArgument);
    CHECK_THROWS_AS(pooled_gain(y, 6), InvalidArgument);
}

TEST_CASE("best_split agrees with brute force on random vectors") {
    RandomStream rng(20240611);
    SplitWorkspace ws;
    for (int trial = 0; trial < 3000; ++trial) {
        const auto y = random_vector(rng, 64);
        const auto want = oracle::best_split(y);
        if (!want) {
            CHECK_THROWS_AS(best_split(y, ws), ZeroVariance);
            continue;
        }
        const auto got = best_split(y, ws);
        CHECK(std::abs(got.gain - want->gain) <= 1e-9);
        CHECK(got.left_count == want->left_count);
        CHECK(got.left_count + got.right_count == y.size());
        const auto part = partition_of(y, got.threshold);
        for (std::size_t i = 0; i < y.size(); ++i)
            REQUIRE(part[i] == (y[i] <= want->left_max));
    }
}

TEST_CASE("best_split properties") {
    RandomStream rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        auto y = random_vector(rng, 40);
        if (!oracle::best_split(y))
            continue;
        const auto s = best_split(y);
        // Gain is a fraction of the parent deviation.
        CHECK(s.gain >= -1e-12);
        CHECK(s.gain <= 1.0 + 1e-12);
        // Threshold separates the two sides strictly.
        std::vector<double> sorted = y;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted[s.left_count - 1] <= s.threshold);
        CHECK(sorted[s.left_count] > s.threshold);

        // Order of the input does not matter.
        std::vector<double> shuffled = y;
        rng.choose_front(std::span<double>(shuffled), shuffled.size());
        const auto s2 = best_split(shuffled);
        CHECK(s2.left_count == s.left_count);
        CHECK(s2.gain == doctest::Approx(s.gain).epsilon(1e-12));

        // Positive affine maps keep the cut.
        std::vector<double> scaled(y.size());
        std::transform(y.begin(), y.end(), scaled.begin(), [](double v) { return 10.0 * v - 5.0; });
        const auto s3 = best_split(scaled);
        CHECK(s3.left_count == s.left_count);
        CHECK(std::abs(s3.gain - s.gain) <= 1e-9);
    }
}

TEST_CASE("best_split edge cases") {
    CHECK_THROWS_AS(best_split(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(best_split(std::vector<double>{4.0}), InvalidArgument);
    const auto two = best_split(std::vector<double>{2.0, 1.0});
    CHECK(two.left_count == 1);
    CHECK(two.gain == doctest::Approx(1.0));
    CHECK(two.threshold == doctest::Approx(1.5));

    // Adjacent doubles: the midpoint must still fall below the upper value.
    const double a = 1.0, b = std::nextafter(1.0, 2.0);
    const auto tight = best_split(std::vector<double>{a, b, a, b});
    const auto part = partition_of(std::vector<double>{a, b}, tight.threshold);
    CHECK(part[0]);
    CHECK(!part[1]);

    // Symmetric ties resolve to the smallest left side.
    const auto sym = best_split(std::vector<double>{0, 1, 1, 2});
    CHECK(sym.left_count == 1);
}

TEST_CASE("summarize_node and draw_hyperplane") {
    // col 0 numeric with one missing, col 1 categorical, col 2 constant.
    const std::size_t n = 6;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ColumnMatrix data(n, {ColumnType::numeric, ColumnType::categorical, ColumnType::numeric}, {0, 3, 0},
                      {{1, 2, 3, nan, 5, 10}, {}, {7, 7, 7, 7, 7, 7}},
                      {{}, {0, 1, 1, kMissingCode, 2, 1}, {}});
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto s = summarize_node(data, rows);
    CHECK(s.n_rows == n);
    CHECK(s.eligible == std::vector<std::uint32_t>{0, 1});
    CHECK(s.columns[0].n_known == 5);
    CHECK(s.columns[0].mean == doctest::Approx(4.2));
    CHECK(s.columns[0].median == 3.0);
    CHECK(s.columns[0].std == doctest::Approx(oracle::two_pass_sd({1, 2, 3, 5, 10})));
    CHECK(s.columns[1].proportions[1] == doctest::Approx(0.6));
    CHECK(!s.columns[2].eligible);

    RandomStream rng(3);
    for (std::size_t m : {1u, 2u, 5u}) {
        const auto plane = draw_hyperplane(s, m, rng);
        CHECK(plane.terms.size() == std::min<std::size_t>(m, 2));
        std::set<std::uint32_t> used;
        for (const auto& t : plane.terms) {
            CHECK(used.insert(t.column).second);
            if (t.type == ColumnType::numeric) {
                CHECK(t.column == 0);
                CHECK(t.center == s.columns[0].mean);
                CHECK(t.fill == s.columns[0].median);
            } else {
                CHECK(t.column == 1);
                double expect = 0.0;
                for (std::size_t c = 0; c < 3; ++c)
                    expect += s.columns[1].proportions[c] * t.category_coefficients[c];
                CHECK(t.fill == doctest::Approx(expect));
            }
        }
    }

    const std::vector<std::size_t> one_row{2};
    CHECK_THROWS_AS(draw_hyperplane(summarize_node(data, one_row), 3, rng), NoEligibleColumns);
}

TEST_CASE("project substitutes fills for missing and unseen values") {
    HyperplaneTerm num;
    num.column = 0;
    num.coefficient = 2.0;
    num.center = 1.0;
    num.fill = 4.0;
    HyperplaneTerm cat;
    cat.column = 1;
    cat.type = ColumnType::categorical;
    cat.category_coefficients = {0.5, -1.0};
    cat.fill = 0.25;
    const Hyperplane plane{{num, cat}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(project(plane, FakeRow{{3.0, 0}, {0, 1}}) == doctest::Approx(4.0 - 1.0));
    CHECK(project(plane, FakeRow{{nan, 0}, {0, 0}}) == doctest::Approx(6.0 + 0.5));
    CHECK(project(plane, FakeRow{{1.0, 0}, {0, kMissingCode}}) == doctest::Approx(0.25));
    CHECK(project(plane, FakeRow{{1.0, 0}, {0, 2}}) == doctest::Approx(0.25));
}

TEST_CASE("random streams") {
    RandomStream a(5), b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());
    CHECK(RandomStream::derive(1, 0).next_u64() != RandomStream::derive(1, 1).next_u64());
    CHECK(RandomStream::derive(1, 0).next_u64() != RandomStream::derive(2, 0).next_u64());

    RandomStream r(9);
    double sum = 0.0, sq = 0.0;
    std::vector<int> counts(7, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double z = r.normal();
        sum += z;
        sq += z * z;
        ++counts[static_cast<std::size_t>(r.uniform_index(7))];
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
    for (int c : counts)
        CHECK(std::abs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));

    std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7};
    r.choose_front(std::span<int>(items), 3);
    std::vector<int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}
