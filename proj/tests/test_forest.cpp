#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "faircut/csv.hpp"
#include "faircut/errors.hpp"
#include "faircut/forest.hpp"
#include "synthetic.hpp"

using namespace faircut;

namespace {

ForestParams small_params(std::uint64_t seed = 1) {
    ForestParams p = ForestParams::from_preset(Preset::mid);
    p.n_trees = 12;
    p.n_trials = 6;
    p.seed = seed;
    return p;
}

const RunOptions kSerial{Execution::serial, 0};

}  // namespace

TEST_CASE("presets") {
    const auto large = ForestParams::from_preset(Preset::large);
    CHECK(large.n_trials == 20);
    CHECK(large.n_dims == 3);
    CHECK(large.n_trees == 500);
    CHECK(large.min_obs == 3);
    CHECK(large.tree_params(20640).max_depth == 45);
    const auto mid = ForestParams::from_preset(Preset::mid);
    CHECK(mid.n_trials == 10);
    CHECK(mid.n_trees == 100);
    CHECK(mid.tree_params(5000).max_depth == 13);
    const auto small = ForestParams::from_preset(Preset::small);
    CHECK(small.rows_per_tree(20640) == 5000);
    CHECK(small.rows_per_tree(300) == 300);
    CHECK(small.tree_params(20640).max_depth == 13);

    CHECK(parse_preset("mid") == Preset::mid);
    CHECK(!parse_preset("huge"));
    CHECK(ceil_log2(1) == 0);
    CHECK(ceil_log2(2) == 1);
    CHECK(ceil_log2(5) == 3);
    CHECK(ceil_log2(8) == 3);
    CHECK(ceil_log2(20640) == 15);

    ForestParams bad = large;
    bad.n_trees = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("fit rejects unusable data") {
    CHECK_THROWS_AS(fit(synth::uniform(1, 3, 1), small_params()), InsufficientData);
    Dataset d = synth::uniform(20, 2, 1);
    for (std::size_t i = 0; i < 20; ++i)
        d.set_missing(i, 1);
    CHECK_THROWS_AS(fit(d, small_params()), InsufficientData);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    const auto data = synth::punch_holes(synth::mixed(600, 3), 0.15, 4);
    const auto params = small_params(77);
    const Forest serial = fit(data, params, kSerial);
    for (int threads : {0, 1, 3}) {
        const Forest parallel = fit(data, params, {Execution::parallel, threads});
        CHECK(parallel == serial);
        const auto a = impute_dataset(serial, data, kSerial);
        const auto b = impute_dataset(serial, data, {Execution::parallel, threads});
        CHECK(format_csv(a) == format_csv(b));
    }
}

TEST_CASE("impute fills every missing cell within training range") {
    const auto complete = synth::mixed(500, 8);
    const auto data = synth::punch_holes(complete, 0.25, 9);
    const Forest forest = fit(data, small_params());
    const auto out = impute_dataset(forest, data);
    CHECK(out.count_missing() == 0);
    CHECK(out.columns() == data.columns());
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (!data.column(j).kind.is_numeric())
            continue;
        const auto& st = forest.stats()[j].numeric;
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            if (data.is_missing(i, j)) {
                CHECK(out.numeric(i, j) >= st.min);
                CHECK(out.numeric(i, j) <= st.max);
            } else {
                CHECK(out.numeric(i, j) == data.numeric(i, j));
            }
        }
    }
}

TEST_CASE("impute_row reports contributions") {
    const auto data = synth::punch_holes(synth::two_cluster(300, 3, 1), 0.2, 2);
    const auto params = small_params();
    const Forest forest = fit(data, params);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto row = impute_row(forest, data, i);
        bool any = false;
        for (std::size_t j = 0; j < data.n_cols(); ++j) {
            CHECK(static_cast<bool>(row.imputed[j]) == data.is_missing(i, j));
            any = any || row.imputed[j];
        }
        CHECK(row.contributions == (any ? params.n_trees : 0));
    }
}

TEST_CASE("single-tree imputation equals its terminal record") {
    const auto data = synth::punch_holes(synth::two_cluster(200, 3, 5), 0.2, 6);
    auto params = small_params();
    params.n_trees = 1;
    const Forest forest = fit(data, params);
    const auto aligned = align(forest, data);
    const Tree& tree = forest.trees()[0];
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto id = tree.route(MatrixRow{&aligned.matrix, i});
        const auto values = tree.values(tree.node(id).record);
        const auto row = impute_row(forest, aligned, i);
        for (std::size_t j = 0; j < data.n_cols(); ++j)
            if (data.is_missing(i, j))
                CHECK(row.numeric[j] == doctest::Approx(values[j]).epsilon(1e-14));
    }
}

TEST_CASE("imputation is the weighted combination of terminal records") {
    const auto data = synth::punch_holes(synth::mixed(300, 13), 0.2, 14);
    const Forest forest = fit(data, small_params(8));
    const auto aligned = align(forest, data);
    const auto out = impute_dataset(forest, data);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (std::size_t j = 0; j < data.n_cols(); ++j) {
            if (!data.is_missing(i, j))
                continue;
            double num = 0.0, den = 0.0;
            std::vector<double> votes(data.column(j).kind.n_categories(), 0.0);
            for (const auto& tree : forest.trees()) {
                const auto rec = tree.node(tree.route(MatrixRow{&aligned.matrix, i})).record;
                const double w = tree.weights(rec)[j];
                den += w;
                if (data.column(j).kind.is_numeric()) {
                    num += w * tree.values(rec)[j];
                } else {
                    const auto props = tree.proportions(rec, j);
                    for (std::size_t c = 0; c < votes.size(); ++c)
                        votes[c] += w * props[c];
                }
            }
            if (data.column(j).kind.is_numeric()) {
                CHECK(out.numeric(i, j) == doctest::Approx(num / den).epsilon(1e-12));
            } else {
                const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
                CHECK(out.code(i, j) == best);
            }
        }
    }
}

TEST_CASE("align checks the schema") {
    const auto data = synth::mixed(100, 1);
    const Forest forest = fit(data, small_params());

    auto cols = data.columns();
    std::swap(cols[0], cols[4]);
    Dataset reordered(cols, 3);
    CHECK_NOTHROW(align(forest, reordered));

    SUBCASE("missing column") {
        auto c = data.columns();
        c.pop_back();
        try {
            align(forest, Dataset(c, 1));
            FAIL("expected ColumnMismatch");
        } catch (const ColumnMismatch& e) {
            CHECK(e.column() == "coin");
        }
    }
    SUBCASE("extra column") {
        auto c = data.columns();
        c.push_back({"extra", ColumnKind::numeric()});
        CHECK_THROWS_AS(align(forest, Dataset(c, 1)), ColumnMismatch);
    }
    SUBCASE("kind change") {
        auto c = data.columns();
        c[0].kind = ColumnKind::categorical({"a"});
        CHECK_THROWS_AS(align(forest, Dataset(c, 1)), ColumnMismatch);
    }
}

TEST_CASE("unseen categories are routed like missing values and kept") {
    const auto data = synth::mixed(200, 2);
    const Forest forest = fit(data, small_params());
    auto cols = data.columns();
    cols[3].kind = ColumnKind::categorical({"mid", "alien"});
    Dataset query(cols, 2);
    for (std::size_t j = 0; j < 3; ++j) {
        query.set_numeric(0, j, 0.1);
        query.set_numeric(1, j, 0.1);
    }
    query.set_code(0, 3, 1);
    query.set_code(1, 3, 0);
    query.set_code(0, 4, 0);
    const auto out = impute_dataset(forest, query);
    CHECK(out.column(3).kind.categories[static_cast<std::size_t>(out.code(0, 3))] == "alien");
    CHECK(!out.is_missing(1, 4));
    CHECK(out.column(4).kind.categories == data.column(4).kind.categories);
}

TEST_CASE("model files round-trip") {
    const auto data = synth::punch_holes(synth::mixed(300, 4), 0.2, 5);
    const Forest forest = fit(data, small_params(3));
    const auto dir = synth::temp_dir("model_io");
    save(forest, dir / "m.json");
    const Forest back = load(dir / "m.json");
    CHECK(back == forest);
    CHECK(serialize(back) == serialize(forest));
    CHECK(format_csv(impute_dataset(back, data)) == format_csv(impute_dataset(forest, data)));

    // Key order does not matter, including trees before the column metadata.
    const std::string text = serialize(forest);
    CHECK(deserialize(nlohmann::json::parse(text).dump(1)) == forest);
    nlohmann::ordered_json reordered;
    const auto doc = nlohmann::ordered_json::parse(text);
    for (const char* key : {"trees", "params", "column_meta", "n_train_rows", "format_version"})
        reordered[key] = doc.at(key);
    CHECK(deserialize(reordered.dump()) == forest);
}

TEST_CASE("malformed model files are rejected") {
    const auto data = synth::mixed(80, 4);
    const std::string text = serialize(fit(data, small_params()));

    CHECK_THROWS_AS(deserialize(text.substr(0, text.size() / 2)), ParseError);
    CHECK_THROWS_AS(deserialize(""), ParseError);
    CHECK_THROWS_AS(deserialize("{\"format_version\":1}"), ParseError);

    std::string future = text;
    const auto pos = future.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    future.replace(pos, 18, "\"format_version\":2");
    CHECK_THROWS_AS(deserialize(future), VersionMismatch);

    std::string broken = text;
    const auto left = broken.find("\"left\":");
    REQUIRE(left != std::string::npos);
    broken.replace(left, 7, "\"left\":9999999,\"x\":");
    CHECK_THROWS_AS(deserialize(broken), ParseError);
}

TEST_CASE("subsampled trees use the requested number of rows") {
    const auto data = synth::two_cluster(400, 3, 2);
    auto params = small_params();
    params.subsample = 50;
    params.max_depth = 100;
    params.min_gain = 0.0;
    const Forest forest = fit(data, params);
    CHECK(forest.tree_params().max_depth == 100);
    for (const auto& tree : forest.trees())
        CHECK(tree.n_terminals() <= 50);
}
