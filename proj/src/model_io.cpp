// Versioned JSON model format. Floats are written with 17 significant
// digits so every double survives the round trip exactly.

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "faircut/csv.hpp"
#include "faircut/errors.hpp"
#include "faircut/forest.hpp"

namespace faircut {

namespace {

using nlohmann::json;

// Appends to a string; with a sink, `flush` moves the buffer out so large
// models never sit in memory as one string.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream* sink = nullptr) : sink_(sink) {}

    std::string take() { return std::move(out_); }
    void flush() {
        if (sink_) {
            sink_->write(out_.data(), static_cast<std::streamsize>(out_.size()));
            out_.clear();
        }
    }

    JsonWriter& raw(std::string_view s) {
        out_.append(s);
        return *this;
    }
    JsonWriter& str(std::string_view s) {
        out_ += json(std::string(s)).dump();
        return *this;
    }
    JsonWriter& num(double v) {
        if (!std::isfinite(v))
            throw Error("cannot serialize a non-finite value");
        char buf[40];
        int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
        out_.append(buf, static_cast<std::size_t>(len));
        return *this;
    }
    JsonWriter& integer(std::uint64_t v) {
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& key(std::string_view k) {
        str(k);
        out_.push_back(':');
        return *this;
    }
    template <typename Range>
    JsonWriter& nums(const Range& values) {
        out_.push_back('[');
        bool first = true;
        for (double v : values) {
            if (!first)
                out_.push_back(',');
            first = false;
            num(v);
        }
        out_.push_back(']');
        return *this;
    }

private:
    std::ostream* sink_;
    std::string out_;
};

const char* kind_name(ColumnType t) {
    return t == ColumnType::numeric ? "numeric" : "categorical";
}

void write_params(JsonWriter& w, const Forest& f) {
    const auto& p = f.params();
    w.raw("{").key("n_dims").integer(p.n_dims);
    w.raw(",").key("n_trials").integer(p.n_trials);
    w.raw(",").key("min_gain").num(p.min_gain);
    w.raw(",").key("min_obs").integer(p.min_obs);
    w.raw(",").key("max_depth");
    if (p.max_depth)
        w.integer(*p.max_depth);
    else
        w.raw("null");
    w.raw(",").key("depth_multiplier").integer(p.depth_multiplier);
    w.raw(",").key("n_trees").integer(p.n_trees);
    w.raw(",").key("subsample");
    if (p.subsample)
        w.integer(*p.subsample);
    else
        w.raw("null");
    w.raw(",").key("seed").integer(p.seed);
    w.raw(",").key("resolved_max_depth").integer(f.tree_params().max_depth);
    w.raw("}");
}

void write_columns(JsonWriter& w, const Forest& f) {
    w.raw("[");
    for (std::size_t j = 0; j < f.columns().size(); ++j) {
        const auto& c = f.columns()[j];
        const auto& s = f.stats()[j];
        if (j)
            w.raw(",");
        w.raw("{").key("name").str(c.name);
        w.raw(",").key("kind").str(kind_name(c.kind.type));
        if (c.kind.is_categorical()) {
            w.raw(",").key("categories").raw("[");
            for (std::size_t k = 0; k < c.kind.categories.size(); ++k) {
                if (k)
                    w.raw(",");
                w.str(c.kind.categories[k]);
            }
            w.raw("]");
        }
        w.raw(",").key("stats").raw("{").key("n_known").integer(s.n_known);
        if (c.kind.is_numeric()) {
            w.raw(",").key("mean").num(s.numeric.mean);
            w.raw(",").key("std").num(s.numeric.std);
            w.raw(",").key("median").num(s.numeric.median);
            w.raw(",").key("min").num(s.numeric.min);
            w.raw(",").key("max").num(s.numeric.max);
        } else {
            w.raw(",").key("mode").integer(static_cast<std::uint64_t>(s.categorical.mode));
            w.raw(",").key("proportions").nums(s.categorical.proportions);
        }
        w.raw("}}");
    }
    w.raw("]");
}

void write_tree(JsonWriter& w, const Tree& tree) {
    w.raw("{").key("nodes").raw("[");
    for (std::size_t id = 0; id < tree.n_nodes(); ++id) {
        const auto& n = tree.node(id);
        if (id)
            w.raw(",");
        w.raw("\n{").key("kind").str(n.is_terminal() ? "terminal" : "internal");
        w.raw(",").key("depth").integer(n.depth);
        if (!n.is_terminal()) {
            w.raw(",").key("left").integer(static_cast<std::uint64_t>(n.left));
            w.raw(",").key("right").integer(static_cast<std::uint64_t>(n.right));
            w.raw(",").key("split").raw("{").key("threshold").num(n.threshold);
            w.raw(",").key("gain").num(n.gain);
            w.raw(",").key("terms").raw("[");
            bool first = true;
            for (const auto& t : tree.terms(n)) {
                if (!first)
                    w.raw(",");
                first = false;
                w.raw("{").key("column").integer(t.column);
                if (t.type == ColumnType::numeric) {
                    w.raw(",").key("coefficient").num(t.coefficient);
                    w.raw(",").key("center").num(t.center);
                } else {
                    w.raw(",").key("category_coefficients").nums(t.category_coefficients);
                }
                w.raw(",").key("fill").num(t.fill);
                w.raw("}");
            }
            w.raw("]}");
        } else {
            w.raw(",").key("record").raw("{").key("value").nums(tree.values(n.record));
            w.raw(",").key("weight").nums(tree.weights(n.record));
            w.raw(",").key("proportions").raw("[");
            for (std::size_t j = 0; j < tree.n_cols(); ++j) {
                if (j)
                    w.raw(",");
                w.nums(tree.proportions(n.record, j));
            }
            w.raw("]}");
        }
        w.raw("}");
    }
    w.raw("]}");
}

template <typename T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string("model file: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: bad field '") + key + "': " + e.what());
    }
}

std::optional<std::size_t> get_optional_size(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return get<std::size_t>(j, key);
}

Tree read_tree(const json& jt, const std::vector<ColumnInfo>& columns) {
    Tree tree(columns);
    const json& nodes = jt.at("nodes");
    if (!nodes.is_array() || nodes.empty())
        throw ParseError("model file: tree without nodes");
    const std::size_t count = nodes.size();
    for (std::size_t id = 0; id < count; ++id) {
        const json& jn = nodes[id];
        Tree::Node n;
        n.depth = get<std::uint32_t>(jn, "depth");
        const auto kind = get<std::string>(jn, "kind");
        if (kind == "internal") {
            n.left = get<std::int32_t>(jn, "left");
            n.right = get<std::int32_t>(jn, "right");
            // Children always follow their parent in depth-first order.
            if (n.left <= static_cast<std::int32_t>(id) || n.right <= static_cast<std::int32_t>(id) ||
                static_cast<std::size_t>(n.left) >= count || static_cast<std::size_t>(n.right) >= count)
                throw ParseError("model file: child index out of range");
            const json& split = jn.at("split");
            n.threshold = get<double>(split, "threshold");
            n.gain = get<double>(split, "gain");
            std::vector<HyperplaneTerm> terms;
            for (const auto& jterm : split.at("terms")) {
                HyperplaneTerm t;
                t.column = get<std::uint32_t>(jterm, "column");
                if (t.column >= columns.size())
                    throw ParseError("model file: term references an unknown column");
                t.type = columns[t.column].kind.type;
                t.fill = get<double>(jterm, "fill");
                if (t.type == ColumnType::numeric) {
                    t.coefficient = get<double>(jterm, "coefficient");
                    t.center = get<double>(jterm, "center");
                } else {
                    t.category_coefficients = get<std::vector<double>>(jterm, "category_coefficients");
                }
                terms.push_back(std::move(t));
            }
            n.term_begin = tree.add_terms(terms);
            n.term_count = static_cast<std::uint32_t>(terms.size());
        } else if (kind == "terminal") {
            const json& jr = jn.at("record");
            ImputationRecord rec;
            rec.value = get<std::vector<double>>(jr, "value");
            rec.weight = get<std::vector<double>>(jr, "weight");
            rec.proportions = get<std::vector<std::vector<double>>>(jr, "proportions");
            n.record = tree.add_record(rec);
        } else {
            throw ParseError("model file: unknown node kind '" + kind + "'");
        }
        tree.add_node(n);
    }
    tree.shrink_to_fit();
    return tree;
}

}  // namespace

namespace {

void write_forest(JsonWriter& w, const Forest& forest) {
    w.raw("{").key("format_version").integer(Forest::kFormatVersion);
    w.raw(",\n").key("params");
    write_params(w, forest);
    w.raw(",\n").key("n_train_rows").integer(forest.n_train_rows());
    w.raw(",\n").key("column_meta");
    write_columns(w, forest);
    w.raw(",\n").key("trees").raw("[");
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        if (t)
            w.raw(",");
        w.raw("\n");
        write_tree(w, forest.trees()[t]);
        w.flush();
    }
    w.raw("\n]}\n");
    w.flush();
}

}  // namespace

std::string serialize(const Forest& forest) {
    JsonWriter w;
    write_forest(w, forest);
    return w.take();
}

void save(const Forest& forest, const std::filesystem::path& path) {
    write_file_atomic(path, [&](std::ostream& out) {
        JsonWriter w(&out);
        write_forest(w, forest);
    });
}

namespace {

void check_version(const json& v) {
    if (!v.is_number_integer())
        throw ParseError("model file: bad field 'format_version'");
    const auto version = v.get<std::int64_t>();
    if (version != Forest::kFormatVersion)
        throw VersionMismatch("model format version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(Forest::kFormatVersion) + ")");
}

void read_columns(const json& meta, std::vector<ColumnInfo>& columns, std::vector<ColumnStats>& stats) {
    if (!meta.is_array())
        throw ParseError("model file: column_meta is not an array");
    for (const auto& jc : meta) {
        ColumnInfo info;
        info.name = get<std::string>(jc, "name");
        const auto kind = get<std::string>(jc, "kind");
        const json& js = jc.at("stats");
        ColumnStats st;
        st.n_known = get<std::size_t>(js, "n_known");
        if (kind == "numeric") {
            info.kind = ColumnKind::numeric();
            st.numeric.mean = get<double>(js, "mean");
            st.numeric.std = get<double>(js, "std");
            st.numeric.median = get<double>(js, "median");
            st.numeric.min = get<double>(js, "min");
            st.numeric.max = get<double>(js, "max");
        } else if (kind == "categorical") {
            info.kind = ColumnKind::categorical(get<std::vector<std::string>>(jc, "categories"));
            st.categorical.mode = get<std::int32_t>(js, "mode");
            st.categorical.proportions = get<std::vector<double>>(js, "proportions");
        } else {
            throw ParseError("model file: unknown column kind '" + kind + "'");
        }
        columns.push_back(std::move(info));
        stats.push_back(std::move(st));
    }
}

// Parses a model document. Trees are converted and dropped from the DOM as
// soon as they are complete, provided the version and column metadata came
// first (as `save` writes them); other orderings fall back to the full DOM.
template <typename Input>
Forest parse_model(Input&& input) {
    std::string top_key;
    bool version_seen = false;
    bool columns_seen = false;
    std::vector<ColumnInfo> columns;
    std::vector<ColumnStats> stats;
    std::vector<Tree> trees;

    auto callback = [&](int depth, json::parse_event_t event, json& parsed) {
        if (depth == 1 && event == json::parse_event_t::key) {
            top_key = parsed.get<std::string>();
        } else if (depth == 1 && event == json::parse_event_t::value && top_key == "format_version") {
            check_version(parsed);
            version_seen = true;
        } else if (depth == 1 && event == json::parse_event_t::array_end && top_key == "column_meta") {
            read_columns(parsed, columns, stats);
            columns_seen = true;
        } else if (depth == 2 && event == json::parse_event_t::object_end && top_key == "trees" && version_seen &&
                   columns_seen) {
            trees.push_back(read_tree(parsed, columns));
            return false;
        }
        return true;
    };

    try {
        json doc;
        try {
            doc = json::parse(std::forward<Input>(input), callback);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("model file is not valid JSON: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("format_version"))
            throw ParseError("model file: missing field 'format_version'");
        check_version(doc.at("format_version"));
        if (!columns_seen)
            read_columns(doc.at("column_meta"), columns, stats);
        const json& jtrees = doc.at("trees");
        if (!jtrees.is_array())
            throw ParseError("model file: trees is not an array");
        for (const auto& jt : jtrees)
            trees.push_back(read_tree(jt, columns));

        const json& jp = doc.at("params");
        ForestParams params;
        params.n_dims = get<std::size_t>(jp, "n_dims");
        params.n_trials = get<std::size_t>(jp, "n_trials");
        params.min_gain = get<double>(jp, "min_gain");
        params.min_obs = get<std::size_t>(jp, "min_obs");
        params.max_depth = get_optional_size(jp, "max_depth");
        params.depth_multiplier = get<std::size_t>(jp, "depth_multiplier");
        params.n_trees = get<std::size_t>(jp, "n_trees");
        params.subsample = get_optional_size(jp, "subsample");
        params.seed = get<std::uint64_t>(jp, "seed");
        params.validate();
        if (trees.size() != params.n_trees)
            throw ParseError("model file: expected " + std::to_string(params.n_trees) + " trees, found " +
                             std::to_string(trees.size()));
        const std::size_t n_train = get<std::size_t>(doc, "n_train_rows");
        TreeParams tree_params = params.tree_params(n_train);
        tree_params.max_depth = get<std::size_t>(jp, "resolved_max_depth");
        return Forest(std::move(params), tree_params, std::move(columns), std::move(stats), n_train,
                      std::move(trees));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file is malformed: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("model file is inconsistent: ") + e.what());
    }
}

}  // namespace

Forest deserialize(const std::string& text) {
    return parse_model(text);
}

Forest load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open model '" + path.string() + "'");
    return parse_model(in);
}

}  // namespace faircut
