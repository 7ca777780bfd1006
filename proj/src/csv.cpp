#include "faircut/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "faircut/errors.hpp"

namespace faircut {

namespace {

using Record = std::vector<std::string>;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Splits RFC-4180 text into records. Quoted fields may contain separators,
// doubled quotes and line breaks.
std::vector<Record> split_records(const std::string& text) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0)
        i = 3;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current.clear();
    };

    for (; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (!field_started && field.empty())
                in_quotes = true;
            else
                field.push_back(ch);
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes)
        throw ParseError("unterminated quoted field", records.empty() ? 0 : records.size());
    if (field_started || !field.empty() || !current.empty())
        end_record();
    return records;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+')
        cell.remove_prefix(1);
    if (cell.empty())
        return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos ||
           (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

void append_field(std::string& out, std::string_view s) {
    if (!needs_quotes(s)) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (char ch : s) {
        if (ch == '"')
            out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
    auto records = split_records(text);
    if (records.empty())
        throw ParseError("missing header row");
    const Record header = std::move(records.front());
    const std::size_t n_cols = header.size();
    const std::size_t n_rows = records.size() - 1;

    for (const auto& [name, type] : options.schema) {
        (void)type;
        if (options.strict_schema && std::find(header.begin(), header.end(), name) == header.end())
            throw SchemaError("schema names unknown column '" + name + "'");
    }
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != n_cols)
            throw ParseError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                 " cells, header has " + std::to_string(n_cols),
                             r);

    std::set<std::string> tokens;
    for (const auto& t : options.missing_tokens)
        tokens.insert(lower(t));
    auto is_missing_cell = [&](const std::string& cell) {
        return cell.empty() || tokens.contains(lower(trim(cell)));
    };

    std::vector<ColumnInfo> columns(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
        columns[j].name = header[j];
        ColumnType type = ColumnType::numeric;
        if (auto it = options.schema.find(header[j]); it != options.schema.end()) {
            type = it->second;
        } else {
            for (std::size_t r = 1; r < records.size(); ++r) {
                const auto& cell = records[r][j];
                if (!is_missing_cell(cell) && !parse_number(cell)) {
                    type = ColumnType::categorical;
                    break;
                }
            }
        }
        if (type == ColumnType::categorical) {
            std::vector<std::string> cats;
            if (auto it = options.categories.find(header[j]); it != options.categories.end())
                cats = it->second;
            std::set<std::string> seen(cats.begin(), cats.end());
            for (std::size_t r = 1; r < records.size(); ++r) {
                const auto& cell = records[r][j];
                if (!is_missing_cell(cell) && seen.insert(cell).second)
                    cats.push_back(cell);
            }
            columns[j].kind = ColumnKind::categorical(std::move(cats));
        }
    }

    Dataset data(columns, n_rows);
    for (std::size_t j = 0; j < n_cols; ++j) {
        const auto& kind = data.column(j).kind;
        std::unordered_map<std::string_view, std::int32_t> index;
        for (std::size_t c = 0; c < kind.categories.size(); ++c)
            index.emplace(kind.categories[c], static_cast<std::int32_t>(c));
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& cell = records[r][j];
            if (is_missing_cell(cell))
                continue;
            if (kind.is_numeric()) {
                auto v = parse_number(cell);
                if (!v)
                    throw ParseError("row " + std::to_string(r) + ": '" + cell +
                                         "' is not a number (column '" + header[j] + "')",
                                     r);
                data.set_numeric(r - 1, j, *v);
            } else {
                data.set_code(r - 1, j, index.at(cell));
            }
        }
    }
    return data;
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options) {
    return parse_csv(read_file(path), options);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string format_csv(const Dataset& data) {
    std::string out;
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (j)
            out.push_back(',');
        append_field(out, data.column(j).name);
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (std::size_t j = 0; j < data.n_cols(); ++j) {
            if (j)
                out.push_back(',');
            if (data.is_missing(i, j))
                continue;
            const auto& kind = data.column(j).kind;
            if (kind.is_numeric())
                out += format_double(data.numeric(i, j));
            else
                append_field(out, kind.categories[static_cast<std::size_t>(data.code(i, j))]);
        }
        out.push_back('\n');
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write '" + tmp.string() + "'");
        try {
            write(out);
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("write failed for '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    write_file_atomic(path, [&](std::ostream& out) {
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    });
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    write_file_atomic(path, format_csv(data));
}

SchemaOverrides parse_schema(const std::string& text) {
    SchemaOverrides out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = trim(line);
        if (!view.empty() && view.back() == '\r')
            view.remove_suffix(1);
        if (view.empty() || view.front() == '#')
            continue;
        auto colon = view.rfind(':');
        if (colon == std::string_view::npos)
            throw SchemaError("schema line " + std::to_string(lineno) + ": expected name:kind");
        std::string name(trim(view.substr(0, colon)));
        std::string kind = lower(trim(view.substr(colon + 1)));
        if (kind == "numeric")
            out[name] = ColumnType::numeric;
        else if (kind == "categorical")
            out[name] = ColumnType::categorical;
        else
            throw SchemaError("schema line " + std::to_string(lineno) + ": unknown kind '" + kind + "'");
    }
    return out;
}

SchemaOverrides read_schema_file(const std::filesystem::path& path) {
    return parse_schema(read_file(path));
}

}  // namespace faircut
