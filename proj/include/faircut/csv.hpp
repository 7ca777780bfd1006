#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <map>
#include <set>
#include <string>

#include "faircut/dataset.hpp"

namespace faircut {

/// Column kind overrides keyed by column name.
using SchemaOverrides = std::map<std::string, ColumnType>;

struct CsvOptions {
    SchemaOverrides schema;
    /// When false, schema entries naming absent columns are ignored instead
    /// of raising SchemaError.
    bool strict_schema = true;
    /// Matched case-insensitively. An empty cell is always missing.
    std::set<std::string> missing_tokens{"", "NA", "NaN"};
    /// Fixed category lists for categorical columns, keyed by column name.
    /// Values outside the list are appended after the fixed entries.
    std::map<std::string, std::vector<std::string>> categories;
};

/// Reads an RFC-4180 style CSV with a mandatory header row.
///
/// Columns whose observed cells all parse as finite numbers are numeric,
/// everything else is categorical with categories in order of first
/// appearance, unless overridden in `options.schema`.
Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

/// Missing cells are written as empty strings, categories by name, and
/// numbers in shortest round-trip form.
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

/// Parses a schema override file: one `name:kind` pair per line, kind one of
/// `numeric` or `categorical`. Blank lines and lines starting with '#' are
/// skipped.
SchemaOverrides read_schema_file(const std::filesystem::path& path);
SchemaOverrides parse_schema(const std::string& text);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write);

std::string format_double(double value);

}  // namespace faircut
