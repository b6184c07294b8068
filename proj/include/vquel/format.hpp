#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vquel/engine.hpp"

namespace vquel {

enum class OutputFormat { Table, Csv, Json };

std::optional<OutputFormat> parse_output_format(std::string_view name);

/// Cells wider than this many characters are cut in table output.
inline constexpr std::size_t kMaxTableCell = 64;

/// Padded columns, a rule under the header and a row count.
std::string format_table(const ResultSet& rs);

/// RFC 4180. Header names and string values are always quoted, null is an
/// empty unquoted field, other values are unquoted text.
std::string format_csv(const ResultSet& rs);

/// `{"columns":[...],"rows":[[...]]}` on one line. Timestamps are RFC 3339
/// strings.
std::string format_json(const ResultSet& rs);

/// All results of a program: table and csv blocks separated by a blank
/// line, json one object per line.
std::string format_results(const std::vector<ResultSet>& results, OutputFormat format);

/// Format-independent view of a result: every cell as its display text,
/// null as nullopt.
struct TextTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<std::string>>> rows;

    bool operator==(const TextTable&) const = default;
};

TextTable to_text_table(const ResultSet& rs);

/// Inverse of format_csv for one result. Throws std::invalid_argument.
TextTable decode_csv(std::string_view text);

/// Inverse of format_json for one result. Throws std::invalid_argument.
TextTable decode_json(std::string_view text);

}  // namespace vquel
