#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vquel {

/// One field as read from RFC 4180 text. `quoted` separates `""` (an empty
/// string) from an empty unquoted field (null).
struct CsvField {
    std::string text;
    bool quoted = false;

    bool operator==(const CsvField&) const = default;
};

using CsvRow = std::vector<CsvField>;

/// Parses RFC 4180 text (CRLF or LF line ends, quoted fields may span
/// lines). A final line break is optional. Throws std::invalid_argument on
/// an unterminated quote or stray characters after a closing quote.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Always quotes; doubles embedded quotes.
std::string csv_quote(std::string_view text);

}  // namespace vquel
