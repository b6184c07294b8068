#include "vquel/format.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "vquel/csv.hpp"

namespace vquel {

using json = nlohmann::json;

std::optional<OutputFormat> parse_output_format(std::string_view name) {
    if (name == "table") return OutputFormat::Table;
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    return std::nullopt;
}

namespace {

// Code points in UTF-8 text; continuation bytes do not count.
std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

std::string truncate(const std::string& s) {
    if (display_width(s) <= kMaxTableCell) return s;
    std::size_t kept = 0, i = 0;
    for (; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
            if (kept == kMaxTableCell - 1) break;
            ++kept;
        }
    }
    return s.substr(0, i) + "…";
}

std::string cell_text(const Value& v) { return v.is_null() ? "NULL" : v.to_string(); }

json cell_json(const Value& v) {
    switch (v.type()) {
        case Value::Type::Null: return nullptr;
        case Value::Type::Bool: return v.as_bool();
        case Value::Type::Int: return v.as_int();
        case Value::Type::Float:
            // JSON has no nan or inf; their display text survives decoding.
            if (!std::isfinite(v.as_float())) return v.to_string();
            return v.as_float();
        case Value::Type::Str: return v.as_string();
        case Value::Type::Timestamp: return v.to_string();
    }
    return nullptr;
}

}  // namespace

std::string format_table(const ResultSet& rs) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width;
    for (const auto& c : rs.columns) width.push_back(display_width(truncate(c)));
    for (const auto& row : rs.rows) {
        std::vector<std::string> line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line.push_back(truncate(cell_text(row[i])));
            width[i] = std::max(width[i], display_width(line.back()));
        }
        cells.push_back(std::move(line));
    }
    auto emit = [&](const std::vector<std::string>& line) {
        std::string out;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i) out += " | ";
            out += line[i];
            if (i + 1 < line.size()) out.append(width[i] - display_width(line[i]), ' ');
        }
        return out + "\n";
    };
    std::vector<std::string> header;
    for (const auto& c : rs.columns) header.push_back(truncate(c));
    std::string out = emit(header);
    for (std::size_t i = 0; i < width.size(); ++i) {
        if (i) out += "-+-";
        out.append(width[i], '-');
    }
    out += "\n";
    for (const auto& line : cells) out += emit(line);
    out += "(" + std::to_string(rs.rows.size()) + (rs.rows.size() == 1 ? " row)\n" : " rows)\n");
    return out;
}

std::string format_csv(const ResultSet& rs) {
    std::string out;
    for (std::size_t i = 0; i < rs.columns.size(); ++i) out += (i ? "," : "") + csv_quote(rs.columns[i]);
    out += "\r\n";
    for (const auto& row : rs.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            const Value& v = row[i];
            if (v.is_null()) continue;
            out += v.type() == Value::Type::Str ? csv_quote(v.as_string()) : v.to_string();
        }
        out += "\r\n";
    }
    return out;
}

std::string format_json(const ResultSet& rs) {
    json rows = json::array();
    for (const auto& row : rs.rows) {
        json r = json::array();
        for (const auto& v : row) r.push_back(cell_json(v));
        rows.push_back(std::move(r));
    }
    json doc = {{"columns", rs.columns}, {"rows", std::move(rows)}};
    return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string format_results(const std::vector<ResultSet>& results, OutputFormat format) {
    std::string out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        switch (format) {
            case OutputFormat::Table:
                if (i) out += "\n";
                out += format_table(results[i]);
                break;
            case OutputFormat::Csv:
                if (i) out += "\r\n";
                out += format_csv(results[i]);
                break;
            case OutputFormat::Json: out += format_json(results[i]) + "\n"; break;
        }
    }
    return out;
}

TextTable to_text_table(const ResultSet& rs) {
    TextTable t;
    t.columns = rs.columns;
    for (const auto& row : rs.rows) {
        std::vector<std::optional<std::string>> line;
        for (const auto& v : row) line.push_back(v.is_null() ? std::nullopt : std::optional(v.to_string()));
        t.rows.push_back(std::move(line));
    }
    return t;
}

TextTable decode_csv(std::string_view text) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw std::invalid_argument("csv result without a header");
    TextTable t;
    // Header names are always quoted, so a bare empty header line means a
    // result without columns; each of its rows is an empty line too.
    const CsvRow bare_empty{CsvField{}};
    if (rows[0] == bare_empty) {
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r] != bare_empty) throw std::invalid_argument("csv row " + std::to_string(r) + " in a result without columns");
            t.rows.emplace_back();
        }
        return t;
    }
    for (auto& f : rows[0]) t.columns.push_back(std::move(f.text));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != t.columns.size()) {
            throw std::invalid_argument("csv row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                        " fields, expected " + std::to_string(t.columns.size()));
        }
        std::vector<std::optional<std::string>> line;
        for (auto& f : rows[r]) {
            if (!f.quoted && f.text.empty()) line.emplace_back(std::nullopt);
            else line.emplace_back(std::move(f.text));
        }
        t.rows.push_back(std::move(line));
    }
    return t;
}

TextTable decode_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(e.what());
    }
    if (!doc.is_object() || !doc.contains("columns") || !doc.contains("rows")) {
        throw std::invalid_argument("json result needs 'columns' and 'rows'");
    }
    TextTable t;
    for (const auto& c : doc["columns"]) t.columns.push_back(c.get<std::string>());
    for (const auto& r : doc["rows"]) {
        std::vector<std::optional<std::string>> line;
        for (const auto& cell : r) {
            Value v;
            if (cell.is_boolean()) v = Value(cell.get<bool>());
            else if (cell.is_number_integer()) v = Value(cell.get<std::int64_t>());
            else if (cell.is_number_float()) v = Value(cell.get<double>());
            else if (cell.is_string()) v = Value(cell.get<std::string>());
            else if (!cell.is_null()) throw std::invalid_argument("unexpected json cell " + cell.dump());
            line.push_back(v.is_null() ? std::nullopt : std::optional(v.to_string()));
        }
        t.rows.push_back(std::move(line));
    }
    return t;
}

}  // namespace vquel
