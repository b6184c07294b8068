#include "vquel/csv.hpp"

#include <stdexcept>

namespace vquel {

std::vector<CsvRow> parse_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    CsvRow row;
    CsvField field;
    std::size_t i = 0;
    std::size_t line = 1;
    bool at_field_start = true;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field = {};
        at_field_start = true;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        ++line;
    };

    while (i < text.size()) {
        char c = text[i];
        if (at_field_start && c == '"') {
            field.quoted = true;
            ++i;
            for (;;) {
                if (i >= text.size()) throw std::invalid_argument("unterminated quoted field on line " + std::to_string(line));
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field.text += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (text[i] == '\n') ++line;
                field.text += text[i++];
            }
            at_field_start = false;
            if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                throw std::invalid_argument("unexpected character after closing quote on line " + std::to_string(line));
            }
            continue;
        }
        at_field_start = false;
        if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else {
            if (field.quoted) throw std::invalid_argument("unexpected character after closing quote on line " + std::to_string(line));
            field.text += c;
            ++i;
        }
    }
    if (!at_field_start || !row.empty()) end_row();
    return rows;
}

std::string csv_quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace vquel
