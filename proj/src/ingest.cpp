#include "vquel/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vquel/csv.hpp"
#include "vquel/error.hpp"
#include "vquel/json_codec.hpp"

namespace vquel {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCsvExt = ".csv";
constexpr std::string_view kSchemaExt = ".schema.json";
constexpr std::string_view kJsonlExt = ".jsonl";

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RepositoryError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string strip(std::string_view name, std::string_view ext) {
    return std::string(name.substr(0, name.size() - ext.size()));
}

std::vector<Column> read_schema(const fs::path& path) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw RepositoryError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw RepositoryError(path.string() + ": schema must be an object of column: type");
    std::vector<Column> schema;
    for (const auto& [name, type] : j.items()) {
        if (!type.is_string()) throw RepositoryError(path.string() + ": type of '" + name + "' must be a string");
        auto t = parse_column_type(type.get<std::string>());
        if (!t) throw RepositoryError(path.string() + ": unknown type '" + type.get<std::string>() + "' for '" + name + "'");
        schema.push_back({name, *t});
    }
    return schema;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<Value> parse_cell(const CsvField& f, ColumnType type) {
    if (!f.quoted && f.text.empty()) return Value{};
    const std::string& s = f.text;
    switch (type) {
        case ColumnType::String: return Value(s);
        case ColumnType::Int:
            if (auto v = parse_number<std::int64_t>(s)) return Value(*v);
            return std::nullopt;
        case ColumnType::Float:
            if (s == "nan") return Value(std::nan(""));
            if (s == "inf") return Value(HUGE_VAL);
            if (s == "-inf") return Value(-HUGE_VAL);
            if (auto v = parse_number<double>(s)) return Value(*v);
            return std::nullopt;
        case ColumnType::Bool:
            if (s == "true") return Value(true);
            if (s == "false") return Value(false);
            return std::nullopt;
        case ColumnType::Timestamp:
            if (auto t = parse_timestamp(s)) return Value(*t);
            return std::nullopt;
    }
    return std::nullopt;
}

Container read_relation(const std::string& name, const fs::path& csv_path, const fs::path& schema_path) {
    std::vector<Column> schema = read_schema(schema_path);
    std::vector<CsvRow> rows;
    try {
        rows = parse_csv(read_file(csv_path));
    } catch (const std::invalid_argument& e) {
        throw RepositoryError(csv_path.string() + ": " + e.what());
    }
    if (rows.empty()) throw RepositoryError(csv_path.string() + ": missing header row");

    std::map<std::string, const Column*, std::less<>> by_name;
    for (const auto& c : schema) by_name[c.name] = &c;
    // Per CSV column: the schema column, or nullptr for _rid.
    std::vector<const Column*> layout;
    std::set<std::string, std::less<>> seen;
    for (const auto& f : rows[0]) {
        if (!seen.insert(f.text).second) throw RepositoryError(csv_path.string() + ": duplicate column '" + f.text + "'");
        if (f.text == kRidKey) {
            layout.push_back(nullptr);
            continue;
        }
        auto it = by_name.find(f.text);
        if (it == by_name.end()) throw RepositoryError(csv_path.string() + ": column '" + f.text + "' is not in the schema");
        layout.push_back(it->second);
    }
    for (const auto& c : schema) {
        if (!seen.contains(c.name)) throw RepositoryError(csv_path.string() + ": schema column '" + c.name + "' missing from header");
    }

    std::vector<Record> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        std::string where = csv_path.string() + ": row " + std::to_string(r + 1);
        if (row.size() != layout.size()) {
            throw RepositoryError(where + ": " + std::to_string(row.size()) + " fields, expected " + std::to_string(layout.size()));
        }
        Record rec;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!layout[i]) {
                if (row[i].text.empty()) continue;
                auto rid = parse_number<RecordId>(row[i].text);
                if (!rid || *rid <= 0) throw RepositoryError(where + ": bad _rid '" + row[i].text + "'");
                rec.rid = *rid;
                continue;
            }
            auto v = parse_cell(row[i], layout[i]->type);
            if (!v) {
                throw RepositoryError(where + ": '" + row[i].text + "' is not a valid " +
                                      std::string(to_string(layout[i]->type)) + " for '" + layout[i]->name + "'");
            }
            rec.fields[layout[i]->name] = std::move(*v);
        }
        records.push_back(std::move(rec));
    }
    return Container::relation(name, std::move(schema), std::move(records));
}

Container read_file_container(const std::string& name, const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Record> records;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            if (!j.is_object()) throw RepositoryError("expected a JSON object");
            records.push_back(record_from_json(j));
        } catch (const std::exception& e) {
            throw RepositoryError(path.string() + ": line " + std::to_string(n) + ": " + e.what());
        }
    }
    return Container::file(name, std::move(records));
}

}  // namespace

std::vector<Container> ingest_directory(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw RepositoryError("data directory " + dir.string() + " does not exist");

    std::map<std::string, fs::path> csvs, schemas, jsonls;
    for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
        if (it->is_directory()) continue;
        std::string rel = fs::relative(it->path(), dir).generic_string();
        if (rel.ends_with(kJsonlExt)) jsonls[strip(rel, kJsonlExt)] = it->path();
        else if (rel.ends_with(kSchemaExt)) schemas[strip(rel, kSchemaExt)] = it->path();
        else if (rel.ends_with(kCsvExt)) csvs[strip(rel, kCsvExt)] = it->path();
        else throw RepositoryError("unexpected file in data directory: " + rel);
    }
    for (const auto& [name, path] : schemas) {
        if (!csvs.contains(name)) throw RepositoryError("schema " + path.string() + " has no matching " + name + ".csv");
    }

    std::vector<Container> out;
    for (const auto& [name, path] : csvs) {
        auto s = schemas.find(name);
        if (s == schemas.end()) throw RepositoryError("relation " + path.string() + " has no " + name + ".schema.json");
        out.push_back(read_relation(name, path, s->second));
    }
    for (const auto& [name, path] : jsonls) out.push_back(read_file_container(name, path));
    return out;
}

std::vector<ProvenanceEdge> ingest_provenance(const fs::path& file) {
    json j;
    try {
        j = json::parse(read_file(file));
    } catch (const json::parse_error& e) {
        throw RepositoryError(file.string() + ": " + e.what());
    }
    if (!j.is_array()) throw RepositoryError(file.string() + ": expected an array of [child, parent] pairs");
    std::vector<ProvenanceEdge> edges;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
            throw RepositoryError(file.string() + ": bad provenance entry " + pair.dump());
        }
        auto child = RecordRef::parse(pair[0].get<std::string>());
        auto parent = RecordRef::parse(pair[1].get<std::string>());
        if (!child || !parent) throw RepositoryError(file.string() + ": bad record ref in " + pair.dump());
        if (child->version == "@") child->version.clear();
        edges.push_back({std::move(*child), std::move(*parent)});
    }
    return edges;
}

Author parse_author(std::string_view text) {
    auto trim = [](std::string_view s) {
        auto b = s.find_first_not_of(" \t");
        if (b == std::string_view::npos) return std::string();
        auto e = s.find_last_not_of(" \t");
        return std::string(s.substr(b, e - b + 1));
    };
    auto lt = text.find('<');
    if (lt != std::string_view::npos && text.ends_with('>')) {
        return {trim(text.substr(0, lt)), std::string(text.substr(lt + 1, text.size() - lt - 2))};
    }
    return {trim(text), std::nullopt};
}

}  // namespace vquel
