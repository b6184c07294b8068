#include "vquel/json_codec.hpp"

#include "vquel/error.hpp"

namespace vquel {

json value_to_json(const Value& value) {
    switch (value.type()) {
        case Value::Type::Null: return nullptr;
        case Value::Type::Bool: return value.as_bool();
        case Value::Type::Int: return value.as_int();
        case Value::Type::Float: return value.as_float();
        case Value::Type::Str: return value.as_string();
        case Value::Type::Timestamp: return json{{"$ts", format_timestamp(value.as_timestamp())}};
    }
    return nullptr;
}

Value value_from_json(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return Value{};
        case json::value_t::boolean: return Value{j.get<bool>()};
        case json::value_t::number_integer: return Value{j.get<std::int64_t>()};
        case json::value_t::number_unsigned: {
            auto u = j.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) throw RepositoryError("integer out of range: " + j.dump());
            return Value{static_cast<std::int64_t>(u)};
        }
        case json::value_t::number_float: return Value{j.get<double>()};
        case json::value_t::string: return Value{j.get<std::string>()};
        case json::value_t::object:
            if (j.size() == 1 && j.contains("$ts") && j["$ts"].is_string()) {
                if (auto ts = parse_timestamp(j["$ts"].get<std::string>())) return Value{*ts};
            }
            break;
        default: break;
    }
    throw RepositoryError("unsupported JSON value: " + j.dump());
}

json record_to_json(const Record& record) {
    json j = json::object();
    j[kRidKey] = record.rid;
    for (const auto& [name, value] : record.fields) j[name] = value_to_json(value);
    return j;
}

Record record_from_json(const json& j) {
    if (!j.is_object()) throw RepositoryError("record must be a JSON object: " + j.dump());
    Record r;
    for (const auto& [key, value] : j.items()) {
        if (key == kRidKey) {
            if (!value.is_number_integer()) throw RepositoryError("_rid must be an integer");
            r.rid = value.get<RecordId>();
        } else {
            r.fields.emplace(key, value_from_json(value));
        }
    }
    return r;
}

json records_to_json(std::span<const Record> records) {
    json out = json::array();
    for (const auto& r : records) out.push_back(record_to_json(r));
    return out;
}

std::vector<Record> records_from_json(const json& j) {
    if (!j.is_array()) throw RepositoryError("expected an array of records");
    std::vector<Record> out;
    out.reserve(j.size());
    for (const auto& r : j) out.push_back(record_from_json(r));
    return out;
}

}  // namespace vquel
