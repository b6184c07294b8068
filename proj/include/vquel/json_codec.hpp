#pragma once

#include "json.hpp"

#include "vquel/model.hpp"

namespace vquel {

using json = nlohmann::json;

/// Scalars map onto JSON natively; timestamps become `{"$ts": "<RFC 3339>"}`.
json value_to_json(const Value& value);
Value value_from_json(const json& j);  // throws RepositoryError

/// Records are objects with a reserved `"_rid"` key plus their fields.
json record_to_json(const Record& record);
Record record_from_json(const json& j);

json records_to_json(std::span<const Record> records);
std::vector<Record> records_from_json(const json& j);

inline constexpr const char* kRidKey = "_rid";

}  // namespace vquel
