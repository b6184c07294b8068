#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vquel/engine.hpp"

namespace vquel::testing {

/// Golden files hold typed results: `{"query", "fixture", "results": [{"columns",
/// "rows"}]}` with values in the repository JSON encoding.
std::string golden_text(const std::string& query, const std::string& fixture, const std::vector<ResultSet>& results);
std::vector<ResultSet> read_golden(const std::filesystem::path& file);

/// `<dir>/<name>.json`.
std::filesystem::path golden_path(const std::filesystem::path& dir, const std::string& name);

}  // namespace vquel::testing
