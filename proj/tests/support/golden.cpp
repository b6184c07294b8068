#include "golden.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vquel/json_codec.hpp"

namespace vquel::testing {

std::string golden_text(const std::string& query, const std::string& fixture, const std::vector<ResultSet>& results) {
    // One row per line keeps diffs readable.
    std::string out = "{\"query\": " + json(query).dump() + ", \"fixture\": " + json(fixture).dump() + ", \"results\": [";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const ResultSet& rs = results[i];
        out += i ? ",\n {" : "\n {";
        out += "\"columns\": " + json(rs.columns).dump() + ", \"rows\": [";
        for (std::size_t r = 0; r < rs.rows.size(); ++r) {
            json row = json::array();
            for (const auto& v : rs.rows[r]) row.push_back(value_to_json(v));
            out += (r ? ",\n  " : "\n  ") + row.dump();
        }
        out += "]}";
    }
    return out + "]}\n";
}

std::vector<ResultSet> read_golden(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("missing golden file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str());
    std::vector<ResultSet> out;
    for (const auto& r : doc.at("results")) {
        ResultSet rs;
        rs.columns = r.at("columns").get<std::vector<std::string>>();
        for (const auto& row : r.at("rows")) {
            std::vector<Value> values;
            for (const auto& v : row) values.push_back(value_from_json(v));
            rs.rows.push_back(std::move(values));
        }
        out.push_back(std::move(rs));
    }
    return out;
}

std::filesystem::path golden_path(const std::filesystem::path& dir, const std::string& name) {
    return dir / (name + ".json");
}

}  // namespace vquel::testing
