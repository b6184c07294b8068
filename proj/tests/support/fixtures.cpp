#include "fixtures.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "vquel/json_codec.hpp"

namespace vquel::testing {

namespace fs = std::filesystem;

Timestamp ts(std::string_view text) {
    auto t = parse_timestamp(text);
    if (!t) throw std::invalid_argument("bad fixture timestamp " + std::string(text));
    return *t;
}

namespace {

std::vector<Column> employee_schema() {
    return {{"employee_id", ColumnType::String},
            {"first_name", ColumnType::String},
            {"last_name", ColumnType::String},
            {"age", ColumnType::Int},
            {"dept_id", ColumnType::String}};
}

Record employee(std::string id, std::string first, std::string last, std::int64_t age, std::string dept) {
    Record r;
    r.fields = {{"employee_id", Value(std::move(id))},
                {"first_name", Value(std::move(first))},
                {"last_name", Value(std::move(last))},
                {"age", Value(age)},
                {"dept_id", Value(std::move(dept))}};
    return r;
}

Container departments(std::vector<std::pair<std::string, std::string>> rows) {
    std::vector<Record> recs;
    for (auto& [id, name] : rows) {
        Record r;
        r.fields = {{"dept_id", Value(id)}, {"name", Value(name)}};
        recs.push_back(std::move(r));
    }
    return Container::relation("Department", {{"dept_id", ColumnType::String}, {"name", ColumnType::String}},
                               std::move(recs));
}

CommitRequest commit(std::string id, std::vector<std::string> parents, std::string author, std::string when,
                     std::string message, std::vector<Container> containers) {
    CommitRequest c;
    c.id = std::move(id);
    c.parents = std::move(parents);
    c.author = Author{std::move(author), std::nullopt};
    c.creation_ts = ts(when);
    c.message = std::move(message);
    c.containers = std::move(containers);
    return c;
}

std::string numbered(const char* prefix, int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03d", prefix, n);
    return buf;
}

// Employees e<from>..e<to> with deterministic names and ages.
std::vector<Record> employee_range(int from, int to, const std::string& last_name = "") {
    static const char* lasts[] = {"Smith", "Jones", "Lee", "Patel", "Garcia"};
    std::vector<Record> out;
    for (int i = from; i <= to; ++i) {
        std::string last = last_name.empty() ? lasts[i % 5] : last_name;
        out.push_back(employee(numbered("e", i), "F" + std::to_string(i), last, 20 + (i * 7) % 45, i % 2 ? "d01" : "d02"));
    }
    return out;
}

}  // namespace

Fixture figure1() {
    Fixture f{"figure1", {}};
    auto v01 = commit("v01", {}, "Alice", "2014-12-15T10:00:00Z", "Initial load",
                      {Container::relation("Employee", employee_schema(),
                                           {employee("e01", "John", "Smith", 52, "d01"),
                                            employee("e02", "Mary", "Jones", 38, "d02"),
                                            employee("e03", "Peter", "Smith", 61, "d01")}),
                       departments({{"d01", "Engineering"}, {"d02", "Sales"}})});
    v01.author.email = "alice@example.com";
    f.commits.push_back(v01);

    std::vector<Record> forms;
    for (auto [form, emp] : {std::pair{"f1", "e04"}, std::pair{"f2", "e05"}}) {
        Record r;
        r.rid = form == std::string("f1") ? 1 : 2;
        r.fields = {{"form_id", Value(form)}, {"employee_id", Value(emp)}, {"kind", Value("onboarding")}};
        forms.push_back(std::move(r));
    }
    auto v02 = commit("v02", {"v01"}, "Alice", "2015-03-02T09:30:00Z", "Add new hires and Forms.csv",
                      {Container::relation("Employee", employee_schema(),
                                           {employee("e01", "John", "Smith", 52, "d01"),
                                            employee("e02", "Mary", "Jones", 38, "d02"),
                                            employee("e03", "Peter", "Smith", 61, "d01"),
                                            employee("e04", "Ann", "Lee", 29, "d02"),
                                            employee("e05", "Raj", "Patel", 55, "d01")}),
                       departments({{"d01", "Engineering"}, {"d02", "Sales"}, {"d03", "Marketing"}}),
                       Container::file("Forms.csv", forms)});
    v02.author.email = "alice@example.com";
    // Onboarding forms derive from the departments they were filed with.
    v02.provenance = {{{"", "Forms.csv", 1}, {"v01", "Department", 2}},
                      {{"", "Forms.csv", 2}, {"v01", "Department", 1}}};
    f.commits.push_back(v02);
    return f;
}

Fixture smith() {
    Fixture f{"smith", {}};
    auto contractors = [] {
        std::vector<Record> recs = employee_range(501, 510, "Smith");
        return Container::relation("Contractor", employee_schema(), recs);
    };
    std::vector<Record> s1 = employee_range(1, 100, "Smith");
    for (auto& r : employee_range(101, 105, "Jones")) s1.push_back(r);
    f.commits.push_back(commit("s1", {}, "Bob", "2015-01-10T08:00:00Z", "Smith load",
                               {Container::relation("Employee", employee_schema(), s1), contractors(),
                                departments({{"d01", "Engineering"}, {"d02", "Sales"}})}));

    std::vector<Record> s2 = employee_range(1, 98, "Smith");
    s2.push_back(employee_range(101, 101, "Jones")[0]);
    f.commits.push_back(commit("s2", {"s1"}, "Bob", "2015-02-10T08:00:00Z", "Trim staff",
                               {Container::relation("Employee", employee_schema(), s2),
                                departments({{"d01", "Engineering"}})}));

    std::vector<Record> s3 = employee_range(1, 100, "Smith");
    for (auto& r : employee_range(101, 103, "Jones")) s3.push_back(r);
    f.commits.push_back(commit("s3", {"s2"}, "Carol", "2015-03-10T08:00:00Z", "Rehire",
                               {Container::relation("Employee", employee_schema(), s3), contractors(),
                                departments({{"d01", "Engineering"}, {"d02", "Sales"}})}));
    return f;
}

Fixture join() {
    Fixture f{"join", {}};
    auto s_rel = [] {
        std::vector<Record> recs;
        for (int i = 1; i <= 10; ++i) {
            Record r;
            r.fields = {{"id", Value(std::int64_t{i})}, {"label", Value("s" + std::to_string(i))}};
            recs.push_back(std::move(r));
        }
        return Container::relation("S", {{"id", ColumnType::Int}, {"label", ColumnType::String}}, recs);
    };
    auto t_rel = [](int matching, int dangling) {
        std::vector<Record> recs;
        for (int i = 0; i < matching + dangling; ++i) {
            Record r;
            std::int64_t s_id = i < matching ? 1 + i % 10 : 99;
            r.fields = {{"t_id", Value(std::int64_t{i + 1})}, {"s_id", Value(s_id)}};
            recs.push_back(std::move(r));
        }
        return Container::relation("T", {{"t_id", ColumnType::Int}, {"s_id", ColumnType::Int}}, recs);
    };
    f.commits.push_back(commit("j1", {}, "Dana", "2016-01-01T00:00:00Z", "Join 110", {s_rel(), t_rel(110, 5)}));
    f.commits.push_back(commit("j2", {"j1"}, "Dana", "2016-01-02T00:00:00Z", "Join 50", {s_rel(), t_rel(50, 5)}));
    f.commits.push_back(commit("j3", {"j2"}, "Dana", "2016-01-03T00:00:00Z", "Join 100", {s_rel(), t_rel(100, 0)}));
    return f;
}

Fixture chain() {
    Fixture f{"chain", {}};
    auto s_rel = [](std::vector<std::tuple<RecordId, std::string, std::string>> rows) {
        std::vector<Record> recs;
        for (auto& [rid, sid, attr] : rows) {
            Record r;
            r.rid = rid;
            r.fields = {{"sid", Value(sid)}, {"attr", Value(attr)}};
            recs.push_back(std::move(r));
        }
        return Container::relation("S", {{"sid", ColumnType::String}, {"attr", ColumnType::String}}, recs);
    };
    auto emp = [](int from, int to) { return Container::relation("Employee", employee_schema(), employee_range(from, to)); };
    auto old_s = [&] { return s_rel({{1, "a", "x"}, {2, "b", "y"}, {3, "c", "x"}}); };
    auto new_s = [&] { return s_rel({{1, "a", "x"}, {2, "b", "y"}, {3, "c", "x"}, {4, "d", "z"}, {5, "e", "x"}}); };

    f.commits.push_back(commit("r1", {}, "Erin", "2013-01-01T00:00:00Z", "Root", {emp(1, 120), old_s()}));
    f.commits.push_back(commit("r2", {"r1"}, "Erin", "2013-02-01T00:00:00Z", "Shrink", {emp(1, 90), old_s()}));
    f.commits.push_back(commit("b1", {"r2"}, "Frank", "2013-02-15T00:00:00Z", "Side branch", {emp(1, 50), old_s()}));
    auto v01 = commit("v01", {"r2"}, "Erin", "2013-03-01T00:00:00Z", "Main line", {emp(41, 140), new_s()});
    v01.provenance = {{{"", "S", 1}, {"r2", "S", 1}},
                      {{"", "S", 1}, {"r1", "S", 2}},
                      {{"", "S", 3}, {"r2", "S", 3}},
                      {{"", "S", 2}, {"r1", "S", 2}},
                      {{"", "S", 4}, {"r1", "S", 1}}};
    f.commits.push_back(v01);
    f.commits.push_back(commit("d1", {"v01"}, "Erin", "2013-04-01T00:00:00Z", "Trim", {emp(41, 139), new_s()}));
    std::vector<Record> depts;
    for (int i = 1; i <= 60; ++i) {
        Record r;
        r.fields = {{"dept_id", Value(numbered("d", i))}, {"name", Value("Dept " + std::to_string(i))}};
        depts.push_back(std::move(r));
    }
    f.commits.push_back(commit("d2", {"d1"}, "Erin", "2013-05-01T00:00:00Z", "Grow",
                               {emp(1, 150), new_s(),
                                Container::relation("Department", {{"dept_id", ColumnType::String}, {"name", ColumnType::String}},
                                                    depts)}));
    f.commits.push_back(commit("d3", {"d2"}, "Erin", "2013-06-01T00:00:00Z", "Collapse", {emp(1, 10), new_s()}));
    return f;
}

Fixture diff_pair() {
    Fixture f{"diff_pair", {}};
    f.commits.push_back(commit("v01", {}, "Alice", "2015-05-01T00:00:00Z", "Before",
                               {Container::relation("Employee", employee_schema(),
                                                    {employee("e01", "John", "Smith", 52, "d01"),
                                                     employee("e02", "Mary", "Jones", 38, "d02"),
                                                     employee("e03", "Peter", "Smith", 61, "d01")})}));
    f.commits.push_back(commit("v02", {"v01"}, "Alice", "2015-06-01T00:00:00Z", "After",
                               {Container::relation("Employee", employee_schema(),
                                                    {employee("e01", "John", "Smith", 53, "d01"),
                                                     employee("e02", "Mary", "Jones", 38, "d02"),
                                                     employee("e04", "Ann", "Lee", 29, "d02")})}));
    return f;
}

std::vector<Fixture> all_fixtures() {
    return {figure1(), smith(), join(), chain(), diff_pair()};
}

Repository build(const Fixture& fixture) {
    Repository repo;
    for (const auto& c : fixture.commits) repo.commit(c);
    return repo;
}

namespace {

std::string csv_cell(const Value& v) {
    if (v.is_null()) return "";
    if (v.type() != Value::Type::Str) return v.to_string();
    std::string out = "\"";
    for (char c : v.as_string()) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_commit_data(const CommitRequest& commit, const fs::path& data_dir, const fs::path& prov_file) {
    fs::create_directories(data_dir);
    for (const auto& c : commit.containers) {
        if (c.is_relation()) {
            nlohmann::ordered_json schema = nlohmann::ordered_json::object();
            for (const auto& col : c.schema) schema[col.name] = std::string(to_string(col.type));
            std::ofstream(data_dir / (c.name + ".schema.json")) << schema.dump(2) << '\n';
            std::ofstream out(data_dir / (c.name + ".csv"));
            out << "_rid";
            for (const auto& col : c.schema) out << ',' << col.name;
            out << '\n';
            for (const auto& r : c.records) {
                out << (r.rid == kUnassignedRid ? std::string() : std::to_string(r.rid));
                for (const auto& col : c.schema) {
                    auto it = r.fields.find(col.name);
                    out << ',' << (it == r.fields.end() ? std::string() : csv_cell(it->second));
                }
                out << '\n';
            }
        } else {
            fs::path file = data_dir / (c.name + ".jsonl");
            fs::create_directories(file.parent_path());
            std::ofstream out(file);
            for (const auto& r : c.records) {
                json j = record_to_json(r);
                if (r.rid == kUnassignedRid) j.erase(kRidKey);
                out << j.dump() << '\n';
            }
        }
    }
    if (!commit.provenance.empty()) {
        json edges = json::array();
        for (const auto& e : commit.provenance) {
            RecordRef child = e.child;
            if (child.version.empty()) child.version = "@";
            edges.push_back(json::array({child.to_string(), e.parent.to_string()}));
        }
        std::ofstream(prov_file) << edges.dump(2) << '\n';
    }
}

}  // namespace vquel::testing
