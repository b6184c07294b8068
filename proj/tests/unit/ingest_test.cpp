#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <unistd.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "vquel/error.hpp"
#include "vquel/ingest.hpp"

using namespace vquel;
using namespace vquel::testing;
namespace fs = std::filesystem;

namespace {

class Scratch {
public:
    Scratch() {
        static int n = 0;
        root_ = fs::temp_directory_path() / ("vquel-ingest-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::remove_all(root_);
        fs::create_directories(root_ / "data");
    }
    ~Scratch() { fs::remove_all(root_); }
    fs::path data() const { return root_ / "data"; }
    fs::path root() const { return root_; }
    void write(const std::string& rel, const std::string& text) const {
        fs::path p = data() / rel;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << text;
    }

private:
    fs::path root_;
};

std::vector<Container> sorted(std::vector<Container> cs) {
    std::ranges::sort(cs, {}, &Container::name);
    return cs;
}

}  // namespace

TEST(Ingest, FixtureCommitsRoundTrip) {
    for (const auto& f : all_fixtures()) {
        for (const auto& c : f.commits) {
            Scratch s;
            write_commit_data(c, s.data(), s.root() / "prov.json");
            EXPECT_EQ(sorted(ingest_directory(s.data())), sorted(c.containers)) << f.name << "/" << c.id;
            if (!c.provenance.empty()) {
                EXPECT_EQ(ingest_provenance(s.root() / "prov.json"), c.provenance);
            }
        }
    }
}

TEST(Ingest, RandomCommitsRoundTrip) {
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
        Fixture fx = random_fixture(rng);
        for (const auto& c : fx.commits) {
            Scratch s;
            write_commit_data(c, s.data(), s.root() / "prov.json");
            EXPECT_EQ(sorted(ingest_directory(s.data())), sorted(c.containers));
        }
    }
}

TEST(Ingest, TypedCellsNullsAndEmptyStrings) {
    Scratch s;
    s.write("T.schema.json", R"({"s": "string", "i": "int", "f": "float", "b": "bool", "t": "timestamp"})");
    s.write("T.csv", "b,s,i,t,f\r\ntrue,\"\",-3,2015-01-01,0.5\r\n,,,,\r\nfalse,plain,7,01/02/2015,\"2\"\r\n");
    auto cs = ingest_directory(s.data());
    ASSERT_EQ(cs.size(), 1u);
    const Container& t = cs[0];
    ASSERT_EQ(t.schema.size(), 5u);
    EXPECT_EQ(t.schema[0], (Column{"s", ColumnType::String}));
    EXPECT_EQ(t.schema[4], (Column{"t", ColumnType::Timestamp}));
    ASSERT_EQ(t.records.size(), 3u);
    EXPECT_EQ(t.records[0].rid, kUnassignedRid);
    EXPECT_EQ(t.records[0].fields.at("s"), Value(""));
    EXPECT_EQ(t.records[0].fields.at("i"), Value(-3));
    EXPECT_EQ(t.records[0].fields.at("t"), Value(ts("2015-01-01")));
    for (const auto& [k, v] : t.records[1].fields) EXPECT_TRUE(v.is_null()) << k;
    EXPECT_EQ(t.records[2].fields.at("s"), Value("plain"));
    EXPECT_EQ(t.records[2].fields.at("f"), Value(2.0));
}

TEST(Ingest, FilesKeepTheirPath) {
    Scratch s;
    s.write("logs/app.log.jsonl", "{\"_rid\": 4, \"level\": \"info\"}\n\n{\"n\": 2, \"at\": {\"$ts\": \"2015-01-01T00:00:00Z\"}}\n");
    auto cs = ingest_directory(s.data());
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_EQ(cs[0].kind, ContainerKind::File);
    EXPECT_EQ(cs[0].name, "logs/app.log");
    ASSERT_EQ(cs[0].records.size(), 2u);
    EXPECT_EQ(cs[0].records[0].rid, 4);
    EXPECT_EQ(cs[0].records[1].fields.at("at"), Value(ts("2015-01-01")));
}

TEST(Ingest, Rejections) {
    auto fails = [](auto setup, std::string_view fragment) {
        Scratch s;
        setup(s);
        try {
            ingest_directory(s.data());
            return false;
        } catch (const RepositoryError& e) {
            return std::string(e.what()).find(fragment) != std::string::npos;
        }
    };
    EXPECT_TRUE(fails([](const Scratch& s) { s.write("T.csv", "a\n1\n"); }, "no T.schema.json"));
    EXPECT_TRUE(fails([](const Scratch& s) { s.write("T.schema.json", "{\"a\": \"int\"}"); }, "no matching"));
    EXPECT_TRUE(fails([](const Scratch& s) { s.write("README.md", "hi"); }, "unexpected file"));
    EXPECT_TRUE(fails([](const Scratch& s) {
        s.write("T.schema.json", "{\"a\": \"int\"}");
        s.write("T.csv", "a\nx\n");
    }, "not a valid int"));
    EXPECT_TRUE(fails([](const Scratch& s) {
        s.write("T.schema.json", "{\"a\": \"int\"}");
        s.write("T.csv", "a,b\n1,2\n");
    }, "not in the schema"));
    EXPECT_TRUE(fails([](const Scratch& s) {
        s.write("T.schema.json", "{\"a\": \"int\", \"b\": \"int\"}");
        s.write("T.csv", "a\n1\n");
    }, "missing from header"));
    EXPECT_TRUE(fails([](const Scratch& s) {
        s.write("T.schema.json", "{\"a\": \"decimal\"}");
        s.write("T.csv", "a\n1\n");
    }, "unknown type"));
    EXPECT_TRUE(fails([](const Scratch& s) {
        s.write("T.schema.json", "{\"a\": \"int\"}");
        s.write("T.csv", "a\n1,2\n");
    }, "expected 1"));
    EXPECT_TRUE(fails([](const Scratch& s) { s.write("f.jsonl", "[1]\n"); }, "line 1"));
    EXPECT_THROW(ingest_directory("/nonexistent/vquel"), RepositoryError);
}

TEST(Ingest, Provenance) {
    Scratch s;
    std::ofstream(s.root() / "p.json") << R"([["@/S/1", "r2/S/1"], ["v9/data/f.jsonl/3", "r1/data/f.jsonl/2"]])";
    auto edges = ingest_provenance(s.root() / "p.json");
    ASSERT_EQ(edges.size(), 2u);
    EXPECT_EQ(edges[0].child, (RecordRef{"", "S", 1}));
    EXPECT_EQ(edges[1].parent, (RecordRef{"r1", "data/f.jsonl", 2}));
    std::ofstream(s.root() / "bad.json") << R"([["@/S/x", "r2/S/1"]])";
    EXPECT_THROW(ingest_provenance(s.root() / "bad.json"), RepositoryError);
}

TEST(Author, Parsing) {
    EXPECT_EQ(parse_author("Alice <alice@example.com>"), (Author{"Alice", "alice@example.com"}));
    EXPECT_EQ(parse_author("  Bob  "), (Author{"Bob", std::nullopt}));
}
