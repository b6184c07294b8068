#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vquel/error.hpp"
#include "vquel/session.hpp"

using namespace vquel;
using namespace vquel::testing;

namespace {

std::vector<std::string> drain(StatementBuffer& b) {
    std::vector<std::string> out;
    while (auto s = b.next()) out.push_back(*s);
    return out;
}

}  // namespace

TEST(StatementBuffer, SplitsOnSemicolons) {
    StatementBuffer b;
    b.append("range of V is Version\nretrieve V.id");
    EXPECT_TRUE(drain(b).empty());
    b.append(";\nretrieve V.author; retrieve");
    EXPECT_EQ(drain(b), (std::vector<std::string>{"range of V is Version\nretrieve V.id", "\nretrieve V.author"}));
    EXPECT_FALSE(b.blank());
    b.clear();
    EXPECT_TRUE(b.blank());
}

TEST(StatementBuffer, IgnoresSemicolonsInStringsAndComments) {
    StatementBuffer b;
    b.append("retrieve V.id where V.commit_msg = \"a;\\\"b\" -- c;d\n and V.id = ``x;y'';");
    auto parts = drain(b);
    ASSERT_EQ(parts.size(), 1u);
    EXPECT_NE(parts[0].find("``x;y''"), std::string::npos);
}

TEST(StatementBuffer, TwoCharacterTokensAcrossAppends) {
    StatementBuffer b;
    b.append("x -");
    EXPECT_TRUE(drain(b).empty());
    b.append("- ; comment\n;");
    EXPECT_EQ(drain(b), (std::vector<std::string>{"x -- ; comment\n"}));
}

TEST(Session, KeepsDeclarationsAcrossSubmissions) {
    Repository repo = build(figure1());
    Session s(repo);
    EXPECT_TRUE(s.submit("range of V is Version").empty());
    auto r = s.submit("retrieve V.id where V.id = \"v01\"");
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rows, (std::vector<std::vector<Value>>{{Value("v01")}}));
    EXPECT_EQ(s.kept(), 1u);
}

TEST(Session, FailedSubmissionChangesNothing) {
    Repository repo = build(figure1());
    Session s(repo);
    s.submit("range of V is Version");
    EXPECT_THROW(s.submit("range of R is V.Relations\nretrieve V.bogus"), SemanticError);
    EXPECT_EQ(s.kept(), 1u);
    EXPECT_THROW(s.submit("retrieve R.name"), SemanticError);  // R was not kept
    EXPECT_EQ(s.submit("retrieve V.id").at(0).rows.size(), 2u);
}

TEST(Session, IntoResultsPersistAndResetClears) {
    Repository repo = build(figure1());
    Session s(repo);
    s.submit("range of V is Version\nretrieve into T (V.id as id)");
    EXPECT_EQ(s.submit("retrieve T.id").at(0).rows.size(), 2u);
    s.reset();
    EXPECT_EQ(s.kept(), 0u);
    EXPECT_THROW(s.submit("retrieve T.id"), SemanticError);
}

TEST(Session, ExampleThreeLinesAtATime) {
    Repository repo = build(figure1());
    Session s(repo);
    StatementBuffer b;
    std::vector<ResultSet> out;
    for (const char* line : {"range of V is Version\n", "range of R is V.Relations\n", "retrieve V.commit_ts\n",
                             "where R.name = \"Employee\"\n", ";\n"}) {
        b.append(line);
        while (auto chunk = b.next()) {
            for (auto& r : s.submit(*chunk)) out.push_back(r);
        }
    }
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].rows, (std::vector<std::vector<Value>>{{Value(ts("2014-12-15T10:00:00Z"))}, {Value(ts("2015-03-02T09:30:00Z"))}}));
}
