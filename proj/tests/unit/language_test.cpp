#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "queries.hpp"
#include "vquel/desugar.hpp"
#include "vquel/error.hpp"
#include "vquel/lexer.hpp"
#include "vquel/parser.hpp"
#include "vquel/validate.hpp"

using namespace vquel;
using namespace vquel::testing;

namespace {

std::vector<std::string> error_messages(std::string_view source) {
    std::vector<std::string> out;
    for (const auto& d : validate(desugar(parse(source)))) {
        if (d.severity == Severity::Error) out.push_back(d.message);
    }
    return out;
}

bool rejects_with(std::string_view source, std::string_view fragment) {
    for (const auto& m : error_messages(source)) {
        if (m.find(fragment) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

// --- lexer

TEST(Lexer, TokensAndPositions) {
    auto t = tokenize("range of V is Version\n  retrieve V.id -- comment\nwhere V.x >= 2.5");
    ASSERT_GE(t.size(), 10u);
    EXPECT_TRUE(t[0].is(Keyword::Range));
    EXPECT_EQ(t[2].kind, TokenKind::Ident);
    EXPECT_EQ(t[2].text, "V");
    EXPECT_TRUE(t[5].is(Keyword::Retrieve));
    EXPECT_EQ(t[5].pos.line, 2);
    EXPECT_EQ(t[5].pos.column, 3);
    EXPECT_EQ(t.back().kind, TokenKind::Float);
    EXPECT_TRUE(t[t.size() - 2].is_symbol(">="));
}

TEST(Lexer, KeywordsIgnoreCase) {
    auto t = tokenize("RANGE Of v IS Version");
    EXPECT_TRUE(t[0].is(Keyword::Range));
    EXPECT_TRUE(t[1].is(Keyword::Of));
    EXPECT_TRUE(t[3].is(Keyword::Is));
}

TEST(Lexer, StringLiterals) {
    auto t = tokenize(R"("a\"b" ``v01'' "tab\t")");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].text, "a\"b");
    EXPECT_EQ(t[1].kind, TokenKind::String);
    EXPECT_EQ(t[1].text, "v01");
    EXPECT_EQ(t[2].text, "tab\t");
}

TEST(Lexer, Errors) {
    try {
        tokenize("retrieve\n  \"open");
        FAIL();
    } catch (const LexError& e) {
        EXPECT_EQ(e.pos().line, 2);
        EXPECT_EQ(e.pos().column, 3);
    }
    EXPECT_THROW(tokenize("a # b"), LexError);
    EXPECT_THROW(tokenize("99999999999999999999"), LexError);
}

// --- parser

TEST(Parser, ExamplesRoundTripThroughSource) {
    for (const auto& q : example_queries()) {
        QueryProgram p = parse(q.text);
        EXPECT_EQ(parse(to_source(p)), p) << q.name;
        EXPECT_EQ(to_source(parse(to_source(p))), to_source(p)) << q.name;
    }
}

TEST(Parser, RandomProgramsRoundTrip) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        Fixture fx = random_fixture(rng);
        std::string text = random_program(rng, fx, {});
        QueryProgram p = parse(text);
        EXPECT_EQ(parse(to_source(p)), p) << text;
    }
}

TEST(Parser, Structure) {
    QueryProgram p = parse(
        "range of E is Version(id = \"v01\").Relations(name = \"Employee\").Tuples\n"
        "retrieve unique E.name as n, count_all(E group by V where E.age > 3)\n"
        "where not (E.age < 3 or E.age >= 10)\n"
        "sort by E.name desc");
    ASSERT_EQ(p.statements.size(), 2u);
    const auto& r = std::get<RangeDecl>(p.statements[0]);
    EXPECT_EQ(r.iterator, "E");
    EXPECT_EQ(r.source.root, "Version");
    ASSERT_EQ(r.source.root_filter.size(), 1u);
    EXPECT_EQ(r.source.steps.size(), 2u);
    const auto& s = std::get<RetrieveStmt>(p.statements[1]);
    EXPECT_TRUE(s.unique);
    EXPECT_EQ(s.targets[0].alias, "n");
    EXPECT_EQ(s.targets[1].expr.kind, Expr::Kind::Aggregate);
    EXPECT_TRUE(s.targets[1].expr.agg_all);
    EXPECT_EQ(s.targets[1].expr.group_by, std::vector<std::string>{"V"});
    EXPECT_TRUE(s.sort_by[0].descending);
}

TEST(Parser, ErrorsCarryLineAndColumn) {
    try {
        parse("range of V is Version\nretrieve (V.id");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.pos().line, 2);
        EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("expected"), std::string::npos);
    }
    EXPECT_THROW(parse("range V is Version"), ParseError);
    EXPECT_THROW(parse("retrieve"), ParseError);
    EXPECT_THROW(parse("range of __g1 is Version"), ParseError);
    EXPECT_NO_THROW(parse("range of __g1 is Version", {.allow_reserved = true}));
}

// --- desugar

TEST(Desugar, VersionFilter) {
    QueryProgram p = desugar(parse("range of V is Version(id = \"v01\")\nretrieve V.id"));
    EXPECT_EQ(to_source(p), to_source(parse("range of __g1 is Version\n"
                                            "retrieve into V (__g1.all) where __g1.id = \"v01\"\n"
                                            "retrieve V.id",
                                            {.allow_reserved = true})));
}

TEST(Desugar, ChainsEachFilteredStep) {
    QueryProgram p = desugar(parse("range of E is Version(id = \"v01\").Relations(name = \"Employee\").Tuples\nretrieve E.all"));
    int ranges = 0, intos = 0;
    for (const auto& s : p.statements) {
        if (std::holds_alternative<RangeDecl>(s)) ++ranges;
        else if (std::get<RetrieveStmt>(s).into) ++intos;
    }
    EXPECT_EQ(ranges, 3);  // __g1 over Version, __g3 over V'.Relations, E over R'.Tuples
    EXPECT_EQ(intos, 2);
    EXPECT_FALSE(has_errors(validate(p)));
}

TEST(Desugar, Idempotent) {
    for (const auto& q : example_queries()) {
        QueryProgram once = desugar(parse(q.text));
        EXPECT_EQ(desugar(once), once) << q.name;
    }
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        Fixture fx = random_fixture(rng);
        QueryProgram once = desugar(parse(random_filtered_program(rng, fx)));
        EXPECT_EQ(desugar(once), once);
    }
}

TEST(Desugar, LeavesFilterFreeProgramsAlone) {
    QueryProgram p = parse("range of V is Version\nretrieve V.id where V.id = \"v01\"");
    EXPECT_EQ(desugar(p), p);
}

// --- validate

TEST(Validate, ExamplesAreClean) {
    for (const auto& q : example_queries()) EXPECT_TRUE(error_messages(q.text).empty()) << q.name;
}

TEST(Validate, Declarations) {
    EXPECT_TRUE(rejects_with("retrieve V.id", "undeclared iterator 'V'"));
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of V is Version\nretrieve V.id", "duplicate iterator"));
    EXPECT_TRUE(rejects_with("range of R is V.Relations\nrange of V is Version\nretrieve R.name", "before its declaration"));
}

TEST(Validate, Steps) {
    EXPECT_TRUE(rejects_with("range of V is Version\nretrieve V.bogus", "unknown attribute 'bogus'"));
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of R is V.Relations\nrange of X is R.P(1)\nretrieve X.id",
                             "applies only to versions"));
    EXPECT_TRUE(rejects_with("range of V is Version\nretrieve V.Relations.name", "must be aggregated"));
    auto raw = validate(parse("range of V is Version(author = \"A\")\nretrieve V.id"));
    ASSERT_FALSE(raw.empty());
    EXPECT_NE(raw[0].message.find("not a filterable attribute"), std::string::npos);
}

TEST(Validate, Aggregates) {
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of R is V.Relations\nretrieve count(R group by V)",
                             "only allowed with _all"));
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of R is V.Relations\nretrieve count(count(R))", "cannot be nested"));
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of R is V.Relations\nretrieve V.id sort by count(R)",
                             "not allowed in 'sort by'"));
    EXPECT_TRUE(rejects_with("range of V is Version\nrange of W is Version\nrange of R is V.Relations\n"
                             "retrieve count_all(R group by W)",
                             "not an ancestor"));
}

TEST(Validate, IntoColumns) {
    EXPECT_TRUE(rejects_with("range of V is Version\nretrieve into T (V.id, V.id)", "duplicate column"));
    EXPECT_TRUE(rejects_with("range of V is Version\nretrieve into T (V.all, V.id)", "must be the only target"));
    // Unaliased columns are named after the attribute or the operator.
    EXPECT_TRUE(error_messages("range of V is Version\nrange of R is V.Relations\n"
                               "retrieve into T (V.id, count(R))\nretrieve T.id, T.count").empty());
    EXPECT_TRUE(rejects_with("range of V is Version\nretrieve into T (V.id + 1)\nretrieve T.id", "needs an alias"));
}

TEST(Validate, SortKeyOutsideTargetsWarns) {
    auto d = validate(parse("range of V is Version\nretrieve V.id sort by V.creation_ts"));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].severity, Severity::Warning);
    EXPECT_NE(d[0].to_string().find("warning:"), std::string::npos);
}
