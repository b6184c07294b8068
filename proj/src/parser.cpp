#include "vquel/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <utility>

namespace vquel {

namespace {

std::string lower(std::string_view s) {
    std::string out;
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::optional<AggOp> lookup_agg(std::string_view name, bool& all) {
    static constexpr std::array<std::pair<std::string_view, AggOp>, 6> ops{{
        {"count", AggOp::Count}, {"sum", AggOp::Sum}, {"avg", AggOp::Avg},
        {"min", AggOp::Min},     {"max", AggOp::Max}, {"any", AggOp::Any},
    }};
    std::string l = lower(name);
    all = l.size() > 4 && l.ends_with("_all");
    if (all) l.resize(l.size() - 4);
    for (const auto& [n, op] : ops) {
        if (n == l) return op;
    }
    return std::nullopt;
}

std::optional<UprefKind> lookup_upref(std::string_view name) {
    if (name == "Version") return UprefKind::Version;
    if (name == "Relation") return UprefKind::Relation;
    if (name == "File") return UprefKind::File;
    return std::nullopt;
}

class Parser {
public:
    Parser(std::span<const Token> tokens, const ParseOptions& options) : toks_(tokens), opts_(options) {}

    QueryProgram program() {
        QueryProgram prog;
        while (!at_end()) {
            if (peek().is_symbol(";")) {
                ++i_;
                continue;
            }
            if (peek().is(Keyword::Range)) {
                prog.statements.emplace_back(range_decl());
            } else if (peek().is(Keyword::Retrieve)) {
                prog.statements.emplace_back(retrieve());
            } else {
                fail("'range' or 'retrieve'");
            }
        }
        if (prog.statements.empty()) {
            throw ParseError("empty program: expected 'range' or 'retrieve'", toks_.empty() ? SourcePos{1, 1} : toks_.back().pos);
        }
        return prog;
    }

private:
    bool at_end() const { return i_ >= toks_.size(); }
    const Token& peek(std::size_t ahead = 0) const {
        static const Token none{};
        return i_ + ahead < toks_.size() ? toks_[i_ + ahead] : none;
    }
    bool has(std::size_t ahead) const { return i_ + ahead < toks_.size(); }
    SourcePos pos() const { return at_end() ? end_pos() : peek().pos; }
    SourcePos end_pos() const {
        if (toks_.empty()) return {1, 1};
        const auto& t = toks_.back();
        return {t.pos.line, t.pos.column + static_cast<int>(t.text.size())};
    }

    [[noreturn]] void fail(std::string_view expected) const {
        std::string found = at_end() ? "end of input" : peek().describe();
        throw ParseError("expected " + std::string(expected) + ", found " + found, pos());
    }

    bool symbol_ahead(std::string_view s, std::size_t ahead = 0) const {
        return has(ahead) && peek(ahead).is_symbol(s);
    }
    bool accept_symbol(std::string_view s) {
        if (!symbol_ahead(s)) return false;
        ++i_;
        return true;
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) fail("'" + std::string(s) + "'");
    }
    bool accept(Keyword kw) {
        if (at_end() || !peek().is(kw)) return false;
        ++i_;
        return true;
    }
    void expect(Keyword kw) {
        if (!accept(kw)) fail("'" + std::string(to_string(kw)) + "'");
    }

    std::string iterator_name(std::string_view what) {
        if (at_end() || peek().kind != TokenKind::Ident) fail(what);
        const Token& t = toks_[i_++];
        if (!opts_.allow_reserved && is_reserved_name(t.text)) {
            throw ParseError("name '" + t.text + "' uses the reserved prefix '" + std::string(kFreshPrefix) + "'", t.pos);
        }
        return t.text;
    }

    // Attribute names after '.' may be keywords (`V.all`).
    std::string attribute_name() {
        if (at_end() || (peek().kind != TokenKind::Ident && peek().kind != TokenKind::Keyword)) fail("attribute name");
        return toks_[i_++].text;
    }

    RangeDecl range_decl() {
        RangeDecl r;
        r.pos = peek().pos;
        expect(Keyword::Range);
        expect(Keyword::Of);
        r.iterator = iterator_name("iterator name");
        expect(Keyword::Is);
        r.source = path(/*in_range=*/true);
        return r;
    }

    RetrieveStmt retrieve() {
        RetrieveStmt s;
        s.pos = peek().pos;
        expect(Keyword::Retrieve);
        if (accept(Keyword::Into)) s.into = iterator_name("name after 'into'");
        if (accept(Keyword::Unique)) s.unique = true;
        if (accept_symbol("(")) {
            s.targets = targets();
            expect_symbol(")");
        } else {
            s.targets = targets();
        }
        if (accept(Keyword::Where)) s.where = or_expr();
        if (accept(Keyword::Sort)) {
            expect(Keyword::By);
            do {
                SortItem item;
                item.expr = or_expr();
                if (accept(Keyword::Desc)) {
                    item.descending = true;
                } else {
                    accept(Keyword::Asc);
                }
                s.sort_by.push_back(std::move(item));
            } while (accept_symbol(","));
        }
        return s;
    }

    std::vector<Target> targets() {
        std::vector<Target> out;
        do {
            Target t;
            t.expr = or_expr();
            if (!at_end() && peek().kind == TokenKind::Ident && lower(peek().text) == "as") {
                ++i_;
                if (at_end() || peek().kind != TokenKind::Ident) fail("alias after 'as'");
                t.alias = toks_[i_++].text;
            }
            out.push_back(std::move(t));
        } while (accept_symbol(","));
        return out;
    }

    PathExpr path(bool in_range) {
        PathExpr p;
        p.pos = pos();
        p.root = iterator_name(in_range ? "'Version' or an iterator name" : "expression");
        if (p.root == "Version" && symbol_ahead("(")) {
            ++i_;
            p.root_filter = filter_terms();
            expect_symbol(")");
        }
        while (accept_symbol(".")) {
            Step s;
            s.pos = pos();
            s.name = attribute_name();
            if (accept_symbol("(")) {
                s.has_parens = true;
                if (!at_end() && peek().kind == TokenKind::Int) {
                    s.hops = int_value(toks_[i_++]);
                } else if (!symbol_ahead(")")) {
                    s.filter = filter_terms();
                }
                expect_symbol(")");
            }
            p.steps.push_back(std::move(s));
        }
        return p;
    }

    std::vector<FilterTerm> filter_terms() {
        std::vector<FilterTerm> out;
        do {
            FilterTerm t;
            t.pos = pos();
            t.attribute = attribute_name();
            auto op = comparator();
            if (!op) fail("comparison operator");
            t.op = *op;
            t.literal = literal_value();
            out.push_back(std::move(t));
        } while (accept_symbol(","));
        return out;
    }

    static std::int64_t int_value(const Token& t) {
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return v;
    }
    static double float_value(const Token& t) {
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return v;
    }

    Value literal_value() {
        bool negative = accept_symbol("-");
        if (at_end()) fail("literal");
        const Token& t = peek();
        if (t.kind == TokenKind::Int) {
            ++i_;
            return negative ? Value(-int_value(t)) : Value(int_value(t));
        }
        if (t.kind == TokenKind::Float) {
            ++i_;
            return negative ? Value(-float_value(t)) : Value(float_value(t));
        }
        if (negative) fail("number");
        if (t.kind == TokenKind::String) {
            ++i_;
            return Value(t.text);
        }
        if (t.is(Keyword::True) || t.is(Keyword::False)) {
            ++i_;
            return Value(t.is(Keyword::True));
        }
        fail("literal");
    }

    std::optional<CompareOp> comparator() {
        static constexpr std::array<std::pair<std::string_view, CompareOp>, 6> ops{{
            {"=", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<", CompareOp::Lt},
            {"<=", CompareOp::Le}, {">", CompareOp::Gt}, {">=", CompareOp::Ge},
        }};
        if (at_end() || peek().kind != TokenKind::Symbol) return std::nullopt;
        for (const auto& [s, op] : ops) {
            if (peek().text == s) {
                ++i_;
                return op;
            }
        }
        return std::nullopt;
    }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (accept(Keyword::Or)) lhs = Expr::make_logic(LogicOp::Or, std::move(lhs), and_expr());
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (accept(Keyword::And)) lhs = Expr::make_logic(LogicOp::And, std::move(lhs), not_expr());
        return lhs;
    }

    Expr not_expr() {
        SourcePos p = pos();
        if (accept(Keyword::Not)) {
            Expr e;
            e.kind = Expr::Kind::Not;
            e.pos = p;
            e.children.push_back(not_expr());
            return e;
        }
        return cmp_expr();
    }

    Expr cmp_expr() {
        Expr lhs = add_expr();
        if (auto op = comparator()) return Expr::make_compare(*op, std::move(lhs), add_expr());
        return lhs;
    }

    Expr binary(ArithOp op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = Expr::Kind::Arith;
        e.arith = op;
        e.pos = lhs.pos;
        e.children.push_back(std::move(lhs));
        e.children.push_back(std::move(rhs));
        return e;
    }

    Expr add_expr() {
        Expr lhs = mul_expr();
        while (true) {
            if (accept_symbol("+")) {
                lhs = binary(ArithOp::Add, std::move(lhs), mul_expr());
            } else if (accept_symbol("-")) {
                lhs = binary(ArithOp::Sub, std::move(lhs), mul_expr());
            } else {
                return lhs;
            }
        }
    }

    Expr mul_expr() {
        Expr lhs = unary_expr();
        while (true) {
            if (accept_symbol("*")) {
                lhs = binary(ArithOp::Mul, std::move(lhs), unary_expr());
            } else if (accept_symbol("/")) {
                lhs = binary(ArithOp::Div, std::move(lhs), unary_expr());
            } else {
                return lhs;
            }
        }
    }

    Expr unary_expr() {
        SourcePos p = pos();
        if (symbol_ahead("-")) {
            if (has(1) && (peek(1).kind == TokenKind::Int || peek(1).kind == TokenKind::Float)) {
                return Expr::make_literal(literal_value(), p);
            }
            ++i_;
            Expr e;
            e.kind = Expr::Kind::Negate;
            e.pos = p;
            e.children.push_back(unary_expr());
            return e;
        }
        return primary();
    }

    Expr primary() {
        if (at_end()) fail("expression");
        const Token& t = peek();
        SourcePos p = t.pos;
        switch (t.kind) {
            case TokenKind::Int:
            case TokenKind::Float:
            case TokenKind::String: return Expr::make_literal(literal_value(), p);
            case TokenKind::Keyword:
                if (t.is(Keyword::True) || t.is(Keyword::False)) return Expr::make_literal(literal_value(), p);
                fail("expression");
            case TokenKind::Symbol:
                if (accept_symbol("(")) {
                    Expr e = or_expr();
                    expect_symbol(")");
                    return e;
                }
                fail("expression");
            case TokenKind::Ident: break;
        }
        if (symbol_ahead("(", 1)) {
            bool all = false;
            if (auto op = lookup_agg(t.text, all)) return aggregate(*op, all);
            if (lower(t.text) == "abs") {
                i_ += 2;
                Expr e;
                e.kind = Expr::Kind::Abs;
                e.pos = p;
                e.children.push_back(or_expr());
                expect_symbol(")");
                return e;
            }
            if (auto kind = lookup_upref(t.text)) {
                bool filter_form = t.text == "Version" && has(3) && !peek(3).is_symbol(")");
                if (!filter_form) return upref(*kind);
            }
        }
        return Expr::make_path(path(/*in_range=*/false));
    }

    Expr upref(UprefKind kind) {
        Expr e;
        e.kind = Expr::Kind::Upref;
        e.pos = peek().pos;
        e.upref = kind;
        i_ += 2;
        e.upref_iterator = iterator_name("iterator name");
        expect_symbol(")");
        while (accept_symbol(".")) e.upref_attrs.push_back(attribute_name());
        return e;
    }

    Expr aggregate(AggOp op, bool all) {
        Expr e;
        e.kind = Expr::Kind::Aggregate;
        e.pos = peek().pos;
        e.agg = op;
        e.agg_all = all;
        i_ += 2;
        e.children.push_back(or_expr());
        if (accept(Keyword::Group)) {
            expect(Keyword::By);
            do {
                e.group_by.push_back(iterator_name("iterator name after 'group by'"));
            } while (accept_symbol(","));
        }
        if (accept(Keyword::Where)) {
            e.has_inner_where = true;
            e.children.push_back(or_expr());
        }
        expect_symbol(")");
        return e;
    }

    std::span<const Token> toks_;
    const ParseOptions& opts_;
    std::size_t i_ = 0;
};

}  // namespace

bool is_reserved_name(std::string_view name) {
    return name.starts_with(kFreshPrefix);
}

QueryProgram parse(std::span<const Token> tokens, const ParseOptions& options) {
    return Parser(tokens, options).program();
}

QueryProgram parse(std::string_view source, const ParseOptions& options) {
    auto tokens = tokenize(source);
    return parse(tokens, options);
}

}  // namespace vquel
