#include "vquel/ast.hpp"

#include <sstream>

namespace vquel {

bool PathExpr::has_filters() const {
    if (!root_filter.empty()) return true;
    for (const auto& s : steps) {
        if (!s.filter.empty()) return true;
    }
    return false;
}

std::string_view to_string(AggOp op) {
    switch (op) {
        case AggOp::Count: return "count";
        case AggOp::Sum: return "sum";
        case AggOp::Avg: return "avg";
        case AggOp::Min: return "min";
        case AggOp::Max: return "max";
        case AggOp::Any: return "any";
    }
    return "?";
}

std::string_view to_string(UprefKind kind) {
    switch (kind) {
        case UprefKind::Version: return "Version";
        case UprefKind::Relation: return "Relation";
        case UprefKind::File: return "File";
    }
    return "?";
}

Expr Expr::make_literal(Value v, SourcePos pos) {
    Expr e;
    e.kind = Kind::Literal;
    e.literal = std::move(v);
    e.pos = pos;
    return e;
}

Expr Expr::make_path(PathExpr p) {
    Expr e;
    e.kind = Kind::Path;
    e.pos = p.pos;
    e.path = std::move(p);
    return e;
}

Expr Expr::make_compare(CompareOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Compare;
    e.cmp = op;
    e.pos = lhs.pos;
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
}

Expr Expr::make_logic(LogicOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Logic;
    e.logic = op;
    e.pos = lhs.pos;
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
}

bool Expr::contains_aggregate() const {
    bool found = false;
    walk(*this, [&](const Expr& e) { found = found || e.kind == Kind::Aggregate; });
    return found;
}

namespace {

std::string literal_source(const Value& v) {
    if (v.type() == Value::Type::Bool) return v.as_bool() ? "true" : "false";
    if (v.type() == Value::Type::Timestamp) return Value(format_timestamp(v.as_timestamp())).to_literal();
    return v.to_literal();
}

void print_filter(std::ostream& os, const std::vector<FilterTerm>& terms) {
    os << '(';
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) os << ", ";
        os << terms[i].attribute << ' ' << to_string(terms[i].op) << ' ' << literal_source(terms[i].literal);
    }
    os << ')';
}

void print_path(std::ostream& os, const PathExpr& p) {
    os << p.root;
    if (!p.root_filter.empty()) print_filter(os, p.root_filter);
    for (const auto& s : p.steps) {
        os << '.' << s.name;
        if (!s.filter.empty()) {
            print_filter(os, s.filter);
        } else if (s.hops) {
            os << '(' << *s.hops << ')';
        } else if (s.has_parens) {
            os << "()";
        }
    }
}

std::string_view arith_symbol(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return "+";
        case ArithOp::Sub: return "-";
        case ArithOp::Mul: return "*";
        case ArithOp::Div: return "/";
    }
    return "?";
}

void print_expr(std::ostream& os, const Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
        case K::Literal: os << literal_source(e.literal); break;
        case K::Path: print_path(os, e.path); break;
        case K::Upref:
            os << to_string(e.upref) << '(' << e.upref_iterator << ')';
            for (const auto& a : e.upref_attrs) os << '.' << a;
            break;
        case K::Negate:
            os << "(-(";
            print_expr(os, e.children[0]);
            os << "))";
            break;
        case K::Not:
            os << "(not ";
            print_expr(os, e.children[0]);
            os << ')';
            break;
        case K::Arith:
        case K::Compare:
        case K::Logic:
            os << '(';
            print_expr(os, e.children[0]);
            if (e.kind == K::Arith) os << ' ' << arith_symbol(e.arith) << ' ';
            if (e.kind == K::Compare) os << ' ' << to_string(e.cmp) << ' ';
            if (e.kind == K::Logic) os << (e.logic == LogicOp::And ? " and " : " or ");
            print_expr(os, e.children[1]);
            os << ')';
            break;
        case K::Abs:
            os << "abs(";
            print_expr(os, e.children[0]);
            os << ')';
            break;
        case K::Aggregate:
            os << to_string(e.agg) << (e.agg_all ? "_all(" : "(");
            print_expr(os, e.children[0]);
            if (!e.group_by.empty()) {
                os << " group by ";
                for (std::size_t i = 0; i < e.group_by.size(); ++i) os << (i ? ", " : "") << e.group_by[i];
            }
            if (e.has_inner_where) {
                os << " where ";
                print_expr(os, e.children[1]);
            }
            os << ')';
            break;
    }
}

void print_statement(std::ostream& os, const Statement& st) {
    if (const auto* r = std::get_if<RangeDecl>(&st)) {
        os << "range of " << r->iterator << " is ";
        print_path(os, r->source);
        return;
    }
    const auto& s = std::get<RetrieveStmt>(st);
    os << "retrieve";
    if (s.into) os << " into " << *s.into;
    if (s.unique) os << " unique";
    os << " (";
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, s.targets[i].expr);
        if (s.targets[i].alias) os << " as " << *s.targets[i].alias;
    }
    os << ')';
    if (s.where) {
        os << " where ";
        print_expr(os, *s.where);
    }
    if (!s.sort_by.empty()) {
        os << " sort by ";
        for (std::size_t i = 0; i < s.sort_by.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, s.sort_by[i].expr);
            if (s.sort_by[i].descending) os << " desc";
        }
    }
}

}  // namespace

std::string to_source(const QueryProgram& program) {
    std::ostringstream os;
    for (const auto& st : program.statements) {
        print_statement(os, st);
        os << '\n';
    }
    return os.str();
}

std::string to_source(const Statement& statement) {
    std::ostringstream os;
    print_statement(os, statement);
    return os.str();
}

std::string to_source(const Expr& expr) {
    std::ostringstream os;
    print_expr(os, expr);
    return os.str();
}

std::string to_source(const PathExpr& path) {
    std::ostringstream os;
    print_path(os, path);
    return os.str();
}

}  // namespace vquel
