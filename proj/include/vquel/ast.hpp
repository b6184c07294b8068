#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vquel/error.hpp"
#include "vquel/value.hpp"

namespace vquel {

/// Source position attached to an AST node. Positions are metadata: they
/// never take part in structural equality.
struct NodePos : SourcePos {
    NodePos() = default;
    NodePos(SourcePos p) : SourcePos(p) {}
    bool operator==(const NodePos&) const { return true; }
};

/// Reserved prefix of iterators introduced by desugaring.
inline constexpr std::string_view kFreshPrefix = "__g";

/// `attribute cmp literal` inside a path filter such as `Version(id = "v01")`.
struct FilterTerm {
    std::string attribute;
    CompareOp op = CompareOp::Eq;
    Value literal;
    NodePos pos;

    bool operator==(const FilterTerm&) const = default;
};

struct Step {
    std::string name;
    bool has_parens = false;             // `P()` as opposed to `P`
    std::optional<std::int64_t> hops;    // `P(2)`
    std::vector<FilterTerm> filter;      // `Relations(name = "Employee")`
    NodePos pos;

    bool operator==(const Step&) const = default;
};

struct PathExpr {
    std::string root;                     // "Version" or an iterator name
    std::vector<FilterTerm> root_filter;  // `Version(id = "v01")`
    std::vector<Step> steps;
    NodePos pos;

    bool root_is_version_set() const { return root == "Version"; }
    bool has_filters() const;
    bool operator==(const PathExpr&) const = default;
};

enum class AggOp { Count, Sum, Avg, Min, Max, Any };
enum class UprefKind { Version, Relation, File };
enum class ArithOp { Add, Sub, Mul, Div };
enum class LogicOp { And, Or };

std::string_view to_string(AggOp op);
std::string_view to_string(UprefKind kind);

struct Expr {
    enum class Kind { Literal, Path, Upref, Negate, Not, Arith, Compare, Logic, Abs, Aggregate };

    Kind kind = Kind::Literal;
    NodePos pos;

    Value literal;                      // Literal
    PathExpr path;                      // Path
    UprefKind upref = UprefKind::Version;  // Upref: Version(x).a.b
    std::string upref_iterator;
    std::vector<std::string> upref_attrs;
    ArithOp arith = ArithOp::Add;       // Arith
    CompareOp cmp = CompareOp::Eq;      // Compare
    LogicOp logic = LogicOp::And;       // Logic
    AggOp agg = AggOp::Count;           // Aggregate
    bool agg_all = false;               // count_all and friends
    std::vector<std::string> group_by;
    bool has_inner_where = false;       // children[1] holds it

    // Operands: unary ops and Abs hold one child, binary ops two, an
    // aggregate holds its argument and optionally its inner where.
    std::vector<Expr> children;

    static Expr make_literal(Value v, SourcePos pos = {});
    static Expr make_path(PathExpr p);
    static Expr make_compare(CompareOp op, Expr lhs, Expr rhs);
    static Expr make_logic(LogicOp op, Expr lhs, Expr rhs);

    const Expr* inner_where() const { return has_inner_where ? &children[1] : nullptr; }
    bool contains_aggregate() const;

    bool operator==(const Expr&) const = default;
};

struct RangeDecl {
    std::string iterator;
    PathExpr source;
    NodePos pos;

    bool operator==(const RangeDecl&) const = default;
};

struct Target {
    Expr expr;
    std::optional<std::string> alias;

    bool operator==(const Target&) const = default;
};

struct SortItem {
    Expr expr;
    bool descending = false;

    bool operator==(const SortItem&) const = default;
};

struct RetrieveStmt {
    std::optional<std::string> into;
    bool unique = false;
    std::vector<Target> targets;
    std::optional<Expr> where;
    std::vector<SortItem> sort_by;
    NodePos pos;

    bool operator==(const RetrieveStmt&) const = default;
};

using Statement = std::variant<RangeDecl, RetrieveStmt>;

struct QueryProgram {
    std::vector<Statement> statements;

    bool operator==(const QueryProgram&) const = default;
};

/// Canonical source text; parsing it yields a structurally equal AST.
std::string to_source(const QueryProgram& program);
std::string to_source(const Statement& statement);
std::string to_source(const Expr& expr);
std::string to_source(const PathExpr& path);

/// Visits every expression node (pre-order), including aggregate children.
template <class F>
void walk(const Expr& e, F&& f) {
    f(e);
    for (const auto& c : e.children) walk(c, f);
}

}  // namespace vquel
