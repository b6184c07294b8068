#include "vquel/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "vquel/semantics.hpp"

namespace vquel {

std::string Diagnostic::to_string() const {
    std::string out = pos.valid() ? pos.to_string() + ": " : std::string();
    out += severity == Severity::Error ? "error: " : "warning: ";
    return out + message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

void throw_on_errors(const std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : diagnostics) {
        if (d.severity == Severity::Error) throw SemanticError(d.message, d.pos);
    }
}

bool is_all_path(const Expr& e) {
    return e.kind == Expr::Kind::Path && !e.path.steps.empty() && e.path.steps.back().name == "all";
}

std::optional<std::string> derived_column_name(const Target& target) {
    if (target.alias) return target.alias;
    const Expr& e = target.expr;
    if (e.kind == Expr::Kind::Path && !e.path.steps.empty() && !is_all_path(e)) return e.path.steps.back().name;
    if (e.kind == Expr::Kind::Upref && !e.upref_attrs.empty()) return e.upref_attrs.back();
    if (e.kind == Expr::Kind::Aggregate) return std::string(to_string(e.agg)) + (e.agg_all ? "_all" : "");
    return std::nullopt;
}

std::string column_label(const Target& target) {
    if (target.alias) return *target.alias;
    return to_source(target.expr);
}

namespace {

struct IterInfo {
    EntityKind kind = EntityKind::Unknown;
    std::vector<std::string> ancestors;  // named ancestors, nearest first
    std::optional<std::vector<std::string>> columns;
    bool derived = false;
    std::size_t index = 0;  // declaration order
};

struct ExprContext {
    bool in_aggregate = false;
    bool allow_set = false;  // the aggregate argument itself
    bool allow_all = false;  // a target, or an operand of = / !=
};

class Validator {
public:
    explicit Validator(const QueryProgram& program) : program_(program) {
        for (std::size_t i = 0; i < program.statements.size(); ++i) {
            const auto& st = program.statements[i];
            if (const auto* r = std::get_if<RangeDecl>(&st)) {
                first_decl_.emplace(r->iterator, i);
            } else if (const auto& s = std::get<RetrieveStmt>(st); s.into) {
                first_decl_.emplace(*s.into, i);
            }
        }
    }

    std::vector<Diagnostic> run() {
        for (stmt_ = 0; stmt_ < program_.statements.size(); ++stmt_) {
            const auto& st = program_.statements[stmt_];
            if (const auto* r = std::get_if<RangeDecl>(&st)) {
                range(*r);
            } else {
                retrieve(std::get<RetrieveStmt>(st));
            }
        }
        return std::move(diags_);
    }

private:
    void error(std::string msg, SourcePos pos) { diags_.push_back({Severity::Error, std::move(msg), pos}); }
    void warning(std::string msg, SourcePos pos) { diags_.push_back({Severity::Warning, std::move(msg), pos}); }

    bool check_new_name(const std::string& name, SourcePos pos) {
        if (name == "Version" || name == "Relation" || name == "File") {
            error("'" + name + "' is reserved and cannot name an iterator", pos);
            return false;
        }
        if (scope_.count(name)) {
            error("duplicate iterator '" + name + "'", pos);
            return false;
        }
        return true;
    }

    const IterInfo* lookup(const std::string& name, SourcePos pos) {
        auto it = scope_.find(name);
        if (it != scope_.end()) return &it->second;
        auto later = first_decl_.find(name);
        if (later != first_decl_.end() && later->second >= stmt_) {
            error("iterator '" + name + "' is used before its declaration", pos);
        } else {
            error("undeclared iterator '" + name + "'", pos);
        }
        return nullptr;
    }

    std::vector<std::string> chain_of(const std::string& name) const {
        std::vector<std::string> out{name};
        const auto& anc = scope_.at(name).ancestors;
        out.insert(out.end(), anc.begin(), anc.end());
        return out;
    }

    void check_filter(const std::vector<FilterTerm>& terms, EntityKind kind) {
        for (const auto& t : terms) {
            auto info = classify_step(kind, t.attribute);
            if (info.cls != StepClass::Scalar) {
                error("'" + t.attribute + "' is not a filterable attribute of a " + std::string(to_string(kind)), t.pos);
            }
        }
    }

    // Applies one set-valued step; returns false after reporting an error.
    bool set_step(EntityKind& kind, const Step& s, bool allow_scalar_end, bool last, StepClass* out_cls) {
        StepInfo info = classify_step(kind, s.name);
        if (is_traversal_step(s.name) && kind != EntityKind::Version && kind != EntityKind::Unknown) {
            error("traversal step '" + s.name + "' applies only to versions, not to a " + std::string(to_string(kind)),
                  s.pos);
            return false;
        }
        if (info.cls == StepClass::Invalid) {
            error("unknown attribute '" + s.name + "' of a " + std::string(to_string(kind)), s.pos);
            return false;
        }
        if ((s.hops || s.has_parens) && !is_traversal_step(s.name) && s.filter.empty()) {
            error("only P, D and N take an argument", s.pos);
            return false;
        }
        *out_cls = info.cls;
        if (info.cls == StepClass::Set) {
            kind = info.result;
            return true;
        }
        if (!allow_scalar_end || !last) {
            if (info.cls == StepClass::Author && !last) return true;  // caller handles `.name`
            error("'" + s.name + "' is not a set", s.pos);
            return false;
        }
        return true;
    }

    void range(const RangeDecl& r) {
        bool ok = check_new_name(r.iterator, r.pos);
        const PathExpr& src = r.source;
        IterInfo info;
        info.index = stmt_;
        EntityKind kind;
        if (src.root == "Version") {
            kind = EntityKind::Version;
            check_filter(src.root_filter, kind);
            if (src.steps.empty()) {
                if (ok) scope_[r.iterator] = info_with(kind, {}, std::nullopt);
                return;
            }
        } else {
            const IterInfo* root = lookup(src.root, src.pos);
            if (!root) return;
            if (src.steps.empty()) {
                if (!root->derived) {
                    error("range over iterator '" + src.root + "' needs a set-valued step", src.pos);
                    return;
                }
                if (ok) {
                    IterInfo copy = *root;
                    copy.index = stmt_;
                    scope_[r.iterator] = copy;
                }
                return;
            }
            kind = root->kind;
            info.ancestors = chain_of(src.root);
        }
        for (const auto& s : src.steps) {
            StepClass cls;
            if (!set_step(kind, s, false, false, &cls)) return;
            if (cls != StepClass::Set) {
                error("'" + s.name + "' is not a set", s.pos);
                return;
            }
            check_filter(s.filter, kind);
        }
        if (ok) {
            info.kind = kind;
            scope_[r.iterator] = info;
        }
    }

    IterInfo info_with(EntityKind kind, std::vector<std::string> ancestors, std::optional<std::vector<std::string>> cols) {
        IterInfo i;
        i.kind = kind;
        i.ancestors = std::move(ancestors);
        i.columns = std::move(cols);
        i.index = stmt_;
        return i;
    }

    void retrieve(const RetrieveStmt& s) {
        for (const auto& t : s.targets) expr(t.expr, ExprContext{false, false, true});
        if (s.where) expr(*s.where, {});
        for (const auto& item : s.sort_by) {
            if (item.expr.contains_aggregate()) {
                error("aggregates are not allowed in 'sort by'", item.expr.pos);
                continue;
            }
            expr(item.expr, {});
            bool listed = std::any_of(s.targets.begin(), s.targets.end(),
                                      [&](const Target& t) { return t.expr == item.expr; });
            if (!listed) warning("sort key '" + to_source(item.expr) + "' is not in the target list", item.expr.pos);
        }
        if (!s.into) return;

        if (!check_new_name(*s.into, s.pos)) return;
        bool has_all = std::any_of(s.targets.begin(), s.targets.end(), [](const Target& t) { return is_all_path(t.expr); });
        if (has_all) {
            if (s.targets.size() != 1 || s.targets[0].alias) {
                error("'.all' in 'retrieve into' must be the only target and takes no alias", s.pos);
                return;
            }
            const PathExpr& p = s.targets[0].expr.path;
            auto it = scope_.find(p.root);
            if (p.steps.size() != 1 || it == scope_.end()) {
                if (p.steps.size() != 1) error("'retrieve into' copies only an iterator's '.all'", s.pos);
                return;
            }
            IterInfo view = it->second;
            view.derived = true;
            view.index = stmt_;
            scope_[*s.into] = view;
            return;
        }
        std::vector<std::string> cols;
        for (const auto& t : s.targets) {
            auto name = derived_column_name(t);
            if (!name) {
                error("target '" + to_source(t.expr) + "' needs an alias in 'retrieve into'", t.expr.pos);
                return;
            }
            if (std::find(cols.begin(), cols.end(), *name) != cols.end()) {
                error("duplicate column '" + *name + "' in 'retrieve into'", t.expr.pos);
                return;
            }
            cols.push_back(*name);
        }
        IterInfo set = info_with(EntityKind::Row, {}, std::move(cols));
        set.derived = true;
        scope_[*s.into] = set;
    }

    // Returns the latest-declared iterator referenced by `e` (for aggregates).
    void collect_iterators(const Expr& e, std::set<std::string>& out) const {
        walk(e, [&](const Expr& x) {
            if (x.kind == Expr::Kind::Path && x.path.root != "Version") out.insert(x.path.root);
            if (x.kind == Expr::Kind::Upref) out.insert(x.upref_iterator);
        });
    }

    void expr(const Expr& e, ExprContext ctx) {
        using K = Expr::Kind;
        switch (e.kind) {
            case K::Literal: return;
            case K::Path: path(e.path, ctx); return;
            case K::Upref: upref(e); return;
            case K::Compare: {
                bool eq = e.cmp == CompareOp::Eq || e.cmp == CompareOp::Ne;
                if (!eq && (is_all_path(e.children[0]) || is_all_path(e.children[1]))) {
                    error("'.all' supports only = and !=", e.pos);
                }
                ExprContext sub{ctx.in_aggregate, false, eq};
                expr(e.children[0], sub);
                expr(e.children[1], sub);
                return;
            }
            case K::Aggregate: aggregate(e, ctx); return;
            default:
                for (const auto& c : e.children) expr(c, ExprContext{ctx.in_aggregate, false, false});
                return;
        }
    }

    void aggregate(const Expr& e, ExprContext ctx) {
        if (ctx.in_aggregate) {
            error("aggregates cannot be nested", e.pos);
            return;
        }
        expr(e.children[0], ExprContext{true, true, false});
        if (e.has_inner_where) expr(e.children[1], ExprContext{true, false, false});
        if (e.group_by.empty()) return;
        if (!e.agg_all) {
            error("'group by' is only allowed with _all aggregates; use " + std::string(to_string(e.agg)) + "_all", e.pos);
            return;
        }
        std::set<std::string> refs;
        collect_iterators(e.children[0], refs);
        const IterInfo* root = nullptr;
        std::string root_name;
        for (const auto& name : refs) {
            auto it = scope_.find(name);
            if (it == scope_.end()) continue;
            if (!root || it->second.index > root->index) {
                root = &it->second;
                root_name = name;
            }
        }
        if (!root) {
            error("'group by' needs an iterator in the aggregate argument", e.pos);
            return;
        }
        std::vector<std::string> allowed = root->ancestors;
        const Expr& arg = e.children[0];
        if (arg.kind == Expr::Kind::Path && arg.path.root == root_name && path_is_set_valued(arg.path)) {
            allowed.push_back(root_name);
        }
        for (const auto& g : e.group_by) {
            if (!scope_.count(g)) {
                lookup(g, e.pos);
                continue;
            }
            if (std::find(allowed.begin(), allowed.end(), g) != allowed.end()) continue;
            if (g == root_name) {
                error("'group by " + g + "' names the aggregated iterator itself", e.pos);
            } else {
                error("'group by " + g + "' is not an ancestor of '" + root_name + "'", e.pos);
            }
        }
    }

    bool path_is_set_valued(const PathExpr& p) const {
        auto it = scope_.find(p.root);
        if (it == scope_.end()) return false;
        return !p.steps.empty() && classify_step(it->second.kind, p.steps[0].name).cls == StepClass::Set;
    }

    void path(const PathExpr& p, ExprContext ctx) {
        if (p.root == "Version") {
            error("the root set 'Version' may only start a range declaration", p.pos);
            return;
        }
        if (p.has_filters()) {
            error("inline filters are only allowed in range declarations", p.pos);
            return;
        }
        const IterInfo* it = lookup(p.root, p.pos);
        if (!it) return;
        if (p.steps.empty()) {
            if (!ctx.allow_set) error("iterator '" + p.root + "' used as a value; name an attribute or '.all'", p.pos);
            return;
        }
        EntityKind kind = it->kind;
        bool set_valued = false;
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
            const Step& s = p.steps[i];
            bool last = i + 1 == p.steps.size();
            StepClass cls;
            if (!set_step(kind, s, true, last, &cls)) return;
            if (cls == StepClass::Set) {
                set_valued = true;
                continue;
            }
            if (cls == StepClass::All) {
                if (!ctx.allow_all || set_valued) error("'.all' is only allowed as a target or an operand of = / !=", s.pos);
                return;
            }
            if (cls == StepClass::Author) {
                if (last) break;
                const Step& attr = p.steps[i + 1];
                if ((attr.name != "name" && attr.name != "email") || i + 2 != p.steps.size()) {
                    error("'author' has only 'name' and 'email'", attr.pos);
                    return;
                }
                break;
            }
            if (kind == EntityKind::Row && !set_valued && it->columns && i == 0 &&
                std::find(it->columns->begin(), it->columns->end(), s.name) == it->columns->end()) {
                error("'" + p.root + "' has no column '" + s.name + "'", s.pos);
                return;
            }
        }
        if (set_valued && !ctx.allow_set) {
            error("set-valued path '" + to_source(p) + "' must be aggregated", p.pos);
        }
    }

    void upref(const Expr& e) {
        const IterInfo* it = lookup(e.upref_iterator, e.pos);
        if (!it) return;
        EntityKind k = it->kind;
        bool ok = true;
        switch (e.upref) {
            case UprefKind::Version: ok = k != EntityKind::Row; break;
            case UprefKind::Relation:
                ok = k == EntityKind::Relation || k == EntityKind::Record || k == EntityKind::Unknown;
                break;
            case UprefKind::File: ok = k == EntityKind::File || k == EntityKind::Record || k == EntityKind::Unknown; break;
        }
        if (!ok) {
            error(std::string(to_string(e.upref)) + "(" + e.upref_iterator + ") is not defined for a " +
                      std::string(to_string(k)),
                  e.pos);
            return;
        }
        if (e.upref_attrs.empty()) {
            error("up-reference needs an attribute", e.pos);
            return;
        }
        EntityKind target = e.upref == UprefKind::Version ? EntityKind::Version
                            : e.upref == UprefKind::Relation ? EntityKind::Relation
                                                             : EntityKind::File;
        auto info = classify_step(target, e.upref_attrs[0]);
        bool author = info.cls == StepClass::Author && e.upref_attrs.size() == 2 &&
                      (e.upref_attrs[1] == "name" || e.upref_attrs[1] == "email");
        if (!(info.cls == StepClass::Scalar && e.upref_attrs.size() == 1) && !author &&
            !(info.cls == StepClass::Author && e.upref_attrs.size() == 1)) {
            error("unsupported up-reference attribute '" + e.upref_attrs[0] + "'", e.pos);
        }
    }

    const QueryProgram& program_;
    std::map<std::string, std::size_t> first_decl_;
    std::map<std::string, IterInfo> scope_;
    std::vector<Diagnostic> diags_;
    std::size_t stmt_ = 0;
};

}  // namespace

std::vector<Diagnostic> validate(const QueryProgram& program) {
    return Validator(program).run();
}

}  // namespace vquel
