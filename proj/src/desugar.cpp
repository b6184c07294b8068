#include "vquel/desugar.hpp"

#include <set>

namespace vquel {

namespace {

class Desugarer {
public:
    explicit Desugarer(const QueryProgram& program) {
        for (const auto& st : program.statements) {
            if (const auto* r = std::get_if<RangeDecl>(&st)) {
                used_.insert(r->iterator);
            } else if (const auto& s = std::get<RetrieveStmt>(st); s.into) {
                used_.insert(*s.into);
            }
        }
    }

    void expand(const RangeDecl& range, std::vector<Statement>& out) {
        const PathExpr& src = range.source;
        std::string root = src.root;
        std::vector<Step> pending;

        if (!src.root_filter.empty()) {
            std::string t = fresh();
            out.emplace_back(make_range(t, "Version", {}, range.pos));
            bool final = src.steps.empty();
            std::string target = final ? range.iterator : fresh();
            out.emplace_back(make_into(target, t, src.root_filter, range.pos));
            if (final) return;
            root = target;
        }
        for (std::size_t i = 0; i < src.steps.size(); ++i) {
            Step step = src.steps[i];
            std::vector<FilterTerm> filter = std::move(step.filter);
            step.filter.clear();
            if (filter.empty()) {
                pending.push_back(std::move(step));
                continue;
            }
            step.has_parens = step.hops.has_value();
            pending.push_back(std::move(step));
            std::string t = fresh();
            out.emplace_back(make_range(t, root, std::move(pending), range.pos));
            pending.clear();
            bool final = i + 1 == src.steps.size();
            std::string target = final ? range.iterator : fresh();
            out.emplace_back(make_into(target, t, filter, range.pos));
            if (final) return;
            root = target;
        }
        out.emplace_back(make_range(range.iterator, root, std::move(pending), range.pos));
    }

private:
    std::string fresh() {
        while (true) {
            std::string name = std::string(kFreshPrefix) + std::to_string(++counter_);
            if (used_.insert(name).second) return name;
        }
    }

    static RangeDecl make_range(std::string name, std::string root, std::vector<Step> steps, NodePos pos) {
        RangeDecl r;
        r.iterator = std::move(name);
        r.source.root = std::move(root);
        r.source.steps = std::move(steps);
        r.source.pos = pos;
        r.pos = pos;
        return r;
    }

    static Expr attr(const std::string& iter, const std::string& name, NodePos pos) {
        PathExpr p;
        p.root = iter;
        p.pos = pos;
        Step s;
        s.name = name;
        s.pos = pos;
        p.steps.push_back(std::move(s));
        return Expr::make_path(std::move(p));
    }

    static RetrieveStmt make_into(std::string into, const std::string& source, const std::vector<FilterTerm>& filter,
                                  NodePos pos) {
        RetrieveStmt s;
        s.into = std::move(into);
        s.pos = pos;
        s.targets.push_back(Target{attr(source, "all", pos), std::nullopt});
        for (const auto& term : filter) {
            Expr cmp = Expr::make_compare(term.op, attr(source, term.attribute, term.pos),
                                          Expr::make_literal(term.literal, term.pos));
            s.where = s.where ? Expr::make_logic(LogicOp::And, std::move(*s.where), std::move(cmp)) : std::move(cmp);
        }
        return s;
    }

    std::set<std::string> used_;
    int counter_ = 0;
};

}  // namespace

QueryProgram desugar(const QueryProgram& program) {
    Desugarer d(program);
    QueryProgram out;
    for (const auto& st : program.statements) {
        const auto* r = std::get_if<RangeDecl>(&st);
        if (r && r->source.has_filters()) {
            d.expand(*r, out.statements);
        } else {
            out.statements.push_back(st);
        }
    }
    return out;
}

}  // namespace vquel
