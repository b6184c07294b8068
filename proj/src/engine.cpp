#include "vquel/engine.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <tuple>

#include "vquel/desugar.hpp"
#include "vquel/graph.hpp"
#include "vquel/parser.hpp"
#include "vquel/semantics.hpp"

namespace vquel {

namespace {

struct DerivedSet;

struct Entity {
    EntityKind kind = EntityKind::Unknown;
    const VersionNode* version = nullptr;
    const Container* container = nullptr;
    const Record* record = nullptr;
    const DerivedSet* set = nullptr;
    std::size_t row = 0;

    const void* handle() const {
        if (record) return record;
        if (container) return container;
        if (set) return set;
        return version;
    }
    bool operator==(const Entity& o) const { return kind == o.kind && handle() == o.handle() && row == o.row; }
};

struct EntityLess {
    bool operator()(const Entity& a, const Entity& b) const {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.handle() != b.handle()) return std::less<const void*>{}(a.handle(), b.handle());
        return a.row < b.row;
    }
};

using Binding = std::vector<Entity>;

struct BindingLess {
    bool operator()(const Binding& a, const Binding& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), EntityLess{});
    }
};

struct ViewRow {
    Entity entity;
    Binding bindings;  // parallel to DerivedSet::ancestors
};

struct DerivedSet {
    std::string name;
    bool view = false;
    EntityKind kind = EntityKind::Row;
    std::vector<int> ancestors;
    std::vector<ViewRow> view_rows;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

struct Iter {
    enum class Source { Versions, Step, Derived };

    std::string name;  // empty for hidden levels
    Source source = Source::Versions;
    int parent = -1;
    Step step;
    std::vector<FilterTerm> filter;
    const DerivedSet* set = nullptr;
    std::vector<int> ancestors;  // nearest first
    EntityKind kind = EntityKind::Unknown;
};

using Frame = std::vector<Entity>;
using Fields = std::vector<std::pair<std::string, Value>>;

struct AggInfo {
    std::vector<int> key;
    std::vector<int> local;  // enumeration order
    bool computed = false;
    std::map<Binding, Value, BindingLess> values;
};

struct Elem {
    bool entity = false;
    Value value;
};

template <class F>
auto with_pos(SourcePos pos, F&& f) {
    try {
        return f();
    } catch (const EvalError& e) {
        if (e.pos().valid()) throw;
        throw EvalError(e.bare_message(), pos);
    }
}

bool checked_arith(ArithOp op, std::int64_t a, std::int64_t b, std::int64_t& out) {
    switch (op) {
        case ArithOp::Add: return !__builtin_add_overflow(a, b, &out);
        case ArithOp::Sub: return !__builtin_sub_overflow(a, b, &out);
        case ArithOp::Mul: return !__builtin_mul_overflow(a, b, &out);
        case ArithOp::Div:
            if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return false;
            out = a / b;
            return true;
    }
    return false;
}

Value arithmetic(ArithOp op, const Value& a, const Value& b, SourcePos pos) {
    if (a.is_null() || b.is_null()) return {};
    if (!a.is_numeric() || !b.is_numeric()) {
        throw EvalError("arithmetic on " + std::string(to_string(a.type())) + " and " + std::string(to_string(b.type())),
                        pos);
    }
    if (a.type() == Value::Type::Int && b.type() == Value::Type::Int) {
        if (op == ArithOp::Div && b.as_int() == 0) return {};
        std::int64_t out = 0;
        if (!checked_arith(op, a.as_int(), b.as_int(), out)) throw EvalError("integer overflow", pos);
        return Value(out);
    }
    double x = *a.numeric(), y = *b.numeric();
    switch (op) {
        case ArithOp::Add: return Value(x + y);
        case ArithOp::Sub: return Value(x - y);
        case ArithOp::Mul: return Value(x * y);
        case ArithOp::Div: return y == 0.0 ? Value() : Value(x / y);
    }
    return {};
}

Value negate(const Value& v, SourcePos pos) {
    if (v.is_null()) return {};
    if (v.type() == Value::Type::Int) {
        if (v.as_int() == std::numeric_limits<std::int64_t>::min()) throw EvalError("integer overflow", pos);
        return Value(-v.as_int());
    }
    if (v.type() == Value::Type::Float) return Value(-v.as_float());
    throw EvalError("cannot negate " + std::string(to_string(v.type())), pos);
}

Value absolute(const Value& v, SourcePos pos) {
    if (v.is_null()) return {};
    if ((v.type() == Value::Type::Int && v.as_int() < 0) || (v.type() == Value::Type::Float && v.as_float() < 0)) {
        return negate(v, pos);
    }
    if (!v.is_numeric()) throw EvalError("abs of " + std::string(to_string(v.type())), pos);
    return v;
}

bool truthy(const Value& v, SourcePos pos) {
    if (v.is_null()) return false;
    if (v.type() != Value::Type::Bool) {
        throw EvalError("expected a boolean condition, got " + std::string(to_string(v.type())), pos);
    }
    return v.as_bool();
}

class Accumulator {
public:
    Accumulator(AggOp op, SourcePos pos) : op_(op), pos_(pos) {}

    void add(const Elem& e) {
        if (e.entity) {
            if (op_ != AggOp::Count && op_ != AggOp::Any) {
                throw EvalError(std::string(to_string(op_)) + " needs values; aggregate an attribute", pos_);
            }
            ++count_;
            return;
        }
        const Value& v = e.value;
        if (v.is_null()) return;
        ++count_;
        switch (op_) {
            case AggOp::Sum:
            case AggOp::Avg:
                if (!v.is_numeric()) {
                    throw EvalError(std::string(to_string(op_)) + " over " + std::string(to_string(v.type())) + " values",
                                    pos_);
                }
                fsum_ += *v.numeric();
                if (v.type() == Value::Type::Float) {
                    is_float_ = true;
                } else if (!is_float_ && __builtin_add_overflow(isum_, v.as_int(), &isum_)) {
                    throw EvalError("integer overflow in sum", pos_);
                }
                break;
            case AggOp::Min:
                if (best_.is_null() || with_pos(pos_, [&] { return compare(v, CompareOp::Lt, best_); })) best_ = v;
                break;
            case AggOp::Max:
                if (best_.is_null() || with_pos(pos_, [&] { return compare(v, CompareOp::Gt, best_); })) best_ = v;
                break;
            default: break;
        }
    }

    Value result() const { return finish(op_, count_, is_float_, isum_, fsum_, best_); }

    static Value empty(AggOp op) { return finish(op, 0, false, 0, 0.0, Value()); }

private:
    static Value finish(AggOp op, std::int64_t count, bool is_float, std::int64_t isum, double fsum, const Value& best) {
        switch (op) {
            case AggOp::Count: return Value(count);
            case AggOp::Sum:
                if (count == 0) return Value(std::int64_t{0});
                return is_float ? Value(fsum) : Value(isum);
            case AggOp::Avg: return count == 0 ? Value() : Value(fsum / static_cast<double>(count));
            case AggOp::Min:
            case AggOp::Max: return best;
            case AggOp::Any: return Value(count > 0);
        }
        return {};
    }

    AggOp op_;
    SourcePos pos_;
    std::int64_t count_ = 0;
    bool is_float_ = false;
    std::int64_t isum_ = 0;
    double fsum_ = 0;
    Value best_;
};

std::strong_ordering row_order(const std::vector<Value>& a, const std::vector<Value>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (auto c = total_order(a[i], b[i]); c != 0) return c;
    }
    return a.size() <=> b.size();
}

struct RowLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const { return row_order(a, b) < 0; }
};

class Executor {
public:
    explicit Executor(const Repository& repo) : repo_(repo) {}

    std::vector<ResultSet> run(const QueryProgram& program) {
        std::vector<ResultSet> out;
        for (const auto& st : program.statements) {
            if (const auto* r = std::get_if<RangeDecl>(&st)) {
                declare(*r);
            } else if (auto rs = retrieve(std::get<RetrieveStmt>(st))) {
                out.push_back(std::move(*rs));
            }
        }
        return out;
    }

private:
    // ---- declarations ----------------------------------------------------

    int id_of(const std::string& name, SourcePos pos) const {
        auto it = names_.find(name);
        if (it == names_.end()) throw SemanticError("undeclared iterator '" + name + "'", pos);
        return it->second;
    }

    void bind_name(const std::string& name, int id, SourcePos pos) {
        if (!names_.emplace(name, id).second) throw SemanticError("duplicate iterator '" + name + "'", pos);
    }

    int add_iter(Iter it) {
        iters_.push_back(std::move(it));
        return static_cast<int>(iters_.size()) - 1;
    }

    int add_step_iter(int parent, const Step& step, std::string name) {
        Iter it;
        it.name = std::move(name);
        it.source = Iter::Source::Step;
        it.parent = parent;
        it.step = step;
        it.filter = step.filter;
        it.ancestors = {parent};
        const auto& pa = iters_[parent].ancestors;
        it.ancestors.insert(it.ancestors.end(), pa.begin(), pa.end());
        StepInfo info = classify_step(iters_[parent].kind, step.name);
        if (info.cls != StepClass::Set) throw SemanticError("'" + step.name + "' is not a set", step.pos);
        if (is_traversal_step(step.name) && iters_[parent].kind != EntityKind::Version) {
            throw SemanticError("traversal step '" + step.name + "' applies only to versions", step.pos);
        }
        it.kind = info.result;
        return add_iter(std::move(it));
    }

    int add_derived_iter(const DerivedSet* set, std::string name) {
        Iter it;
        it.name = std::move(name);
        it.source = Iter::Source::Derived;
        it.set = set;
        it.ancestors = set->ancestors;
        it.kind = set->kind;
        return add_iter(std::move(it));
    }

    void declare(const RangeDecl& r) {
        if (names_.count(r.iterator)) throw SemanticError("duplicate iterator '" + r.iterator + "'", r.pos);
        const PathExpr& src = r.source;
        int current;
        if (src.root == "Version") {
            Iter it;
            it.source = Iter::Source::Versions;
            it.filter = src.root_filter;
            it.kind = EntityKind::Version;
            if (src.steps.empty()) it.name = r.iterator;
            current = add_iter(std::move(it));
        } else {
            int root = id_of(src.root, src.pos);
            if (src.steps.empty()) {
                if (!iters_[root].set || iters_[root].source != Iter::Source::Derived) {
                    throw SemanticError("range over iterator '" + src.root + "' needs a set-valued step", src.pos);
                }
                current = add_derived_iter(iters_[root].set, r.iterator);
            } else {
                current = root;
            }
        }
        for (std::size_t i = 0; i < src.steps.size(); ++i) {
            bool last = i + 1 == src.steps.size();
            current = add_step_iter(current, src.steps[i], last ? r.iterator : std::string());
        }
        bind_name(r.iterator, current, r.pos);
    }

    // ---- enumeration -----------------------------------------------------

    static Entity version_entity(const VersionNode* v) {
        Entity e;
        e.kind = EntityKind::Version;
        e.version = v;
        return e;
    }

    static Entity container_entity(const VersionNode* v, const Container* c) {
        Entity e;
        e.kind = c->is_relation() ? EntityKind::Relation : EntityKind::File;
        e.version = v;
        e.container = c;
        return e;
    }

    static Entity record_entity(const VersionNode* v, const Container* c, const Record* r) {
        Entity e;
        e.kind = EntityKind::Record;
        e.version = v;
        e.container = c;
        e.record = r;
        return e;
    }

    std::vector<Entity> versions_by_id(std::span<const std::string> ids) const {
        std::vector<const VersionNode*> nodes;
        for (const auto& id : ids) nodes.push_back(&repo_.at(id));
        std::sort(nodes.begin(), nodes.end(), [](const VersionNode* a, const VersionNode* b) {
            return std::tie(a->creation_ts, a->id) < std::tie(b->creation_ts, b->id);
        });
        std::vector<Entity> out;
        for (const auto* n : nodes) out.push_back(version_entity(n));
        return out;
    }

    std::vector<Entity> step_set(const Entity& e, const Step& step) const {
        std::vector<Entity> out;
        const std::string& name = step.name;
        if (e.kind == EntityKind::Version) {
            const VersionNode* v = e.version;
            if (name == "Relations" || name == "Files") {
                bool rel = name == "Relations";
                for (const auto& c : v->containers) {
                    if (c.is_relation() == rel) out.push_back(container_entity(v, &c));
                }
                std::sort(out.begin(), out.end(),
                          [](const Entity& a, const Entity& b) { return a.container->name < b.container->name; });
                return out;
            }
            if (name == "parents") return versions_by_id(v->parents);
            if (name == "children") return versions_by_id(v->children);
            if (is_traversal_step(name)) {
                std::optional<unsigned> hops;
                if (step.hops) {
                    hops = static_cast<unsigned>(std::min<std::int64_t>(*step.hops, std::numeric_limits<unsigned>::max()));
                }
                std::vector<std::string> ids = name == "P"   ? ancestors(repo_, v->id, hops)
                                               : name == "D" ? descendants(repo_, v->id, hops)
                                                             : neighborhood(repo_, v->id, hops);
                return versions_by_id(ids);
            }
        } else if (e.kind == EntityKind::Relation || e.kind == EntityKind::File) {
            if (name == "Tuples" || name == "Records") {
                for (const auto& r : e.container->records) out.push_back(record_entity(e.version, e.container, &r));
                std::sort(out.begin(), out.end(),
                          [](const Entity& a, const Entity& b) { return a.record->rid < b.record->rid; });
                return out;
            }
        } else if (e.kind == EntityKind::Record && (name == "parents" || name == "children")) {
            RecordRef self{e.version->id, e.container->name, e.record->rid};
            auto span = name == "parents" ? repo_.record_parents(self) : repo_.record_children(self);
            std::vector<RecordRef> refs(span.begin(), span.end());
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            for (const auto& ref : refs) {
                const VersionNode* v = repo_.find(ref.version);
                const Container* c = v ? v->container(ref.container) : nullptr;
                const Record* rec = c ? c->find(ref.rid) : nullptr;
                if (!rec) throw EvalError("dangling provenance reference " + ref.to_string(), step.pos);
                out.push_back(record_entity(v, c, rec));
            }
            return out;
        }
        throw EvalError("'" + name + "' is not a set of a " + std::string(to_string(e.kind)), step.pos);
    }

    bool passes(const Entity& e, const std::vector<FilterTerm>& filter) const {
        for (const auto& t : filter) {
            Value v = attribute(e, t.attribute, t.pos);
            if (!with_pos(t.pos, [&] { return compare(v, t.op, t.literal); })) return false;
        }
        return true;
    }

    std::vector<Entity> candidates(int id, const Frame& f) const {
        const Iter& it = iters_[id];
        std::vector<Entity> out;
        switch (it.source) {
            case Iter::Source::Versions:
                for (const auto* v : repo_.versions()) {
                    Entity e = version_entity(v);
                    if (passes(e, it.filter)) out.push_back(e);
                }
                break;
            case Iter::Source::Step:
                for (auto& e : step_set(f[it.parent], it.step)) {
                    if (passes(e, it.filter)) out.push_back(e);
                }
                break;
            case Iter::Source::Derived:
                if (it.set->view) {
                    for (const auto& row : it.set->view_rows) {
                        bool match = true;
                        for (std::size_t k = 0; k < it.ancestors.size() && match; ++k) {
                            match = row.bindings[k] == f[it.ancestors[k]];
                        }
                        if (match) out.push_back(row.entity);
                    }
                } else {
                    for (std::size_t i = 0; i < it.set->rows.size(); ++i) {
                        Entity e;
                        e.kind = EntityKind::Row;
                        e.set = it.set;
                        e.row = i;
                        out.push_back(e);
                    }
                }
                break;
        }
        return out;
    }

    template <class F>
    void enumerate(const std::vector<int>& order, std::size_t k, Frame& f, F&& body) const {
        if (k == order.size()) {
            body(f);
            return;
        }
        for (const auto& e : candidates(order[k], f)) {
            f[order[k]] = e;
            enumerate(order, k + 1, f, body);
        }
    }

    std::vector<int> closure(const std::set<int>& ids) const {
        std::set<int> all = ids;
        for (int id : ids) all.insert(iters_[id].ancestors.begin(), iters_[id].ancestors.end());
        return {all.begin(), all.end()};
    }

    // ---- attributes ------------------------------------------------------

    Value attribute(const Entity& e, std::string_view name, SourcePos pos) const {
        StepInfo info = classify_step(e.kind, name);
        if (info.cls == StepClass::Author) return Value(e.version->author.name);
        if (info.cls != StepClass::Scalar) {
            throw EvalError("'" + std::string(name) + "' is not an attribute of a " + std::string(to_string(e.kind)), pos);
        }
        const std::string& attr = info.attribute;
        switch (e.kind) {
            case EntityKind::Version:
                if (attr == "id") return Value(e.version->id);
                if (attr == "creation_ts") return Value(e.version->creation_ts);
                return Value(e.version->commit_msg);
            case EntityKind::Relation:
            case EntityKind::File:
                if (attr == "changed") return Value(e.container->changed);
                return Value(e.container->name);
            case EntityKind::Record: {
                auto it = e.record->fields.find(attr);
                if (it != e.record->fields.end()) return it->second;
                if (attr == "id") return Value(e.record->rid);
                return {};
            }
            case EntityKind::Row: {
                const DerivedSet& s = *e.set;
                for (std::size_t i = 0; i < s.columns.size(); ++i) {
                    if (s.columns[i] == attr) return s.rows[e.row][i];
                }
                throw EvalError("'" + s.name + "' has no column '" + attr + "'", pos);
            }
            case EntityKind::Unknown: break;
        }
        throw EvalError("unknown attribute '" + attr + "'", pos);
    }

    Value author_attribute(const Entity& e, std::string_view name, SourcePos pos) const {
        if (name == "name") return Value(e.version->author.name);
        if (name == "email") return e.version->author.email ? Value(*e.version->author.email) : Value();
        throw EvalError("'author' has only 'name' and 'email'", pos);
    }

    static Fields expand_all(const Entity& e) {
        Fields out;
        switch (e.kind) {
            case EntityKind::Version:
                out = {{"id", Value(e.version->id)},
                       {"author", Value(e.version->author.name)},
                       {"creation_ts", Value(e.version->creation_ts)},
                       {"commit_msg", Value(e.version->commit_msg)}};
                break;
            case EntityKind::Relation: out = {{"name", Value(e.container->name)}, {"changed", Value(e.container->changed)}}; break;
            case EntityKind::File:
                out = {{"full_path", Value(e.container->name)}, {"changed", Value(e.container->changed)}};
                break;
            case EntityKind::Record:
                if (e.container->is_relation()) {
                    for (const auto& col : e.container->schema) {
                        auto it = e.record->fields.find(col.name);
                        out.emplace_back(col.name, it == e.record->fields.end() ? Value() : it->second);
                    }
                } else {
                    for (const auto& [k, v] : e.record->fields) out.emplace_back(k, v);
                }
                break;
            case EntityKind::Row:
                for (std::size_t i = 0; i < e.set->columns.size(); ++i) {
                    out.emplace_back(e.set->columns[i], e.set->rows[e.row][i]);
                }
                break;
            case EntityKind::Unknown: break;
        }
        return out;
    }

    // ---- expressions -----------------------------------------------------

    Value eval(const Expr& e, const Frame& f) {
        using K = Expr::Kind;
        switch (e.kind) {
            case K::Literal: return e.literal;
            case K::Path: return eval_path(e.path, f);
            case K::Upref: return eval_upref(e, f);
            case K::Negate: return negate(eval(e.children[0], f), e.pos);
            case K::Abs: return absolute(eval(e.children[0], f), e.pos);
            case K::Not: return Value(!truthy(eval(e.children[0], f), e.children[0].pos));
            case K::Arith: return arithmetic(e.arith, eval(e.children[0], f), eval(e.children[1], f), e.pos);
            case K::Logic: {
                bool lhs = truthy(eval(e.children[0], f), e.children[0].pos);
                if (e.logic == LogicOp::And && !lhs) return Value(false);
                if (e.logic == LogicOp::Or && lhs) return Value(true);
                return Value(truthy(eval(e.children[1], f), e.children[1].pos));
            }
            case K::Compare: {
                const Expr& l = e.children[0];
                const Expr& r = e.children[1];
                if (is_all_path(l) || is_all_path(r)) return Value(compare_all(e, f));
                Value a = eval(l, f);
                Value b = eval(r, f);
                return Value(with_pos(e.pos, [&] { return compare(a, e.cmp, b); }));
            }
            case K::Aggregate: return aggregate_value(e, f);
        }
        return {};
    }

    bool compare_all(const Expr& e, const Frame& f) {
        if (e.cmp != CompareOp::Eq && e.cmp != CompareOp::Ne) throw EvalError("'.all' supports only = and !=", e.pos);
        auto side = [&](const Expr& x) -> std::optional<FieldMap> {
            if (!is_all_path(x)) return std::nullopt;
            if (x.path.steps.size() != 1) throw EvalError("'.all' must follow an iterator directly", x.pos);
            Fields fields = expand_all(f[id_of(x.path.root, x.pos)]);
            return FieldMap(fields.begin(), fields.end());
        };
        auto a = side(e.children[0]);
        auto b = side(e.children[1]);
        bool equal = a && b && *a == *b;
        if (!a || !b) {
            Value other = eval(a ? e.children[1] : e.children[0], f);
            if (other.is_null()) return false;
        }
        return e.cmp == CompareOp::Eq ? equal : !equal;
    }

    Value eval_path(const PathExpr& p, const Frame& f) const {
        if (p.has_filters()) throw SemanticError("inline filters are only allowed in range declarations", p.pos);
        Entity e = f[id_of(p.root, p.pos)];
        if (p.steps.empty()) throw EvalError("iterator '" + p.root + "' used as a value", p.pos);
        return apply_scalar_steps(e, p.steps, 0, p.pos);
    }

    Value apply_scalar_steps(const Entity& e, const std::vector<Step>& steps, std::size_t i, SourcePos pos) const {
        const Step& s = steps[i];
        StepInfo info = classify_step(e.kind, s.name);
        bool last = i + 1 == steps.size();
        if (info.cls == StepClass::Author && !last) {
            if (i + 2 != steps.size()) throw EvalError("'author' has only 'name' and 'email'", steps[i + 1].pos);
            return author_attribute(e, steps[i + 1].name, steps[i + 1].pos);
        }
        if (info.cls == StepClass::Set) throw EvalError("set-valued path must be aggregated", pos);
        if (!last) throw EvalError("'" + s.name + "' has no attributes", steps[i + 1].pos);
        return attribute(e, s.name, s.pos);
    }

    Value eval_upref(const Expr& e, const Frame& f) const {
        const Entity& x = f[id_of(e.upref_iterator, e.pos)];
        Entity target;
        if (e.upref == UprefKind::Version) {
            if (!x.version) throw EvalError("Version(" + e.upref_iterator + ") is not defined for a derived row", e.pos);
            target = version_entity(x.version);
        } else {
            bool rel = e.upref == UprefKind::Relation;
            if (!x.container || x.container->is_relation() != rel) {
                throw EvalError(std::string(to_string(e.upref)) + "(" + e.upref_iterator + ") is not defined for this " +
                                    std::string(to_string(x.kind)),
                                e.pos);
            }
            target = container_entity(x.version, x.container);
        }
        if (e.upref_attrs.empty()) throw EvalError("up-reference needs an attribute", e.pos);
        std::vector<Step> steps;
        for (const auto& a : e.upref_attrs) {
            Step s;
            s.name = a;
            s.pos = e.pos;
            steps.push_back(std::move(s));
        }
        return apply_scalar_steps(target, steps, 0, e.pos);
    }

    // ---- aggregates ------------------------------------------------------

    void references(const Expr& e, std::set<int>& out, std::vector<const Expr*>* aggs) const {
        if (e.kind == Expr::Kind::Aggregate && aggs) {
            aggs->push_back(&e);
            return;
        }
        if (e.kind == Expr::Kind::Path && e.path.root != "Version") out.insert(id_of(e.path.root, e.path.pos));
        if (e.kind == Expr::Kind::Upref) out.insert(id_of(e.upref_iterator, e.pos));
        for (const auto& c : e.children) references(c, out, aggs);
    }

    AggInfo analyze(const Expr& a) const {
        for (const auto& c : a.children) {
            if (c.contains_aggregate()) throw SemanticError("aggregates cannot be nested", c.pos);
        }
        if (!a.group_by.empty() && !a.agg_all) throw SemanticError("'group by' is only allowed with _all aggregates", a.pos);
        std::set<int> arg_refs, all_refs;
        references(a.children[0], arg_refs, nullptr);
        all_refs = arg_refs;
        if (a.has_inner_where) references(a.children[1], all_refs, nullptr);
        AggInfo info;
        if (a.agg_all) {
            for (const auto& g : a.group_by) info.key.push_back(id_of(g, a.pos));
        } else if (!arg_refs.empty()) {
            int r = *arg_refs.rbegin();
            const Expr& arg = a.children[0];
            bool tail = arg.kind == Expr::Kind::Path && !arg.path.steps.empty() && id_of(arg.path.root, arg.pos) == r &&
                        classify_step(iters_[r].kind, arg.path.steps[0].name).cls == StepClass::Set;
            if (tail) info.key.push_back(r);
            info.key.insert(info.key.end(), iters_[r].ancestors.begin(), iters_[r].ancestors.end());
        }
        all_refs.insert(info.key.begin(), info.key.end());
        info.local = closure(all_refs);
        return info;
    }

    void elements(const Expr& arg, const Frame& f, std::vector<Elem>& out) {
        bool set_path = arg.kind == Expr::Kind::Path && !arg.path.has_filters();
        if (set_path) {
            Entity root = f[id_of(arg.path.root, arg.pos)];
            set_path = arg.path.steps.empty() || classify_step(root.kind, arg.path.steps[0].name).cls == StepClass::Set;
        }
        if (!set_path) {
            out.push_back(Elem{false, eval(arg, f)});
            return;
        }
        std::vector<Entity> current{f[id_of(arg.path.root, arg.pos)]};
        const auto& steps = arg.path.steps;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (current.empty()) return;
            StepInfo info = classify_step(current.front().kind, steps[i].name);
            if (info.cls == StepClass::Set) {
                std::vector<Entity> next;
                for (const auto& e : current) {
                    auto more = step_set(e, steps[i]);
                    next.insert(next.end(), more.begin(), more.end());
                }
                current = std::move(next);
                continue;
            }
            for (const auto& e : current) out.push_back(Elem{false, apply_scalar_steps(e, steps, i, arg.pos)});
            return;
        }
        for (std::size_t i = 0; i < current.size(); ++i) out.push_back(Elem{true, {}});
    }

    Value aggregate_value(const Expr& a, const Frame& outer) {
        AggInfo& info = aggs_.at(&a);
        if (!info.computed) {
            std::map<Binding, Accumulator, BindingLess> groups;
            Frame f(iters_.size());
            std::vector<Elem> elems;
            enumerate(info.local, 0, f, [&](const Frame& fr) {
                if (a.has_inner_where && !truthy(eval(a.children[1], fr), a.children[1].pos)) return;
                Binding key;
                for (int k : info.key) key.push_back(fr[k]);
                auto it = groups.try_emplace(std::move(key), a.agg, a.pos).first;
                elems.clear();
                elements(a.children[0], fr, elems);
                for (const auto& el : elems) it->second.add(el);
            });
            for (const auto& [key, acc] : groups) info.values.emplace(key, acc.result());
            info.computed = true;
        }
        Binding key;
        for (int k : info.key) key.push_back(outer[k]);
        auto it = info.values.find(key);
        return it == info.values.end() ? Accumulator::empty(a.agg) : it->second;
    }

    // ---- retrieve --------------------------------------------------------

    std::optional<ResultSet> retrieve(const RetrieveStmt& s) {
        if (s.into && names_.count(*s.into)) throw SemanticError("duplicate iterator '" + *s.into + "'", s.pos);
        std::set<int> refs;
        std::vector<const Expr*> aggs;
        for (const auto& t : s.targets) references(t.expr, refs, &aggs);
        if (s.where) references(*s.where, refs, &aggs);
        for (const auto& item : s.sort_by) {
            if (item.expr.contains_aggregate()) throw SemanticError("aggregates are not allowed in 'sort by'", item.expr.pos);
            references(item.expr, refs, nullptr);
        }
        aggs_.clear();
        for (const Expr* a : aggs) {
            AggInfo info = analyze(*a);
            refs.insert(info.key.begin(), info.key.end());
            aggs_.emplace(a, std::move(info));
        }
        std::vector<int> order = closure(refs);

        bool view = s.into && s.targets.size() == 1 && is_all_path(s.targets[0].expr) && !s.targets[0].alias;
        if (s.into && !view) {
            for (const auto& t : s.targets) {
                if (is_all_path(t.expr)) {
                    throw SemanticError("'.all' in 'retrieve into' must be the only target", t.expr.pos);
                }
            }
        }

        struct Row {
            std::vector<Value> cells;                    // non-view
            std::vector<std::optional<Fields>> expanded;  // per target, `.all` only
            std::vector<Value> sort_keys;
            ViewRow view_row;
        };
        std::vector<Row> rows;
        int view_source = -1;
        if (view) {
            const PathExpr& p = s.targets[0].expr.path;
            if (p.steps.size() != 1) throw SemanticError("'retrieve into' copies only an iterator's '.all'", p.pos);
            view_source = id_of(p.root, p.pos);
        }

        Frame f(iters_.size());
        enumerate(order, 0, f, [&](const Frame& fr) {
            if (s.where && !truthy(eval(*s.where, fr), s.where->pos)) return;
            Row row;
            if (view) {
                row.view_row.entity = fr[view_source];
                for (int a : iters_[view_source].ancestors) row.view_row.bindings.push_back(fr[a]);
            } else {
                for (const auto& t : s.targets) {
                    if (is_all_path(t.expr)) {
                        if (t.expr.path.steps.size() != 1) {
                            throw EvalError("'.all' must follow an iterator directly", t.expr.pos);
                        }
                        row.expanded.emplace_back(expand_all(fr[id_of(t.expr.path.root, t.expr.pos)]));
                        row.cells.emplace_back();
                    } else {
                        row.expanded.emplace_back(std::nullopt);
                        row.cells.push_back(eval(t.expr, fr));
                    }
                }
            }
            for (const auto& item : s.sort_by) row.sort_keys.push_back(eval(item.expr, fr));
            rows.push_back(std::move(row));
        });

        if (view) return finish_view(s, view_source, rows);

        // Column layout: `.all` targets contribute the union of their fields.
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> all_fields(s.targets.size());
        for (std::size_t t = 0; t < s.targets.size(); ++t) {
            if (!is_all_path(s.targets[t].expr)) continue;
            int src = id_of(s.targets[t].expr.path.root, s.targets[t].expr.pos);
            auto& names = all_fields[t];
            if (iters_[src].kind != EntityKind::Record && iters_[src].kind != EntityKind::Row) {
                Entity probe;
                probe.kind = iters_[src].kind;
                names = static_field_names(probe.kind);
            }
            for (const auto& r : rows) {
                for (const auto& [name, v] : *r.expanded[t]) {
                    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
                }
            }
        }
        std::vector<std::vector<Value>> values;
        values.reserve(rows.size());
        for (const auto& r : rows) {
            std::vector<Value> out;
            for (std::size_t t = 0; t < s.targets.size(); ++t) {
                if (!r.expanded[t]) {
                    out.push_back(r.cells[t]);
                    continue;
                }
                for (const auto& name : all_fields[t]) {
                    auto it = std::find_if(r.expanded[t]->begin(), r.expanded[t]->end(),
                                           [&](const auto& kv) { return kv.first == name; });
                    out.push_back(it == r.expanded[t]->end() ? Value() : it->second);
                }
            }
            values.push_back(std::move(out));
        }
        for (std::size_t t = 0; t < s.targets.size(); ++t) {
            if (is_all_path(s.targets[t].expr)) {
                columns.insert(columns.end(), all_fields[t].begin(), all_fields[t].end());
            } else if (s.into) {
                auto name = derived_column_name(s.targets[t]);
                if (!name) {
                    throw SemanticError("target '" + to_source(s.targets[t].expr) + "' needs an alias in 'retrieve into'",
                                        s.targets[t].expr.pos);
                }
                if (std::find(columns.begin(), columns.end(), *name) != columns.end()) {
                    throw EvalError("duplicate column '" + *name + "' in 'retrieve into'", s.targets[t].expr.pos);
                }
                columns.push_back(*name);
            } else {
                columns.push_back(column_label(s.targets[t]));
            }
        }

        std::vector<std::size_t> idx(values.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (s.unique) {
            std::set<std::vector<Value>, RowLess> seen;
            std::vector<std::size_t> kept;
            for (std::size_t i : idx) {
                if (seen.insert(values[i]).second) kept.push_back(i);
            }
            idx = std::move(kept);
        }
        sort_indices(s, rows, idx);

        ResultSet rs;
        rs.columns = std::move(columns);
        for (std::size_t i : idx) rs.rows.push_back(std::move(values[i]));
        if (!s.into) return rs;

        auto set = std::make_unique<DerivedSet>();
        set->name = *s.into;
        set->columns = std::move(rs.columns);
        set->rows = std::move(rs.rows);
        register_set(std::move(set), s.pos);
        return std::nullopt;
    }

    static std::vector<std::string> static_field_names(EntityKind kind) {
        switch (kind) {
            case EntityKind::Version: return {"id", "author", "creation_ts", "commit_msg"};
            case EntityKind::Relation: return {"name", "changed"};
            case EntityKind::File: return {"full_path", "changed"};
            default: return {};
        }
    }

    template <class Rows>
    void sort_indices(const RetrieveStmt& s, const Rows& rows, std::vector<std::size_t>& idx) const {
        if (s.sort_by.empty()) return;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            for (std::size_t k = 0; k < s.sort_by.size(); ++k) {
                auto c = total_order(rows[a].sort_keys[k], rows[b].sort_keys[k]);
                if (c == 0) continue;
                return s.sort_by[k].descending ? c > 0 : c < 0;
            }
            return false;
        });
    }

    template <class Rows>
    std::optional<ResultSet> finish_view(const RetrieveStmt& s, int source, Rows& rows) {
        // A view is a set: each (entity, ancestor bindings) once, first
        // occurrence kept, whether or not `unique` was given.
        std::vector<std::size_t> idx;
        std::set<Binding, BindingLess> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Binding b{rows[i].view_row.entity};
            b.insert(b.end(), rows[i].view_row.bindings.begin(), rows[i].view_row.bindings.end());
            if (seen.insert(b).second) idx.push_back(i);
        }
        sort_indices(s, rows, idx);
        auto set = std::make_unique<DerivedSet>();
        set->name = *s.into;
        set->view = true;
        set->kind = iters_[source].kind;
        set->ancestors = iters_[source].ancestors;
        for (std::size_t i : idx) set->view_rows.push_back(std::move(rows[i].view_row));
        register_set(std::move(set), s.pos);
        return std::nullopt;
    }

    void register_set(std::unique_ptr<DerivedSet> set, SourcePos pos) {
        std::string name = set->name;
        sets_.push_back(std::move(set));
        int id = add_derived_iter(sets_.back().get(), name);
        bind_name(name, id, pos);
    }

    const Repository& repo_;
    std::vector<Iter> iters_;
    std::map<std::string, int> names_;
    std::vector<std::unique_ptr<DerivedSet>> sets_;
    std::map<const Expr*, AggInfo> aggs_;
};

}  // namespace

std::vector<ResultSet> Engine::execute(const QueryProgram& program) const {
    return Executor(repo_).run(program);
}

std::vector<ResultSet> Engine::run(std::string_view source, std::vector<Diagnostic>* warnings) const {
    QueryProgram program = desugar(parse(source));
    auto diags = validate(program);
    throw_on_errors(diags);
    if (warnings) {
        for (auto& d : diags) warnings->push_back(std::move(d));
    }
    return execute(program);
}

bool same_multiset(const ResultSet& a, const ResultSet& b) {
    if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
    auto x = a.rows;
    auto y = b.rows;
    std::sort(x.begin(), x.end(), RowLess{});
    std::sort(y.begin(), y.end(), RowLess{});
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (row_order(x[i], y[i]) != 0) return false;
    }
    return true;
}

}  // namespace vquel
