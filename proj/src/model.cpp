#include "vquel/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>
#include <set>

#include "vquel/error.hpp"
#include "vquel/graph.hpp"

namespace vquel {

namespace {

std::strong_ordering compare_fields(const FieldMap& a, const FieldMap& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
        if (auto c = ia->first.compare(ib->first) <=> 0; c != 0) return c;
        if (auto c = structural_order(ia->second, ib->second); c != 0) return c;
    }
    if (ia == a.end() && ib == b.end()) return std::strong_ordering::equal;
    return ia == a.end() ? std::strong_ordering::less : std::strong_ordering::greater;
}

std::vector<const FieldMap*> sorted_contents(const Container& c) {
    std::vector<const FieldMap*> out;
    out.reserve(c.records.size());
    for (const auto& r : c.records) out.push_back(&r.fields);
    std::ranges::sort(out, [](const FieldMap* a, const FieldMap* b) { return compare_fields(*a, *b) < 0; });
    return out;
}

std::optional<std::string> schema_problem(const Container& c, const Record& r) {
    for (const auto& [name, value] : r.fields) {
        auto col = std::ranges::find(c.schema, name, &Column::name);
        if (col == c.schema.end()) return "field '" + name + "' is not in the schema of relation '" + c.name + "'";
        if (!conforms(value, col->type)) {
            return "field '" + name + "' of relation '" + c.name + "' holds " + std::string(to_string(value.type())) +
                   ", declared " + std::string(to_string(col->type));
        }
    }
    return std::nullopt;
}

bool contains_id(const std::vector<std::string>& ids, std::string_view id) {
    return std::ranges::find(ids, id) != ids.end();
}

bool parent_has_same(const VersionNode& parent, const Container& c) {
    const Container* other = parent.container(c.name);
    return other != nullptr && same_content(*other, c);
}

// Assigns ids to records without one. A rid-less record reuses the id of a
// content-identical base record that no other record claims; the rest get
// fresh ids above everything seen in the base and the request.
void assign_rids(Container& c, const Container* base) {
    std::set<RecordId> explicit_ids;
    RecordId max_id = 0;
    for (const auto& r : c.records) {
        if (r.rid < 0) throw CommitError("negative record id in '" + c.name + "'");
        if (r.rid == kUnassignedRid) continue;
        if (!explicit_ids.insert(r.rid).second) {
            throw CommitError("duplicate record id " + std::to_string(r.rid) + " in '" + c.name + "'");
        }
        max_id = std::max(max_id, r.rid);
    }
    std::vector<const Record*> candidates;
    if (base != nullptr) {
        for (const auto& r : base->records) {
            max_id = std::max(max_id, r.rid);
            if (!explicit_ids.contains(r.rid)) candidates.push_back(&r);
        }
    }
    std::vector<bool> claimed(candidates.size(), false);
    for (auto& r : c.records) {
        if (r.rid != kUnassignedRid) continue;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!claimed[i] && candidates[i]->fields == r.fields) {
                claimed[i] = true;
                r.rid = candidates[i]->rid;
                break;
            }
        }
        if (r.rid == kUnassignedRid) r.rid = ++max_id;
    }
}

}  // namespace

std::string_view to_string(ContainerKind kind) {
    return kind == ContainerKind::Relation ? "relation" : "file";
}

Container Container::relation(std::string name, std::vector<Column> schema, std::vector<Record> records) {
    return Container{ContainerKind::Relation, std::move(name), std::move(schema), std::move(records), true};
}

Container Container::file(std::string full_path, std::vector<Record> records) {
    return Container{ContainerKind::File, std::move(full_path), {}, std::move(records), true};
}

const Record* Container::find(RecordId rid) const {
    auto it = std::ranges::lower_bound(records, rid, {}, &Record::rid);
    if (it != records.end() && it->rid == rid) return &*it;
    // Records are normally sorted by rid; fall back for hand-built containers.
    auto lin = std::ranges::find(records, rid, &Record::rid);
    return lin == records.end() ? nullptr : &*lin;
}

bool same_content(const Container& a, const Container& b) {
    if (a.kind != b.kind || a.schema != b.schema || a.records.size() != b.records.size()) return false;
    auto sa = sorted_contents(a);
    auto sb = sorted_contents(b);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (compare_fields(*sa[i], *sb[i]) != 0) return false;
    }
    return true;
}

std::string RecordRef::to_string() const {
    return version + "/" + container + "/" + std::to_string(rid);
}

std::optional<RecordRef> RecordRef::parse(std::string_view text) {
    auto first = text.find('/');
    auto last = text.rfind('/');
    if (first == std::string_view::npos || first == last) return std::nullopt;
    RecordRef ref;
    ref.version = std::string(text.substr(0, first));
    ref.container = std::string(text.substr(first + 1, last - first - 1));
    auto rid_text = text.substr(last + 1);
    auto [ptr, ec] = std::from_chars(rid_text.data(), rid_text.data() + rid_text.size(), ref.rid);
    if (ec != std::errc{} || ptr != rid_text.data() + rid_text.size() || ref.container.empty()) return std::nullopt;
    return ref;
}

const Container* VersionNode::container(std::string_view name) const {
    auto it = std::ranges::find(containers, name, &Container::name);
    return it == containers.end() ? nullptr : &*it;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::GraphCycle: return "graph cycle";
        case ViolationKind::DanglingEdge: return "dangling edge";
        case ViolationKind::InconsistentEdge: return "inconsistent edge";
        case ViolationKind::DuplicateDiscriminator: return "duplicate discriminator";
        case ViolationKind::DuplicateRecordId: return "duplicate record id";
        case ViolationKind::SchemaViolation: return "schema violation";
        case ViolationKind::DanglingRecordRef: return "dangling record reference";
        case ViolationKind::ProvenanceViolation: return "provenance violation";
        case ViolationKind::ChangedMismatch: return "changed flag mismatch";
    }
    return "?";
}

std::string generate_version_id(std::size_t counter) {
    static thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_int_distribution<unsigned> dist(0, 0xffffff);
    char buf[32];
    std::snprintf(buf, sizeof buf, "v%04zu-%06x", counter, dist(rng));
    return buf;
}

bool valid_version_id(std::string_view id) {
    if (id.empty() || id.starts_with("__")) return false;
    return std::ranges::all_of(id, [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

VersionNode prepare_commit(CommitRequest request, std::string id, const CommitContext& context) {
    if (!valid_version_id(id)) throw CommitError("invalid version id '" + id + "'");
    if (context.contains(id)) throw CommitError("version '" + id + "' already exists and is immutable");

    std::set<std::string> seen_parents;
    for (const auto& p : request.parents) {
        if (!context.contains(p)) throw CommitError("unknown parent version '" + p + "'");
        if (!seen_parents.insert(p).second) throw CommitError("parent '" + p + "' listed twice");
    }
    if (request.author.name.empty()) throw CommitError("author name must not be empty");

    std::set<std::string, std::less<>> names;
    for (const auto& c : request.containers) {
        if (c.name.empty()) throw CommitError("container name must not be empty");
        if (!names.insert(c.name).second) throw CommitError("duplicate discriminator '" + c.name + "' in commit");
        if (c.is_relation()) {
            std::set<std::string> cols;
            for (const auto& col : c.schema) {
                if (col.name.empty() || !cols.insert(col.name).second) {
                    throw CommitError("invalid or duplicate column '" + col.name + "' in '" + c.name + "'");
                }
            }
            for (const auto& r : c.records) {
                if (auto problem = schema_problem(c, r)) throw CommitError(*problem);
            }
        } else if (!c.schema.empty()) {
            throw CommitError("file '" + c.name + "' must not declare a schema");
        }
    }

    std::vector<const VersionNode*> parents;
    for (const auto& p : request.parents) parents.push_back(&context.materialize(p));

    VersionNode node;
    node.id = std::move(id);
    node.author = std::move(request.author);
    node.creation_ts = request.creation_ts;
    node.commit_msg = std::move(request.message);
    node.parents = std::move(request.parents);
    node.containers = std::move(request.containers);

    for (auto& c : node.containers) {
        const Container* base = parents.empty() ? nullptr : parents.front()->container(c.name);
        if (base != nullptr && base->kind != c.kind) base = nullptr;
        assign_rids(c, base);
        std::ranges::sort(c.records, {}, &Record::rid);
        c.changed = std::ranges::none_of(parents, [&](const VersionNode* p) { return parent_has_same(*p, c); });
    }
    std::ranges::sort(node.containers, {}, &Container::name);

    std::set<std::string> ancestor_ids(node.parents.begin(), node.parents.end());
    for (const auto& p : node.parents) {
        for (auto& a : context.ancestors_of(p)) ancestor_ids.insert(std::move(a));
    }
    std::set<std::pair<RecordRef, RecordRef>> edges;
    for (auto& edge : request.provenance) {
        if (edge.child.version.empty()) edge.child.version = node.id;
        if (edge.child.version != node.id) {
            throw CommitError("provenance child " + edge.child.to_string() + " is not in the committed version");
        }
        const Container* cc = node.container(edge.child.container);
        if (cc == nullptr || cc->find(edge.child.rid) == nullptr) {
            throw CommitError("provenance child " + edge.child.to_string() + " does not resolve");
        }
        if (!ancestor_ids.contains(edge.parent.version)) {
            throw CommitError("provenance edge " + edge.child.to_string() + " -> " + edge.parent.to_string() +
                              " violates the version graph");
        }
        const Container* pc = context.materialize(edge.parent.version).container(edge.parent.container);
        if (pc == nullptr || pc->find(edge.parent.rid) == nullptr) {
            throw CommitError("provenance parent " + edge.parent.to_string() + " does not resolve");
        }
        if (edges.emplace(edge.child, edge.parent).second) node.provenance.push_back(std::move(edge));
    }
    return node;
}

void Repository::insert(VersionNode node) {
    if (by_id_.contains(node.id)) throw CommitError("version '" + node.id + "' already exists and is immutable");
    auto owned = std::make_unique<VersionNode>(std::move(node));
    VersionNode* raw = owned.get();
    nodes_.push_back(std::move(owned));
    by_id_.emplace(raw->id, raw);
    auto pos = std::ranges::upper_bound(ordered_, raw, [](const VersionNode* a, const VersionNode* b) {
        return std::tie(a->creation_ts, a->id) < std::tie(b->creation_ts, b->id);
    });
    ordered_.insert(pos, raw);
    for (const auto& e : raw->provenance) {
        prov_parents_[e.child].push_back(e.parent);
        prov_children_[e.parent].push_back(e.child);
    }
}

std::string Repository::commit(CommitRequest request) {
    std::string id = request.id;
    if (id.empty()) {
        do {
            id = generate_version_id(nodes_.size() + 1);
        } while (contains(id));
    }
    VersionNode node = prepare_commit(std::move(request), id, *this);
    for (const auto& p : node.parents) find_mutable(p)->children.push_back(id);
    insert(std::move(node));
    return id;
}

const VersionNode* Repository::find(std::string_view id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

VersionNode* Repository::find_mutable(std::string_view id) {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

const VersionNode& Repository::at(std::string_view id) const {
    const VersionNode* node = find(id);
    if (node == nullptr) throw NotFoundError("unknown version '" + std::string(id) + "'");
    return *node;
}

const Record* Repository::resolve(const RecordRef& ref) const {
    const VersionNode* node = find(ref.version);
    if (node == nullptr) return nullptr;
    const Container* c = node->container(ref.container);
    return c == nullptr ? nullptr : c->find(ref.rid);
}

std::span<const RecordRef> Repository::record_parents(const RecordRef& ref) const {
    auto it = prov_parents_.find(ref);
    if (it == prov_parents_.end()) return {};
    return it->second;
}

std::span<const RecordRef> Repository::record_children(const RecordRef& ref) const {
    auto it = prov_children_.find(ref);
    if (it == prov_children_.end()) return {};
    return it->second;
}

std::span<const std::string> Repository::parents_of(std::string_view id) const {
    const VersionNode* node = find(id);
    if (node == nullptr) return {};
    return node->parents;
}

std::span<const std::string> Repository::children_of(std::string_view id) const {
    const VersionNode* node = find(id);
    if (node == nullptr) return {};
    return node->children;
}

std::vector<std::string> Repository::ancestors_of(std::string_view id) const {
    return ancestors(*this, id);
}

std::map<std::string, bool> compute_changed(const VersionNode& version, const Repository& repo) {
    std::vector<const VersionNode*> parents;
    for (const auto& p : version.parents) parents.push_back(&repo.at(p));
    std::map<std::string, bool> out;
    for (const auto& c : version.containers) {
        out[c.name] = std::ranges::none_of(parents, [&](const VersionNode* p) { return parent_has_same(*p, c); });
    }
    return out;
}

std::vector<Violation> validate_repository(const Repository& repo) {
    std::vector<Violation> out;
    auto report = [&](ViolationKind kind, std::string message) { out.push_back({kind, std::move(message)}); };

    std::vector<std::string> ids;
    for (const VersionNode* v : repo.versions()) ids.push_back(v->id);

    for (const VersionNode* v : repo.versions()) {
        for (const auto& p : v->parents) {
            const VersionNode* parent = repo.find(p);
            if (parent == nullptr) {
                report(ViolationKind::DanglingEdge, v->id + " lists unknown parent " + p);
            } else if (!contains_id(parent->children, v->id)) {
                report(ViolationKind::InconsistentEdge, p + " does not list child " + v->id);
            }
        }
        for (const auto& c : v->children) {
            const VersionNode* child = repo.find(c);
            if (child == nullptr) {
                report(ViolationKind::DanglingEdge, v->id + " lists unknown child " + c);
            } else if (!contains_id(child->parents, v->id)) {
                report(ViolationKind::InconsistentEdge, c + " does not list parent " + v->id);
            }
        }
    }
    if (!topological_order(repo, ids)) report(ViolationKind::GraphCycle, "version graph contains a cycle");

    for (const VersionNode* v : repo.versions()) {
        std::set<std::string, std::less<>> names;
        for (const auto& c : v->containers) {
            if (!names.insert(c.name).second) {
                report(ViolationKind::DuplicateDiscriminator, v->id + " has two containers named " + c.name);
            }
            std::set<RecordId> rids;
            for (const auto& r : c.records) {
                if (!rids.insert(r.rid).second) {
                    report(ViolationKind::DuplicateRecordId,
                           v->id + "/" + c.name + " repeats record id " + std::to_string(r.rid));
                }
                if (c.is_relation()) {
                    if (auto problem = schema_problem(c, r)) report(ViolationKind::SchemaViolation, v->id + ": " + *problem);
                }
            }
        }

        std::optional<std::set<std::string>> ancestor_ids;
        for (const auto& e : v->provenance) {
            if (e.child.version != v->id) {
                report(ViolationKind::ProvenanceViolation,
                       "edge child " + e.child.to_string() + " is stored with version " + v->id);
            }
            if (repo.resolve(e.child) == nullptr) {
                report(ViolationKind::DanglingRecordRef, "provenance child " + e.child.to_string() + " does not resolve");
            }
            if (repo.resolve(e.parent) == nullptr) {
                report(ViolationKind::DanglingRecordRef, "provenance parent " + e.parent.to_string() + " does not resolve");
            }
            if (!ancestor_ids) {
                auto list = ancestors(repo, v->id);
                ancestor_ids.emplace(list.begin(), list.end());
            }
            if (!ancestor_ids->contains(e.parent.version)) {
                report(ViolationKind::ProvenanceViolation, "provenance edge violates version graph: " +
                                                               e.child.to_string() + " -> " + e.parent.to_string());
            }
        }

        bool parents_present = std::ranges::all_of(v->parents, [&](const auto& p) { return repo.contains(p); });
        if (parents_present) {
            auto expected = compute_changed(*v, repo);
            for (const auto& c : v->containers) {
                if (expected[c.name] != c.changed) {
                    report(ViolationKind::ChangedMismatch, v->id + "/" + c.name + " stores changed=" +
                                                               (c.changed ? "true" : "false"));
                }
            }
        }
    }
    return out;
}

}  // namespace vquel
