#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vquel/value.hpp"

namespace vquel {

using RecordId = std::int64_t;

/// Record id placeholder for records that have not been committed yet.
inline constexpr RecordId kUnassignedRid = 0;

using FieldMap = std::map<std::string, Value, std::less<>>;

struct Author {
    std::string name;
    std::optional<std::string> email;

    bool operator==(const Author&) const = default;
};

struct Record {
    RecordId rid = kUnassignedRid;
    FieldMap fields;

    bool operator==(const Record&) const = default;
};

struct Column {
    std::string name;
    ColumnType type = ColumnType::String;

    bool operator==(const Column&) const = default;
};

enum class ContainerKind { Relation, File };

std::string_view to_string(ContainerKind kind);

/// A relation (fixed schema) or a file (schemaless) inside one version.
/// `name` holds the relation name or the file's full path; either way it is
/// a discriminator, unique only within its version.
struct Container {
    ContainerKind kind = ContainerKind::Relation;
    std::string name;
    std::vector<Column> schema;  // relations only
    std::vector<Record> records;
    bool changed = true;

    static Container relation(std::string name, std::vector<Column> schema, std::vector<Record> records = {});
    static Container file(std::string full_path, std::vector<Record> records = {});

    bool is_relation() const { return kind == ContainerKind::Relation; }
    const Record* find(RecordId rid) const;

    bool operator==(const Container&) const = default;
};

/// Content equality: kind, schema and the multiset of field maps. Record ids
/// and the `changed` flag are ignored.
bool same_content(const Container& a, const Container& b);

/// `"<version>/<container>/<rid>"`; the container part may itself contain '/'.
struct RecordRef {
    std::string version;
    std::string container;
    RecordId rid = kUnassignedRid;

    std::string to_string() const;
    static std::optional<RecordRef> parse(std::string_view text);

    auto operator<=>(const RecordRef&) const = default;
};

struct ProvenanceEdge {
    RecordRef child;
    RecordRef parent;

    bool operator==(const ProvenanceEdge&) const = default;
};

struct VersionNode {
    std::string id;
    Author author;
    Timestamp creation_ts;
    std::string commit_msg;
    std::vector<std::string> parents;
    std::vector<std::string> children;
    std::vector<Container> containers;  // sorted by name
    std::vector<ProvenanceEdge> provenance;  // edges whose child lives in this version

    const Container* container(std::string_view name) const;
};

enum class ViolationKind {
    GraphCycle,
    DanglingEdge,
    InconsistentEdge,
    DuplicateDiscriminator,
    DuplicateRecordId,
    SchemaViolation,
    DanglingRecordRef,
    ProvenanceViolation,
    ChangedMismatch,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

/// Input to a commit. Records with rid == kUnassignedRid get ids assigned;
/// provenance child refs with an empty version refer to the new version.
struct CommitRequest {
    std::string id;  // empty: generate
    std::vector<std::string> parents;
    Author author;
    Timestamp creation_ts;
    std::string message;
    std::vector<Container> containers;
    std::vector<ProvenanceEdge> provenance;
};

/// What commit preparation needs from an existing repository.
class CommitContext {
public:
    virtual ~CommitContext() = default;
    virtual bool contains(std::string_view id) const = 0;
    /// Full content of a committed version.
    virtual const VersionNode& materialize(std::string_view id) const = 0;
    /// Strict ancestors of a committed version.
    virtual std::vector<std::string> ancestors_of(std::string_view id) const = 0;
};

/// Validates a commit request and turns it into the version to store:
/// checks parents, discriminators, schemas and provenance, assigns record
/// ids (reusing the first parent's ids for content-identical records), sorts
/// containers and records, and derives `changed`. Throws CommitError.
VersionNode prepare_commit(CommitRequest request, std::string id, const CommitContext& context);

/// `v<counter>-<random hex>`.
std::string generate_version_id(std::size_t counter);

/// Version ids must be non-empty [A-Za-z0-9_.-] and not start with "__".
bool valid_version_id(std::string_view id);

/// In-memory repository of fully materialized versions. Versions are
/// immutable once inserted; the only mutation of an existing node is the
/// addition of child edges by the commit path.
class Repository : public CommitContext {
public:
    Repository() = default;
    Repository(const Repository&) = delete;
    Repository& operator=(const Repository&) = delete;
    Repository(Repository&&) = default;
    Repository& operator=(Repository&&) = default;

    /// Raw insertion without validation (loading, corruption tests).
    /// Rejects an id that is already present.
    void insert(VersionNode node);

    /// Checked commit path; links children of the parents. Returns the id.
    std::string commit(CommitRequest request);

    const VersionNode* find(std::string_view id) const;
    const VersionNode& at(std::string_view id) const;  // throws NotFoundError

    /// Versions ordered by (creation_ts, id).
    const std::vector<const VersionNode*>& versions() const { return ordered_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    const Record* resolve(const RecordRef& ref) const;
    std::span<const RecordRef> record_parents(const RecordRef& ref) const;
    std::span<const RecordRef> record_children(const RecordRef& ref) const;

    // Version graph accessors (graph.hpp concept).
    std::span<const std::string> parents_of(std::string_view id) const;
    std::span<const std::string> children_of(std::string_view id) const;

    bool contains(std::string_view id) const override { return find(id) != nullptr; }
    const VersionNode& materialize(std::string_view id) const override { return at(id); }
    std::vector<std::string> ancestors_of(std::string_view id) const override;

private:
    VersionNode* find_mutable(std::string_view id);

    std::vector<std::unique_ptr<VersionNode>> nodes_;
    std::map<std::string, VersionNode*, std::less<>> by_id_;
    std::vector<const VersionNode*> ordered_;
    std::map<RecordRef, std::vector<RecordRef>> prov_parents_;
    std::map<RecordRef, std::vector<RecordRef>> prov_children_;
};

/// Every violated invariant of the repository; empty iff it is valid.
std::vector<Violation> validate_repository(const Repository& repo);

/// Per-container `changed` flag: true iff no parent holds a same-named
/// container with identical content. Root versions: all true. Throws
/// NotFoundError for a dangling parent id.
std::map<std::string, bool> compute_changed(const VersionNode& version, const Repository& repo);

}  // namespace vquel
